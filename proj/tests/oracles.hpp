// Test-only oracles, deliberately independent of the library's
// implementation paths:
//  - GMP rational expression evaluation (vs. the cpp_int Rational evaluator)
//  - exhaustive expression enumeration over small operand multisets
//    (vs. solve_brute's pairwise-combination search)
//  - rank-transform + Pearson Spearman (vs. the library's midrank formula)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "confshape/countdown.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// GMP evaluation of a parsed expression tree, node by node.

inline std::optional<mpq_class> gmp_eval(const confshape::countdown::Expr& e) {
  using confshape::countdown::BinOp;
  if (e.is_literal()) return mpq_class(static_cast<long>(e.literal_value()));
  auto lhs = gmp_eval(e.left());
  if (!lhs) return std::nullopt;
  auto rhs = gmp_eval(e.right());
  if (!rhs) return std::nullopt;
  switch (e.op()) {
    case BinOp::Add: return mpq_class(*lhs + *rhs);
    case BinOp::Sub: return mpq_class(*lhs - *rhs);
    case BinOp::Mul: return mpq_class(*lhs * *rhs);
    case BinOp::Div:
      if (*rhs == 0) return std::nullopt;
      return mpq_class(*lhs / *rhs);
  }
  return std::nullopt;
}

inline bool rational_equals_gmp(const confshape::countdown::Rational& r,
                                const mpq_class& q) {
  mpq_class mine(r.numerator().str(), 10);
  mine /= mpq_class(r.denominator().str(), 10);
  mine.canonicalize();
  mpq_class theirs = q;
  theirs.canonicalize();
  return mine == theirs;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over operand sequences: all permutations, all
// binary bracketings, all operator assignments. Expressions are built as
// strings with full parentheses; values are computed with GMP.

struct EnumeratedExpr {
  std::string text;
  mpq_class value;
};

namespace detail {

struct Piece {
  std::string text;
  std::optional<mpq_class> value;
};

inline std::vector<Piece> combine(const std::vector<long long>& seq,
                                  std::size_t lo, std::size_t hi) {
  std::vector<Piece> out;
  if (hi - lo == 1) {
    out.push_back(Piece{std::to_string(seq[lo]),
                        mpq_class(static_cast<long>(seq[lo]))});
    return out;
  }
  static const char* symbols = "+-*/";
  for (std::size_t split = lo + 1; split < hi; ++split) {
    auto lefts = combine(seq, lo, split);
    auto rights = combine(seq, split, hi);
    for (const auto& l : lefts) {
      for (const auto& r : rights) {
        for (int op = 0; op < 4; ++op) {
          Piece p;
          p.text = "(" + l.text + " " + symbols[op] + " " + r.text + ")";
          if (l.value && r.value) {
            switch (op) {
              case 0: p.value = mpq_class(*l.value + *r.value); break;
              case 1: p.value = mpq_class(*l.value - *r.value); break;
              case 2: p.value = mpq_class(*l.value * *r.value); break;
              case 3:
                if (*r.value == 0) {
                  p.value = std::nullopt;
                } else {
                  p.value = mpq_class(*l.value / *r.value);
                }
                break;
            }
          }
          out.push_back(std::move(p));
        }
      }
    }
  }
  return out;
}

}  // namespace detail

// Every expression over the multiset (each element used exactly once),
// including division-by-zero ones, which carry no value.
inline std::vector<EnumeratedExpr> enumerate_expressions(
    std::vector<long long> numbers) {
  std::sort(numbers.begin(), numbers.end());
  std::set<std::string> seen;
  std::vector<EnumeratedExpr> out;
  do {
    for (auto& piece : detail::combine(numbers, 0, numbers.size())) {
      if (!piece.value) continue;
      if (seen.insert(piece.text).second) {
        EnumeratedExpr e;
        e.text = std::move(piece.text);
        e.value = *piece.value;
        out.push_back(std::move(e));
      }
    }
  } while (std::next_permutation(numbers.begin(), numbers.end()));
  return out;
}

// Achievable integer targets in [1, max_target], with a witness expression.
inline std::map<long long, std::string> achievable_targets(
    const std::vector<long long>& numbers, long long max_target) {
  std::map<long long, std::string> out;
  for (const auto& e : enumerate_expressions(numbers)) {
    mpq_class q = e.value;
    q.canonicalize();
    if (q.get_den() != 1) continue;
    if (q.get_num() < 1 || q.get_num() > max_target) continue;
    long long target = static_cast<long long>(q.get_num().get_si());
    out.emplace(target, e.text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spearman oracle: explicit rank transform (midranks for ties) followed by
// textbook Pearson on the ranks.

inline std::vector<double> rank_transform(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> ranks(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    // average of ranks below+1 .. below+equal
    ranks[i] = static_cast<double>(below) +
               (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// rho between values and their 0-based index; constant input reports
// degenerate instead of a correlation.
inline std::optional<double> spearman_oracle(const std::vector<double>& v) {
  bool constant = true;
  for (std::size_t i = 1; i < v.size(); ++i) constant &= v[i] == v[0];
  if (constant) return std::nullopt;
  std::vector<double> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<double>(i);
  return pearson(rank_transform(v), rank_transform(idx));
}

// Plain left-to-right dot product, the independent route for scoring checks.
inline double dot_oracle(const std::vector<double>& a,
                         const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace oracles
