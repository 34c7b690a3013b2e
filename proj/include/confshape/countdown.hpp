#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "confshape/answer_extract.hpp"
#include "confshape/detail/rng.hpp"
#include "confshape/rational.hpp"

namespace confshape::countdown {

inline constexpr int kMaxParseDepth = 64;

struct CountdownProblem {
  std::string id;
  std::vector<long long> numbers;  // multiset of operands, each >= 1
  long long target = 0;

  void validate() const {
    if (numbers.empty()) {
      throw std::invalid_argument("CountdownProblem: numbers empty");
    }
    for (long long n : numbers) {
      if (n < 1) throw std::invalid_argument("CountdownProblem: operand < 1");
    }
    if (target < 1) throw std::invalid_argument("CountdownProblem: target < 1");
  }
};

enum class BinOp { Add, Sub, Mul, Div };

inline char op_symbol(BinOp op) {
  switch (op) {
    case BinOp::Add: return '+';
    case BinOp::Sub: return '-';
    case BinOp::Mul: return '*';
    case BinOp::Div: return '/';
  }
  return '?';
}

// Immutable expression tree over integer literals and the four operators.
// Copies are cheap (shared subtrees) and safe to share across threads.
class Expr {
 public:
  static Expr literal(long long value) { return Expr(value); }
  static Expr binary(BinOp op, Expr left, Expr right) {
    return Expr(Node{op, std::make_shared<const Expr>(std::move(left)),
                     std::make_shared<const Expr>(std::move(right))});
  }

  bool is_literal() const { return std::holds_alternative<long long>(repr_); }
  long long literal_value() const { return std::get<long long>(repr_); }
  BinOp op() const { return std::get<Node>(repr_).op; }
  const Expr& left() const { return *std::get<Node>(repr_).left; }
  const Expr& right() const { return *std::get<Node>(repr_).right; }

  bool operator==(const Expr& o) const {
    if (is_literal() != o.is_literal()) return false;
    if (is_literal()) return literal_value() == o.literal_value();
    return op() == o.op() && left() == o.left() && right() == o.right();
  }

 private:
  struct Node {
    BinOp op;
    std::shared_ptr<const Expr> left;
    std::shared_ptr<const Expr> right;
  };

  explicit Expr(long long v) : repr_(v) {}
  explicit Expr(Node n) : repr_(std::move(n)) {}

  std::variant<long long, Node> repr_;
};

inline void collect_literals(const Expr& e, std::vector<long long>& out) {
  if (e.is_literal()) {
    out.push_back(e.literal_value());
    return;
  }
  collect_literals(e.left(), out);
  collect_literals(e.right(), out);
}

// Renders with structural parentheses: every binary child is parenthesized,
// the root is not. parse_expr(render(e)) reproduces e exactly.
inline std::string render(const Expr& e) {
  struct R {
    static void emit(const Expr& e, std::string& out, bool parens) {
      if (e.is_literal()) {
        out += std::to_string(e.literal_value());
        return;
      }
      if (parens) out += '(';
      emit(e.left(), out, true);
      out += ' ';
      out += op_symbol(e.op());
      out += ' ';
      emit(e.right(), out, true);
      if (parens) out += ')';
    }
  };
  std::string out;
  R::emit(e, out, false);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseFailure {
  std::size_t offset = 0;  // byte offset of the offending token
  std::string message;
};

struct ParseOutcome {
  std::optional<Expr> expr;
  std::optional<ParseFailure> error;
  bool ok() const { return expr.has_value(); }
};

namespace detail_parse {

class Parser {
 public:
  Parser(std::string_view text, int max_depth)
      : text_(text), max_depth_(max_depth) {}

  ParseOutcome run() {
    skip_ws();
    if (pos_ >= text_.size()) return fail(pos_, "expected expression");
    auto e = parse_sum(0);
    if (!e) return std::move(outcome_);
    skip_ws();
    if (pos_ < text_.size()) return fail(pos_, "unexpected token");
    ParseOutcome out;
    out.expr = std::move(e);
    return out;
  }

 private:
  // sum := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)*
  std::optional<Expr> parse_sum(int depth) {
    auto lhs = parse_term(depth);
    if (!lhs) return std::nullopt;
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c != '+' && c != '-') break;
      ++pos_;
      auto rhs = parse_term(depth);
      if (!rhs) return std::nullopt;
      lhs = Expr::binary(c == '+' ? BinOp::Add : BinOp::Sub, std::move(*lhs),
                         std::move(*rhs));
    }
    return lhs;
  }

  std::optional<Expr> parse_term(int depth) {
    auto lhs = parse_factor(depth);
    if (!lhs) return std::nullopt;
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c != '*' && c != '/') break;
      ++pos_;
      auto rhs = parse_factor(depth);
      if (!rhs) return std::nullopt;
      lhs = Expr::binary(c == '*' ? BinOp::Mul : BinOp::Div, std::move(*lhs),
                         std::move(*rhs));
    }
    return lhs;
  }

  std::optional<Expr> parse_factor(int depth) {
    skip_ws();
    if (pos_ >= text_.size()) {
      set_fail(pos_, "expected operand");
      return std::nullopt;
    }
    char c = text_[pos_];
    if (c == '(') {
      if (depth + 1 > max_depth_) {
        set_fail(pos_, "expression too deeply nested");
        return std::nullopt;
      }
      std::size_t open = pos_;
      ++pos_;
      auto inner = parse_sum(depth + 1);
      if (!inner) return std::nullopt;
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') {
        set_fail(pos_ < text_.size() ? pos_ : text_.size(),
                 "unclosed parenthesis opened at offset " +
                     std::to_string(open));
        return std::nullopt;
      }
      ++pos_;
      return inner;
    }
    if (c >= '0' && c <= '9') return parse_literal();
    if (c == '-') {
      set_fail(pos_, "unary minus not allowed");
      return std::nullopt;
    }
    set_fail(pos_, "unexpected token");
    return std::nullopt;
  }

  std::optional<Expr> parse_literal() {
    std::size_t start = pos_;
    unsigned long long v = 0;
    constexpr unsigned long long kMax =
        static_cast<unsigned long long>(std::numeric_limits<long long>::max());
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      unsigned long long digit = static_cast<unsigned long long>(text_[pos_] - '0');
      if (v > (kMax - digit) / 10) {
        set_fail(start, "integer literal out of range");
        return std::nullopt;
      }
      v = v * 10 + digit;
      ++pos_;
    }
    return Expr::literal(static_cast<long long>(v));
  }

  void skip_ws() {
    while (pos_ < text_.size() && detail::is_space(text_[pos_])) ++pos_;
  }

  ParseOutcome fail(std::size_t offset, std::string message) {
    set_fail(offset, std::move(message));
    return std::move(outcome_);
  }

  void set_fail(std::size_t offset, std::string message) {
    if (!outcome_.error) {
      outcome_.error = ParseFailure{offset, std::move(message)};
    }
  }

  std::string_view text_;
  int max_depth_;
  std::size_t pos_ = 0;
  ParseOutcome outcome_;
};

}  // namespace detail_parse

// Accepts integers, parentheses and +,-,*,/ with standard precedence and left
// associativity. Anything else (exponent, names, unary minus) is rejected
// with the byte offset of the offending token.
inline ParseOutcome parse_expr(std::string_view text,
                               int max_depth = kMaxParseDepth) {
  return detail_parse::Parser(text, max_depth).run();
}

// ---------------------------------------------------------------------------
// Evaluation

// Exact rational evaluation. nullopt means division by zero somewhere in the
// tree; there is no other failure mode.
inline std::optional<Rational> evaluate(const Expr& e) {
  if (e.is_literal()) return Rational(e.literal_value());
  auto lhs = evaluate(e.left());
  if (!lhs) return std::nullopt;
  auto rhs = evaluate(e.right());
  if (!rhs) return std::nullopt;
  switch (e.op()) {
    case BinOp::Add: return *lhs + *rhs;
    case BinOp::Sub: return *lhs - *rhs;
    case BinOp::Mul: return *lhs * *rhs;
    case BinOp::Div:
      if (rhs->is_zero()) return std::nullopt;
      return *lhs / *rhs;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Verification

enum class VerifyReason { Ok, WrongValue, InvalidNumbers, ParseError, EvalError };

inline std::string_view to_string(VerifyReason r) {
  switch (r) {
    case VerifyReason::Ok: return "ok";
    case VerifyReason::WrongValue: return "wrong_value";
    case VerifyReason::InvalidNumbers: return "invalid_numbers";
    case VerifyReason::ParseError: return "parse_error";
    case VerifyReason::EvalError: return "eval_error";
  }
  return "?";
}

struct VerifyVerdict {
  VerifyReason reason = VerifyReason::Ok;
  std::optional<Rational> actual;         // WrongValue: the computed value
  std::vector<long long> missing;         // InvalidNumbers: required - used
  std::vector<long long> extra;           // InvalidNumbers: used - required
  std::size_t error_offset = 0;           // ParseError
  std::string detail;

  bool valid() const { return reason == VerifyReason::Ok; }
};

// Total verification of one candidate expression against a problem. Verdict
// priority when several reasons apply:
//   ParseError > InvalidNumbers > EvalError > WrongValue > Ok.
inline VerifyVerdict verify(const CountdownProblem& p, std::string_view text) {
  VerifyVerdict v;
  auto parsed = parse_expr(text);
  if (!parsed.ok()) {
    v.reason = VerifyReason::ParseError;
    v.error_offset = parsed.error->offset;
    v.detail = parsed.error->message;
    return v;
  }

  std::vector<long long> used;
  collect_literals(*parsed.expr, used);
  std::vector<long long> required = p.numbers;
  std::sort(used.begin(), used.end());
  std::sort(required.begin(), required.end());
  std::vector<long long> missing, extra;
  std::set_difference(required.begin(), required.end(), used.begin(),
                      used.end(), std::back_inserter(missing));
  std::set_difference(used.begin(), used.end(), required.begin(),
                      required.end(), std::back_inserter(extra));
  if (!missing.empty() || !extra.empty()) {
    v.reason = VerifyReason::InvalidNumbers;
    v.missing = std::move(missing);
    v.extra = std::move(extra);
    return v;
  }

  auto value = evaluate(*parsed.expr);
  if (!value) {
    v.reason = VerifyReason::EvalError;
    v.detail = "division by zero";
    return v;
  }
  if (*value != Rational(p.target)) {
    v.reason = VerifyReason::WrongValue;
    v.actual = std::move(*value);
    return v;
  }
  return v;
}

// Binary task reward: 1 iff the last well-formed <answer> tag holds an
// expression that verifies Ok. Total; anything else scores 0.
inline double reward(const CountdownProblem& p, std::string_view completion) {
  auto ans = harness::extract_answer(completion, harness::AnswerFormat::AnswerTag);
  if (!ans) return 0.0;
  return verify(p, *ans).valid() ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Exhaustive solving

// Exhaustive search over pairwise combinations with exact arithmetic. items
// carries (value, expression) pairs; every element must be used exactly once.
inline std::optional<Expr> solve_values(
    std::vector<std::pair<Rational, Expr>> items, const Rational& target) {
  if (items.empty()) return std::nullopt;
  if (items.size() == 1) {
    if (items[0].first == target) return items[0].second;
    return std::nullopt;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (i == j) continue;
      const auto& [av, ae] = items[i];
      const auto& [bv, be] = items[j];
      std::vector<std::pair<Rational, Expr>> rest;
      rest.reserve(items.size() - 1);
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (k != i && k != j) rest.push_back(items[k]);
      }
      for (BinOp op : {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div}) {
        if (op == BinOp::Div && bv.is_zero()) continue;
        // Add/Mul are order-symmetric, so only take i < j for them.
        if ((op == BinOp::Add || op == BinOp::Mul) && i > j) continue;
        Rational value = op == BinOp::Add   ? av + bv
                         : op == BinOp::Sub ? av - bv
                         : op == BinOp::Mul ? av * bv
                                            : av / bv;
        auto next = rest;
        next.emplace_back(std::move(value), Expr::binary(op, ae, be));
        if (auto found = solve_values(std::move(next), target)) return found;
      }
    }
  }
  return std::nullopt;
}

// Exhaustive oracle: some expression using each operand exactly once that
// verifies Ok, or nullopt when the instance is unsolvable. Factorial search,
// guarded to at most five operands.
inline std::optional<Expr> solve_brute(const CountdownProblem& p) {
  p.validate();
  if (p.numbers.size() > 5) {
    throw std::invalid_argument("solve_brute: more than 5 operands");
  }
  std::vector<std::pair<Rational, Expr>> items;
  items.reserve(p.numbers.size());
  for (long long n : p.numbers) {
    items.emplace_back(Rational(n), Expr::literal(n));
  }
  return solve_values(std::move(items), Rational(p.target));
}

// ---------------------------------------------------------------------------
// Problem generation

struct GenerateParams {
  int operand_count = 4;      // in [3, 4]
  long long max_number = 10;  // operands uniform in [1, max_number]
  long long max_target = 50;  // accepted targets lie in [1, max_target]
  std::uint64_t seed = 0;
  int max_attempts = 10000;   // per-problem rejection budget

  void validate() const {
    if (operand_count < 3 || operand_count > 4) {
      throw std::invalid_argument("generate: operand_count must be 3 or 4");
    }
    if (max_number < 1) throw std::invalid_argument("generate: max_number < 1");
    if (max_target < 1) throw std::invalid_argument("generate: max_target < 1");
    if (max_attempts < 1) throw std::invalid_argument("generate: max_attempts < 1");
  }
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedProblem {
  CountdownProblem problem;
  Expr solution;  // the expression whose value became the target
};

namespace detail_gen {

inline Expr random_tree(std::vector<long long>& numbers, std::size_t lo,
                        std::size_t hi, detail::Rng& rng) {
  if (hi - lo == 1) return Expr::literal(numbers[lo]);
  std::size_t split = lo + 1 + rng.below(hi - lo - 1);
  static constexpr BinOp kOps[4] = {BinOp::Add, BinOp::Sub, BinOp::Mul,
                                    BinOp::Div};
  BinOp op = kOps[rng.below(4)];
  Expr left = random_tree(numbers, lo, split, rng);
  Expr right = random_tree(numbers, split, hi, rng);
  return Expr::binary(op, std::move(left), std::move(right));
}

}  // namespace detail_gen

// Solvable-by-construction generation: sample operands, compose a random
// expression over them, take its value as the target, and reject values
// outside [1, max_target]. Deterministic given the seed; each problem draws
// from an independent substream, so output is identical across runs and
// thread counts.
inline std::vector<GeneratedProblem> generate_with_solutions(
    int count, const GenerateParams& params) {
  if (count < 0) throw std::invalid_argument("generate: negative count");
  params.validate();
  std::vector<GeneratedProblem> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int index = 0; index < count; ++index) {
    detail::Rng rng(detail::mix2(params.seed, static_cast<std::uint64_t>(index) + 1));
    bool done = false;
    for (int attempt = 0; attempt < params.max_attempts && !done; ++attempt) {
      std::vector<long long> numbers(static_cast<std::size_t>(params.operand_count));
      for (auto& n : numbers) n = rng.range(1, params.max_number);
      // Shuffle so the tree sees operands in random order.
      for (std::size_t i = numbers.size(); i > 1; --i) {
        std::swap(numbers[i - 1], numbers[rng.below(i)]);
      }
      Expr tree = detail_gen::random_tree(numbers, 0, numbers.size(), rng);
      auto value = evaluate(tree);
      if (!value || !value->is_integer()) continue;
      const auto& num = value->numerator();
      if (num < 1 || num > params.max_target) continue;
      CountdownProblem p;
      p.id = "cd-" + std::to_string(params.seed) + "-" + std::to_string(index);
      p.numbers = numbers;
      p.target = static_cast<long long>(num);
      out.push_back(GeneratedProblem{std::move(p), std::move(tree)});
      done = true;
    }
    if (!done) {
      throw GenerationError(
          "generate: rejection budget exhausted for problem " +
          std::to_string(index) +
          " (parameters admit no target in [1, " +
          std::to_string(params.max_target) + "])");
    }
  }
  return out;
}

inline std::vector<CountdownProblem> generate(int count,
                                              const GenerateParams& params) {
  std::vector<CountdownProblem> out;
  auto gen = generate_with_solutions(count, params);
  out.reserve(gen.size());
  for (auto& g : gen) out.push_back(std::move(g.problem));
  return out;
}

// ---------------------------------------------------------------------------
// Task prompt and serialization

// Conversation-style task prompt; the completion is expected to reason in
// <think> tags and answer in <answer> tags.
inline std::string task_prompt(const CountdownProblem& p) {
  std::ostringstream os;
  os << "A conversation between User and Assistant. The user asks a "
        "question, and the Assistant solves it. The assistant first thinks "
        "about the reasoning process in the mind and then provides the user "
        "with the answer.\n\nUser: Using the numbers [";
  for (std::size_t i = 0; i < p.numbers.size(); ++i) {
    if (i) os << ", ";
    os << p.numbers[i];
  }
  os << "], create an equation that equals " << p.target
     << ". You can use basic arithmetic operations (+, -, *, /) and each "
        "number can only be used once. Show your work in <think> </think> "
        "tags. And return the final answer in <answer> </answer> tags, for "
        "example <answer> (1 + 2) / 3 </answer>.\n\nAssistant: Let me solve "
        "this step by step.\n<think>";
  return os.str();
}

inline nlohmann::json to_json(const CountdownProblem& p) {
  return nlohmann::json{{"id", p.id}, {"numbers", p.numbers}, {"target", p.target}};
}

inline CountdownProblem problem_from_json(const nlohmann::json& j) {
  CountdownProblem p;
  p.id = j.at("id").get<std::string>();
  p.numbers = j.at("numbers").get<std::vector<long long>>();
  p.target = j.at("target").get<long long>();
  p.validate();
  return p;
}

}  // namespace confshape::countdown
