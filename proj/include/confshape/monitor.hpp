#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "confshape/countdown.hpp"
#include "confshape/detail/text.hpp"
#include "confshape/model_client.hpp"
#include "confshape/monitor_prompts.hpp"

namespace confshape::monitor {

enum class Profile { Mcq, Countdown };

enum class GapCategory {
  Misreading,
  IgnoredEvidence,
  WrongConclusion,
  UnsupportedConclusion,
  InternalContradiction,
  // Countdown extensions
  ArithmeticError,
  InvalidNumbers,
  AbandonedCorrectPath,
  UnsupportedClaim,
};

enum class Severity { Critical, Major, Minor };

enum class StatementKind {
  // MCQ
  Fact,
  Inference,
  Rule,
  Meta,
  // Countdown (Inference and Meta shared)
  Calculation,
  Verification,
  Backtrack,
  Conclusion,
};

inline std::string_view to_string(GapCategory c) {
  switch (c) {
    case GapCategory::Misreading: return "MISREADING";
    case GapCategory::IgnoredEvidence: return "IGNORED_EVIDENCE";
    case GapCategory::WrongConclusion: return "WRONG_CONCLUSION";
    case GapCategory::UnsupportedConclusion: return "UNSUPPORTED_CONCLUSION";
    case GapCategory::InternalContradiction: return "INTERNAL_CONTRADICTION";
    case GapCategory::ArithmeticError: return "ARITHMETIC_ERROR";
    case GapCategory::InvalidNumbers: return "INVALID_NUMBERS";
    case GapCategory::AbandonedCorrectPath: return "ABANDONED_CORRECT_PATH";
    case GapCategory::UnsupportedClaim: return "UNSUPPORTED_CLAIM";
  }
  return "?";
}

inline std::optional<GapCategory> category_from_string(std::string_view s) {
  if (s == "MISREADING") return GapCategory::Misreading;
  if (s == "IGNORED_EVIDENCE") return GapCategory::IgnoredEvidence;
  if (s == "WRONG_CONCLUSION") return GapCategory::WrongConclusion;
  if (s == "UNSUPPORTED_CONCLUSION") return GapCategory::UnsupportedConclusion;
  if (s == "INTERNAL_CONTRADICTION") return GapCategory::InternalContradiction;
  if (s == "ARITHMETIC_ERROR") return GapCategory::ArithmeticError;
  if (s == "INVALID_NUMBERS") return GapCategory::InvalidNumbers;
  if (s == "ABANDONED_CORRECT_PATH") return GapCategory::AbandonedCorrectPath;
  if (s == "UNSUPPORTED_CLAIM") return GapCategory::UnsupportedClaim;
  return std::nullopt;
}

inline bool category_admissible(GapCategory c, Profile p) {
  switch (c) {
    case GapCategory::Misreading:
    case GapCategory::IgnoredEvidence:
    case GapCategory::UnsupportedConclusion:
      return p == Profile::Mcq;
    case GapCategory::WrongConclusion:
    case GapCategory::InternalContradiction:
      return true;
    case GapCategory::ArithmeticError:
    case GapCategory::InvalidNumbers:
    case GapCategory::AbandonedCorrectPath:
    case GapCategory::UnsupportedClaim:
      return p == Profile::Countdown;
  }
  return false;
}

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Critical: return "critical";
    case Severity::Major: return "major";
    case Severity::Minor: return "minor";
  }
  return "?";
}

inline std::optional<Severity> severity_from_string(std::string_view s) {
  if (s == "critical") return Severity::Critical;
  if (s == "major") return Severity::Major;
  if (s == "minor") return Severity::Minor;
  return std::nullopt;
}

inline std::string_view to_string(StatementKind k) {
  switch (k) {
    case StatementKind::Fact: return "fact";
    case StatementKind::Inference: return "inference";
    case StatementKind::Rule: return "rule";
    case StatementKind::Meta: return "meta";
    case StatementKind::Calculation: return "calculation";
    case StatementKind::Verification: return "verification";
    case StatementKind::Backtrack: return "backtrack";
    case StatementKind::Conclusion: return "conclusion";
  }
  return "?";
}

inline std::optional<StatementKind> kind_from_string(std::string_view s) {
  if (s == "fact") return StatementKind::Fact;
  if (s == "inference") return StatementKind::Inference;
  if (s == "rule") return StatementKind::Rule;
  if (s == "meta") return StatementKind::Meta;
  if (s == "calculation") return StatementKind::Calculation;
  if (s == "verification") return StatementKind::Verification;
  if (s == "backtrack") return StatementKind::Backtrack;
  if (s == "conclusion") return StatementKind::Conclusion;
  return std::nullopt;
}

inline bool kind_admissible(StatementKind k, Profile p) {
  switch (k) {
    case StatementKind::Fact:
    case StatementKind::Rule:
      return p == Profile::Mcq;
    case StatementKind::Inference:
    case StatementKind::Meta:
      return true;
    case StatementKind::Calculation:
    case StatementKind::Verification:
    case StatementKind::Backtrack:
    case StatementKind::Conclusion:
      return p == Profile::Countdown;
  }
  return false;
}

struct Statement {
  std::string id;  // unique within a trace, "s<chunk>_<n>"
  int chunk_index = 0;
  std::string text;
  StatementKind kind = StatementKind::Meta;
  std::optional<std::string> expression;        // calculation
  std::optional<std::string> claimed_result;    // calculation
  std::optional<std::string> final_expression;  // conclusion
};

struct Gap {
  std::string id;
  GapCategory category = GapCategory::WrongConclusion;
  Severity severity = Severity::Major;
  std::vector<std::string> statement_ids;  // nonempty
  std::vector<std::string> evidence;       // verbatim quotes
  bool resolved = false;
  bool deterministic = false;  // phase-0 / exact-arithmetic gaps; judge
                               // resolutions cannot dismiss these
};

struct GapReport {
  std::string sample_id;
  std::vector<Gap> gaps;
  int judge_parse_warnings = 0;

  bool has_gap() const {
    for (const auto& g : gaps) {
      if (!g.resolved) return true;
    }
    return false;
  }
  std::size_t unresolved_count() const {
    std::size_t n = 0;
    for (const auto& g : gaps) n += g.resolved ? 0 : 1;
    return n;
  }
  std::map<GapCategory, std::size_t> category_counts() const {
    std::map<GapCategory, std::size_t> out;
    for (const auto& g : gaps) {
      if (!g.resolved) ++out[g.category];
    }
    return out;
  }
  std::map<Severity, std::size_t> severity_counts() const {
    std::map<Severity, std::size_t> out;
    for (const auto& g : gaps) {
      if (!g.resolved) ++out[g.severity];
    }
    return out;
  }
};

class JudgeReplyError : public std::runtime_error {
 public:
  JudgeReplyError(int chunk_index, const std::string& what)
      : std::runtime_error(what), chunk_index_(chunk_index) {}
  int chunk_index() const { return chunk_index_; }

 private:
  int chunk_index_;
};

// ---------------------------------------------------------------------------
// Prompts

struct PromptSet {
  std::string extraction;
  std::string verification;
  std::string finalization;  // empty for profiles without a judge final pass
};

inline PromptSet default_prompts(Profile p) {
  if (p == Profile::Countdown) {
    return PromptSet{std::string(prompts::kCountdownExtract),
                     std::string(prompts::kCountdownVerify),
                     std::string(prompts::kCountdownFinalize)};
  }
  return PromptSet{std::string(prompts::kMcqExtract),
                   std::string(prompts::kMcqVerify), std::string()};
}

// Loads templates from <dir>/<profile>_extract.txt etc. Missing files fall
// back to the built-in defaults, so a directory can override selectively.
inline PromptSet load_prompts(Profile p, const std::filesystem::path& dir) {
  auto read = [&](const std::string& name, std::string fallback) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) return fallback;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  PromptSet defaults = default_prompts(p);
  const std::string prefix = p == Profile::Countdown ? "countdown" : "mcq";
  PromptSet out;
  out.extraction = read(prefix + "_extract.txt", defaults.extraction);
  out.verification = read(prefix + "_verify.txt", defaults.verification);
  if (p == Profile::Countdown) {
    out.finalization = read(prefix + "_finalize.txt", defaults.finalization);
  }
  return out;
}

namespace detail_monitor {

inline std::string fill(std::string tmpl, std::string_view key,
                        std::string_view value) {
  const std::string token = "{" + std::string(key) + "}";
  std::size_t pos = 0;
  while ((pos = tmpl.find(token, pos)) != std::string::npos) {
    tmpl.replace(pos, token.size(), value);
    pos += value.size();
  }
  return tmpl;
}

// Pulls the JSON object out of a judge reply that may carry prose or fences.
inline std::optional<nlohmann::json> parse_reply(std::string_view reply) {
  std::size_t begin = reply.find('{');
  std::size_t end = reply.rfind('}');
  if (begin == std::string_view::npos || end == std::string_view::npos ||
      end < begin) {
    return std::nullopt;
  }
  auto parsed = nlohmann::json::parse(reply.substr(begin, end - begin + 1),
                                      nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  return parsed;
}

// One call plus one schema-reminder repair retry.
inline nlohmann::json ask_judge(model::ModelClient& judge, std::string prompt,
                                int chunk_index) {
  model::GenRequest req;
  req.prompt = prompt;
  req.max_tokens = 2048;
  req.sample_key = model::SampleKey{"judge", chunk_index, 0};
  std::string reply = judge.generate(req).text;
  if (auto parsed = parse_reply(reply)) return *parsed;
  req.prompt = prompt + std::string(prompts::kRepairReminder);
  req.sample_key.mc_index = 1;
  reply = judge.generate(req).text;
  if (auto parsed = parse_reply(reply)) return *parsed;
  throw JudgeReplyError(chunk_index, "judge reply is not valid JSON");
}

inline nlohmann::json statements_json(std::span<const Statement> statements) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : statements) {
    nlohmann::json j{{"id", s.id},
                     {"kind", std::string(to_string(s.kind))},
                     {"text", s.text}};
    if (s.expression) j["expression"] = *s.expression;
    if (s.claimed_result) j["claimed_result"] = *s.claimed_result;
    if (s.final_expression) j["final_expression"] = *s.final_expression;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json gaps_json(std::span<const Gap> gaps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : gaps) {
    arr.push_back(nlohmann::json{
        {"id", g.id},
        {"category", std::string(to_string(g.category))},
        {"severity", std::string(to_string(g.severity))},
        {"statement_ids", g.statement_ids},
        {"evidence", g.evidence},
        {"resolved", g.resolved}});
  }
  return arr;
}

}  // namespace detail_monitor

// ---------------------------------------------------------------------------
// Phase 0: deterministic final-answer check (Countdown)

// Verifies the last <answer> expression programmatically before any judge is
// involved. An unparseable or missing answer cannot be correct, so it is
// flagged with critical severity.
inline std::vector<Gap> phase0_check(const countdown::CountdownProblem& p,
                                     std::string_view completion) {
  std::vector<Gap> out;
  auto ans = harness::extract_answer(completion, harness::AnswerFormat::AnswerTag);
  auto verdict = countdown::verify(p, ans ? std::string_view(*ans) : std::string_view(""));
  if (verdict.valid()) return out;

  Gap g;
  g.deterministic = true;
  g.severity = Severity::Critical;
  g.statement_ids = {"final_answer"};
  switch (verdict.reason) {
    case countdown::VerifyReason::WrongValue:
      g.id = "p0_wrong_value";
      g.category = GapCategory::WrongConclusion;
      g.evidence = {std::string(ans ? *ans : ""),
                    "evaluates to " + verdict.actual->str() + ", not " +
                        std::to_string(p.target)};
      break;
    case countdown::VerifyReason::InvalidNumbers: {
      g.id = "p0_invalid_numbers";
      g.category = GapCategory::InvalidNumbers;
      std::ostringstream ev;
      ev << "missing: [";
      for (std::size_t i = 0; i < verdict.missing.size(); ++i) {
        if (i) ev << ", ";
        ev << verdict.missing[i];
      }
      ev << "], extra: [";
      for (std::size_t i = 0; i < verdict.extra.size(); ++i) {
        if (i) ev << ", ";
        ev << verdict.extra[i];
      }
      ev << "]";
      g.evidence = {std::string(ans ? *ans : ""), ev.str()};
      break;
    }
    case countdown::VerifyReason::ParseError:
    case countdown::VerifyReason::EvalError:
      // Unverifiable answer: reported as a wrong conclusion with the parse
      // note kept in the evidence.
      g.id = "p0_unverifiable";
      g.category = GapCategory::WrongConclusion;
      g.evidence = {std::string(ans ? *ans : "<no answer tag>"),
                    std::string(countdown::to_string(verdict.reason)) +
                        (verdict.detail.empty() ? "" : ": " + verdict.detail)};
      break;
    case countdown::VerifyReason::Ok:
      break;
  }
  out.push_back(std::move(g));
  return out;
}

// ---------------------------------------------------------------------------
// Chunking

struct Chunk {
  int index = 0;
  std::string text;
};

// Paragraph chunks split on blank lines; paragraphs longer than the sentence
// budget are split at sentence boundaries (terminal punctuation followed by
// whitespace). Concatenating the chunk texts reproduces the input minus the
// consumed blank-line separators.
inline std::vector<Chunk> split_chunks(std::string_view cot,
                                       int sentence_budget = 12) {
  if (sentence_budget < 1) {
    throw std::invalid_argument("split_chunks: sentence budget < 1");
  }
  std::vector<std::string_view> paragraphs;
  std::size_t start = 0;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    std::string_view para = cot.substr(start, end - start);
    if (!detail::trim(para).empty()) paragraphs.push_back(para);
  };
  while (i < cot.size()) {
    // A separator is a newline followed by optional horizontal space and
    // another newline.
    if (cot[i] == '\n') {
      std::size_t j = i + 1;
      while (j < cot.size() && (cot[j] == ' ' || cot[j] == '\t' || cot[j] == '\r')) ++j;
      if (j < cot.size() && cot[j] == '\n') {
        flush(i);
        while (j < cot.size() && (cot[j] == '\n' || cot[j] == ' ' ||
                                  cot[j] == '\t' || cot[j] == '\r')) {
          ++j;
        }
        start = j;
        i = j;
        continue;
      }
    }
    ++i;
  }
  flush(cot.size());

  std::vector<Chunk> out;
  for (std::string_view para : paragraphs) {
    auto ends = detail::sentence_ends(para);
    if (static_cast<int>(ends.size()) <= sentence_budget) {
      out.push_back(Chunk{static_cast<int>(out.size()), std::string(para)});
      continue;
    }
    std::size_t piece_start = 0;
    for (std::size_t s = 0; s < ends.size(); s += static_cast<std::size_t>(sentence_budget)) {
      std::size_t last = std::min(s + static_cast<std::size_t>(sentence_budget),
                                  ends.size()) - 1;
      std::size_t piece_end = ends[last];
      if (last + 1 == ends.size()) piece_end = para.size();
      out.push_back(Chunk{static_cast<int>(out.size()),
                          std::string(para.substr(piece_start, piece_end - piece_start))});
      piece_start = piece_end;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase 1: statement extraction

struct ExtractionResult {
  std::vector<Statement> statements;
  int dropped = 0;  // malformed judge entries skipped
};

inline ExtractionResult extract_statements(model::ModelClient& judge,
                                           std::string_view question,
                                           const Chunk& chunk, Profile profile,
                                           const PromptSet& prompts) {
  std::string prompt = detail_monitor::fill(prompts.extraction, "question",
                                            question);
  prompt = detail_monitor::fill(std::move(prompt), "chunk", chunk.text);
  nlohmann::json reply = detail_monitor::ask_judge(judge, std::move(prompt),
                                                   chunk.index);

  ExtractionResult out;
  if (!reply.contains("statements") || !reply["statements"].is_array()) {
    throw JudgeReplyError(chunk.index, "extraction reply lacks statements[]");
  }
  int ordinal = 0;
  for (const auto& entry : reply["statements"]) {
    if (!entry.is_object() || !entry.contains("kind") || !entry.contains("text") ||
        !entry["kind"].is_string() || !entry["text"].is_string()) {
      ++out.dropped;
      continue;
    }
    auto kind = kind_from_string(entry["kind"].get<std::string>());
    if (!kind || !kind_admissible(*kind, profile)) {
      ++out.dropped;
      continue;
    }
    Statement s;
    s.chunk_index = chunk.index;
    s.id = "s" + std::to_string(chunk.index) + "_" + std::to_string(ordinal++);
    s.kind = *kind;
    s.text = entry["text"].get<std::string>();
    auto opt_str = [&](const char* key) -> std::optional<std::string> {
      if (entry.contains(key) && entry[key].is_string()) {
        std::string v = entry[key].get<std::string>();
        if (!v.empty()) return v;
      }
      return std::nullopt;
    };
    s.expression = opt_str("expression");
    s.claimed_result = opt_str("claimed_result");
    s.final_expression = opt_str("final_expression");
    out.statements.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase 2: statement verification

namespace detail_monitor {

// Exact arithmetic check of one calculation statement. nullopt when the
// statement is not checkable (no expression, parse failure, or an
// unparseable claimed result).
inline std::optional<Gap> arithmetic_check(const Statement& s) {
  if (s.kind != StatementKind::Calculation) return std::nullopt;
  if (!s.expression || !s.claimed_result) return std::nullopt;
  auto parsed = countdown::parse_expr(*s.expression);
  if (!parsed.ok()) return std::nullopt;
  auto claimed = countdown::Rational::parse_decimal(*s.claimed_result);
  if (!claimed) return std::nullopt;
  auto actual = countdown::evaluate(*parsed.expr);
  if (actual && *actual == *claimed) return std::nullopt;

  Gap g;
  g.id = "ar_" + s.id;
  g.deterministic = true;
  g.category = GapCategory::ArithmeticError;
  g.severity = Severity::Critical;
  g.statement_ids = {s.id};
  g.evidence = {s.text, *s.expression + " = " +
                            (actual ? actual->str() : std::string("undefined")) +
                            ", claimed " + *s.claimed_result};
  return g;
}

inline std::vector<Gap> parse_gap_entries(const nlohmann::json& arr,
                                          Profile profile,
                                          std::string_view id_prefix,
                                          int* counter, int* warnings) {
  std::vector<Gap> out;
  for (const auto& entry : arr) {
    if (!entry.is_object() || !entry.contains("category") ||
        !entry["category"].is_string()) {
      ++*warnings;
      continue;
    }
    auto category = category_from_string(entry["category"].get<std::string>());
    if (!category || !category_admissible(*category, profile)) {
      ++*warnings;
      continue;
    }
    Gap g;
    g.category = *category;
    g.severity = Severity::Major;
    if (entry.contains("severity") && entry["severity"].is_string()) {
      if (auto sev = severity_from_string(entry["severity"].get<std::string>())) {
        g.severity = *sev;
      }
    }
    if (entry.contains("statement_ids") && entry["statement_ids"].is_array()) {
      for (const auto& sid : entry["statement_ids"]) {
        if (sid.is_string()) g.statement_ids.push_back(sid.get<std::string>());
      }
    }
    if (entry.contains("evidence") && entry["evidence"].is_array()) {
      for (const auto& ev : entry["evidence"]) {
        if (ev.is_string()) g.evidence.push_back(ev.get<std::string>());
      }
    }
    // Judge-produced gaps must point at statements and carry evidence.
    if (g.statement_ids.empty() || g.evidence.empty()) {
      ++*warnings;
      continue;
    }
    g.id = std::string(id_prefix) + std::to_string((*counter)++);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail_monitor

// Verifies freshly extracted statements against the question and the ledger
// of previously verified statements. For the Countdown profile every
// checkable calculation statement is additionally verified with the exact
// evaluator; a mismatch is flagged even when the judge missed it.
inline std::vector<Gap> verify_statements(model::ModelClient& judge,
                                          std::string_view question,
                                          std::span<const Statement> fresh,
                                          std::span<const Statement> ledger,
                                          Profile profile,
                                          const PromptSet& prompts,
                                          int* gap_counter,
                                          int* parse_warnings) {
  std::vector<Gap> out;
  if (fresh.empty()) return out;

  const int chunk_index = fresh.front().chunk_index;
  std::string prompt = detail_monitor::fill(prompts.verification, "question",
                                            question);
  prompt = detail_monitor::fill(std::move(prompt), "statements",
                                detail_monitor::statements_json(fresh).dump(2));
  prompt = detail_monitor::fill(std::move(prompt), "ledger",
                                detail_monitor::statements_json(ledger).dump(2));
  nlohmann::json reply =
      detail_monitor::ask_judge(judge, std::move(prompt), chunk_index);

  if (reply.contains("gaps") && reply["gaps"].is_array()) {
    out = detail_monitor::parse_gap_entries(reply["gaps"], profile, "g",
                                            gap_counter, parse_warnings);
  }

  if (profile == Profile::Countdown) {
    for (const auto& s : fresh) {
      if (auto gap = detail_monitor::arithmetic_check(s)) {
        out.push_back(std::move(*gap));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finalization

namespace detail_monitor {

inline std::string dedup_key(const Gap& g) {
  std::vector<std::string> ids = g.statement_ids;
  std::sort(ids.begin(), ids.end());
  std::string key(to_string(g.category));
  for (const auto& id : ids) {
    key += '|';
    key += id;
  }
  return key;
}

// Keeps the first gap per (category, statement id set); later duplicates from
// other chunks are dropped.
inline void dedup_gaps(std::vector<Gap>& gaps) {
  std::unordered_set<std::string> seen;
  std::vector<Gap> kept;
  kept.reserve(gaps.size());
  for (auto& g : gaps) {
    if (seen.insert(dedup_key(g)).second) kept.push_back(std::move(g));
  }
  gaps = std::move(kept);
}

// Replays the calculation ledger up to (not including) the statement with
// the given id and returns the remaining value state, or nullopt when the
// replay is ambiguous (an operand that is neither unused nor a prior result).
inline std::optional<std::vector<std::pair<countdown::Rational, countdown::Expr>>>
replay_state(const countdown::CountdownProblem& problem,
             std::span<const Statement> statements, std::string_view until_id) {
  using countdown::Expr;
  using countdown::Rational;
  std::vector<std::pair<Rational, Expr>> state;
  for (long long n : problem.numbers) {
    state.emplace_back(Rational(n), Expr::literal(n));
  }
  for (const auto& s : statements) {
    if (s.id == until_id) break;
    if (s.kind != StatementKind::Calculation || !s.expression) continue;
    auto parsed = countdown::parse_expr(*s.expression);
    if (!parsed.ok()) continue;  // non-arithmetic side remark; state unchanged
    auto value = countdown::evaluate(*parsed.expr);
    if (!value) continue;
    std::vector<long long> literals;
    countdown::collect_literals(*parsed.expr, literals);
    std::vector<std::pair<Rational, Expr>> next = state;
    bool ok = true;
    for (long long lit : literals) {
      auto it = std::find_if(next.begin(), next.end(), [&](const auto& item) {
        return item.first == Rational(lit);
      });
      if (it == next.end()) {
        ok = false;
        break;
      }
      next.erase(it);
    }
    if (!ok) return std::nullopt;  // ambiguous: operand not available
    next.emplace_back(*value, *parsed.expr);
    state = std::move(next);
  }
  return state;
}

}  // namespace detail_monitor

// Deduplicates gaps, runs the Countdown judge finalization pass (keep or
// dismiss, global checks), and deterministically re-checks abandoned-path
// verdicts with the exhaustive solver where the remaining state can be
// reconstructed and has at most five values. The MCQ profile has no judge
// pass; it deduplicates and aggregates locally. Deterministic gaps are never
// dismissed by the judge.
inline GapReport finalize(model::ModelClient* judge, std::string_view question,
                          std::span<const Statement> all_statements,
                          std::vector<Gap> gaps, Profile profile,
                          const PromptSet& prompts,
                          const countdown::CountdownProblem* problem = nullptr,
                          std::string_view sample_id = "",
                          int parse_warnings = 0) {
  detail_monitor::dedup_gaps(gaps);

  GapReport report;
  report.sample_id = std::string(sample_id);
  report.judge_parse_warnings = parse_warnings;

  if (profile == Profile::Countdown && judge != nullptr &&
      !prompts.finalization.empty()) {
    std::string prompt = detail_monitor::fill(prompts.finalization, "question",
                                              question);
    prompt = detail_monitor::fill(
        std::move(prompt), "statements",
        detail_monitor::statements_json(all_statements).dump(2));
    prompt = detail_monitor::fill(std::move(prompt), "gaps",
                                  detail_monitor::gaps_json(gaps).dump(2));
    nlohmann::json reply = detail_monitor::ask_judge(*judge, std::move(prompt),
                                                     /*chunk_index=*/-1);
    if (reply.contains("resolutions") && reply["resolutions"].is_array()) {
      for (const auto& r : reply["resolutions"]) {
        if (!r.is_object() || !r.contains("gap_id") || !r.contains("action")) {
          ++report.judge_parse_warnings;
          continue;
        }
        if (!r["gap_id"].is_string() || !r["action"].is_string()) {
          ++report.judge_parse_warnings;
          continue;
        }
        const std::string gap_id = r["gap_id"].get<std::string>();
        const std::string action = r["action"].get<std::string>();
        for (auto& g : gaps) {
          if (g.id == gap_id && !g.deterministic && action == "DISMISS") {
            g.resolved = true;
          }
        }
      }
    }
    if (reply.contains("new_gaps") && reply["new_gaps"].is_array()) {
      int counter = 0;
      auto extra = detail_monitor::parse_gap_entries(
          reply["new_gaps"], profile, "f", &counter,
          &report.judge_parse_warnings);
      for (auto& g : extra) gaps.push_back(std::move(g));
      detail_monitor::dedup_gaps(gaps);
    }
  }

  // Exhaustive re-check of abandoned-path verdicts.
  if (profile == Profile::Countdown && problem != nullptr) {
    for (auto& g : gaps) {
      if (g.resolved || g.category != GapCategory::AbandonedCorrectPath ||
          g.statement_ids.empty()) {
        continue;
      }
      auto state = detail_monitor::replay_state(*problem, all_statements,
                                                g.statement_ids.front());
      if (!state || state->size() > 5 || state->empty()) continue;
      auto found = countdown::solve_values(
          std::move(*state), countdown::Rational(problem->target));
      if (!found) {
        g.resolved = true;  // the abandoned state could not reach the target
      }
    }
  }

  report.gaps = std::move(gaps);
  return report;
}

// ---------------------------------------------------------------------------
// Whole-trace audit

struct MonitorOptions {
  Profile profile = Profile::Countdown;
  PromptSet prompts;  // empty members fall back to defaults
  int sentence_budget = 12;

  PromptSet effective_prompts() const {
    PromptSet defaults = default_prompts(profile);
    PromptSet out = prompts;
    if (out.extraction.empty()) out.extraction = defaults.extraction;
    if (out.verification.empty()) out.verification = defaults.verification;
    if (out.finalization.empty()) out.finalization = defaults.finalization;
    return out;
  }
};

// Runs the full audit for one trace: deterministic phase 0 (Countdown with a
// problem), then per-chunk extraction and verification with the accumulating
// ledger, then finalization. judge may be null, which limits the audit to
// the deterministic checks.
inline GapReport audit_trace(model::ModelClient* judge,
                             const MonitorOptions& options,
                             std::string_view sample_id,
                             std::string_view question, std::string_view cot,
                             const countdown::CountdownProblem* problem) {
  PromptSet prompts = options.effective_prompts();
  std::vector<Gap> gaps;
  if (options.profile == Profile::Countdown && problem != nullptr) {
    gaps = phase0_check(*problem, cot);
  }

  std::vector<Statement> ledger;
  int gap_counter = 0;
  int warnings = 0;
  if (judge != nullptr) {
    auto chunks = split_chunks(cot, options.sentence_budget);
    // Verification is sequential in chunk order: the ledger accumulates.
    for (const auto& chunk : chunks) {
      auto extraction =
          extract_statements(*judge, question, chunk, options.profile, prompts);
      warnings += extraction.dropped;
      auto chunk_gaps = verify_statements(
          *judge, question, extraction.statements, ledger, options.profile,
          prompts, &gap_counter, &warnings);
      for (auto& g : chunk_gaps) gaps.push_back(std::move(g));
      for (auto& s : extraction.statements) ledger.push_back(std::move(s));
    }
  }

  return finalize(options.profile == Profile::Countdown ? judge : nullptr,
                  question, ledger, std::move(gaps), options.profile, prompts,
                  problem, sample_id, warnings);
}

// ---------------------------------------------------------------------------
// Statistics

struct GapStats {
  std::size_t n = 0;
  double gap_proportion = 0.0;   // fraction of samples with >= 1 unresolved gap
  double mean_gap_count = 0.0;   // unresolved gaps per sample
  std::map<GapCategory, double> per_category_mean;
  std::map<Severity, double> per_severity_mean;
};

inline GapStats gap_stats_over(std::span<const GapReport> reports) {
  if (reports.empty()) throw std::invalid_argument("gap_stats: empty input");
  GapStats out;
  out.n = reports.size();
  std::size_t with_gap = 0, total = 0;
  std::map<GapCategory, std::size_t> cat;
  std::map<Severity, std::size_t> sev;
  for (const auto& r : reports) {
    const std::size_t k = r.unresolved_count();
    with_gap += k > 0 ? 1 : 0;
    total += k;
    for (const auto& [c, n] : r.category_counts()) cat[c] += n;
    for (const auto& [s, n] : r.severity_counts()) sev[s] += n;
  }
  const double denom = static_cast<double>(out.n);
  out.gap_proportion = static_cast<double>(with_gap) / denom;
  out.mean_gap_count = static_cast<double>(total) / denom;
  for (const auto& [c, n] : cat) {
    out.per_category_mean[c] = static_cast<double>(n) / denom;
  }
  for (const auto& [s, n] : sev) {
    out.per_severity_mean[s] = static_cast<double>(n) / denom;
  }
  return out;
}

struct GapStatsSummary {
  GapStats all;
  std::optional<GapStats> correct_only;  // present when a mask was provided
};

// Aggregates gap statistics over reports; reordering the input does not
// change any field. correct_ids, when given, adds the correct-only variant.
inline GapStatsSummary gap_stats(
    std::span<const GapReport> reports,
    const std::unordered_set<std::string>* correct_ids = nullptr) {
  GapStatsSummary out;
  out.all = gap_stats_over(reports);
  if (correct_ids != nullptr) {
    std::vector<GapReport> correct;
    for (const auto& r : reports) {
      if (correct_ids->count(r.sample_id)) correct.push_back(r);
    }
    if (!correct.empty()) {
      out.correct_only = gap_stats_over(correct);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const Gap& g) {
  return nlohmann::json{{"id", g.id},
                        {"category", std::string(to_string(g.category))},
                        {"severity", std::string(to_string(g.severity))},
                        {"statement_ids", g.statement_ids},
                        {"evidence", g.evidence},
                        {"resolved", g.resolved},
                        {"deterministic", g.deterministic}};
}

inline Gap gap_from_json(const nlohmann::json& j) {
  Gap g;
  g.id = j.at("id").get<std::string>();
  auto cat = category_from_string(j.at("category").get<std::string>());
  if (!cat) throw std::invalid_argument("gap_from_json: bad category");
  g.category = *cat;
  auto sev = severity_from_string(j.at("severity").get<std::string>());
  if (!sev) throw std::invalid_argument("gap_from_json: bad severity");
  g.severity = *sev;
  g.statement_ids = j.at("statement_ids").get<std::vector<std::string>>();
  g.evidence = j.at("evidence").get<std::vector<std::string>>();
  g.resolved = j.at("resolved").get<bool>();
  g.deterministic = j.value("deterministic", false);
  return g;
}

inline nlohmann::json to_json(const GapReport& r) {
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : r.gaps) gaps.push_back(to_json(g));
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [c, n] : r.category_counts()) {
    cats[std::string(to_string(c))] = n;
  }
  nlohmann::json sevs = nlohmann::json::object();
  for (const auto& [s, n] : r.severity_counts()) {
    sevs[std::string(to_string(s))] = n;
  }
  return nlohmann::json{{"sample_id", r.sample_id},
                        {"gaps", std::move(gaps)},
                        {"has_gap", r.has_gap()},
                        {"category_counts", std::move(cats)},
                        {"severity_counts", std::move(sevs)},
                        {"judge_parse_warnings", r.judge_parse_warnings}};
}

inline GapReport gap_report_from_json(const nlohmann::json& j) {
  GapReport r;
  r.sample_id = j.at("sample_id").get<std::string>();
  for (const auto& g : j.at("gaps")) r.gaps.push_back(gap_from_json(g));
  r.judge_parse_warnings = j.value("judge_parse_warnings", 0);
  return r;
}

}  // namespace confshape::monitor
