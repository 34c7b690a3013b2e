#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "confshape/answer_extract.hpp"
#include "confshape/countdown.hpp"
#include "confshape/hint_detect.hpp"
#include "confshape/jsonl.hpp"
#include "confshape/model_client.hpp"
#include "confshape/monitor.hpp"
#include "confshape/shaping.hpp"
#include "confshape/trajectory.hpp"

namespace confshape::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class JoinError : public std::runtime_error {
 public:
  JoinError(const std::string& what, std::vector<std::string> missing)
      : std::runtime_error(what), missing_ids(std::move(missing)) {}
  std::vector<std::string> missing_ids;
};

// Exit codes shared by the CLI and the pipeline.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitTransport = 2;
inline constexpr int kExitPartial = 3;

// ---------------------------------------------------------------------------
// Run configuration

enum class Task { Countdown, Mcq, Math };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::Countdown: return "countdown";
    case Task::Mcq: return "mcq";
    case Task::Math: return "math";
  }
  return "?";
}

inline Task task_from_string(std::string_view s) {
  if (s == "countdown") return Task::Countdown;
  if (s == "mcq" || s == "sciqa") return Task::Mcq;
  if (s == "math") return Task::Math;
  throw ConfigError("unknown task: " + std::string(s));
}

inline std::string default_probe_suffix(Task t) {
  switch (t) {
    case Task::Countdown: return "</think>\n<answer>";
    case Task::Math: return "... the final answer is: \\boxed{";
    case Task::Mcq: return "The answer is (";
  }
  return "";
}

struct ProblemParams {
  int count = 50;
  int operands = 4;
  long long max_number = 10;
  long long max_target = 50;
};

struct MockParams {
  double premature_level = 0.9;
  double progressive_lo = 0.05;
  double progressive_hi = 0.95;
  double premature_wrong_rate = 0.3;  // planted incorrect answers, premature cohort
  int cot_tokens = 48;
};

struct MonitorParams {
  bool judge = false;               // offline runs use the deterministic path
  std::string prompts_dir;
  int sentence_budget = 12;
};

struct RunConfig {
  Task task = Task::Countdown;
  std::vector<double> grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int mc_samples = 10;
  trajectory::TrajectoryMode mode = trajectory::TrajectoryMode::GoldAgreement;
  double spearman_threshold = 0.4;
  std::vector<double> scoring_weights = {0.5, 0.3, 0.1, -0.1, -0.3, -0.5};
  double eta = 0.0;
  bool correct_only = false;
  std::uint64_t seed = 0;
  std::string out_dir = "run";
  std::string probe_suffix;  // empty selects the task default
  std::vector<double> sweep_thresholds = {0.40, 0.45, 0.50, 0.55, 0.60,
                                          0.65, 0.70, 0.75, 0.80};
  bool emit_probe_records = false;

  std::string client_kind = "mock";  // "mock" or "http"
  model::HttpClientConfig http;
  MockParams mock;
  ProblemParams problems;
  MonitorParams monitor_params;

  std::string effective_probe_suffix() const {
    return probe_suffix.empty() ? default_probe_suffix(task) : probe_suffix;
  }

  void validate() const {
    if (spearman_threshold < -1.0 || spearman_threshold > 1.0) {
      throw ConfigError("spearman_threshold outside [-1, 1]");
    }
    if (eta < 0.0) throw ConfigError("eta must be >= 0");
    if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
    try {
      trajectory::CheckpointGrid g{grid};
      trajectory::ScoringVector w{scoring_weights};
      if (w.size() != g.size() && !(g.size() == 11 && w.size() == 6)) {
        throw ConfigError(
            "scoring_weights length must match the grid (or grid=11, w=6)");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    for (double t : sweep_thresholds) {
      if (t < -1.0 || t > 1.0) throw ConfigError("sweep threshold outside [-1, 1]");
    }
    if (sweep_thresholds.empty()) throw ConfigError("sweep_thresholds empty");
    if (client_kind != "mock" && client_kind != "http") {
      throw ConfigError("client kind must be mock or http");
    }
    if (client_kind == "http") {
      try {
        http.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (problems.count < 0) throw ConfigError("problem count must be >= 0");
    if (monitor_params.sentence_budget < 1) {
      throw ConfigError("sentence_budget must be >= 1");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["task"] = std::string(to_string(task));
    j["grid"] = grid;
    j["mc_samples"] = mc_samples;
    j["mode"] = std::string(trajectory::to_string(mode));
    j["spearman_threshold"] = spearman_threshold;
    j["scoring_weights"] = scoring_weights;
    j["eta"] = eta;
    j["correct_only"] = correct_only;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["probe_suffix"] = probe_suffix;
    j["sweep_thresholds"] = sweep_thresholds;
    j["emit_probe_records"] = emit_probe_records;
    j["client"] = {{"kind", client_kind},
                   {"base_url", http.base_url},
                   {"chat_path", http.chat_path},
                   {"model_name", http.model_name},
                   {"api_key_env", http.api_key_env},
                   {"timeout_ms", http.timeout_ms},
                   {"max_in_flight", http.max_in_flight},
                   {"max_attempts", http.max_attempts},
                   {"backoff_initial_ms", http.backoff_initial_ms},
                   {"forward_probe", http.forward_probe_enabled}};
    j["mock"] = {{"premature_level", mock.premature_level},
                 {"progressive_lo", mock.progressive_lo},
                 {"progressive_hi", mock.progressive_hi},
                 {"premature_wrong_rate", mock.premature_wrong_rate},
                 {"cot_tokens", mock.cot_tokens}};
    j["problems"] = {{"count", problems.count},
                     {"operands", problems.operands},
                     {"max_number", problems.max_number},
                     {"max_target", problems.max_target}};
    j["monitor"] = {{"judge", monitor_params.judge},
                    {"prompts_dir", monitor_params.prompts_dir},
                    {"sentence_budget", monitor_params.sentence_budget}};
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("task")) c.task = task_from_string(j["task"].get<std::string>());
    if (j.contains("grid")) {
      c.grid = j["grid"].get<std::vector<double>>();
    } else if (j.contains("checkpoints")) {
      int k = j["checkpoints"].get<int>();
      if (k < 2) throw ConfigError("checkpoints must be >= 2");
      c.grid = trajectory::CheckpointGrid::evenly_spaced(k).fractions();
    }
    if (j.contains("mc_samples")) c.mc_samples = j["mc_samples"].get<int>();
    if (j.contains("mode")) {
      c.mode = trajectory::mode_from_string(j["mode"].get<std::string>());
    }
    if (j.contains("spearman_threshold")) {
      c.spearman_threshold = j["spearman_threshold"].get<double>();
    }
    if (j.contains("scoring_weights")) {
      c.scoring_weights = j["scoring_weights"].get<std::vector<double>>();
    }
    if (j.contains("eta")) c.eta = j["eta"].get<double>();
    if (j.contains("correct_only")) c.correct_only = j["correct_only"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("probe_suffix")) c.probe_suffix = j["probe_suffix"].get<std::string>();
    if (j.contains("sweep_thresholds")) {
      c.sweep_thresholds = j["sweep_thresholds"].get<std::vector<double>>();
    }
    if (j.contains("emit_probe_records")) {
      c.emit_probe_records = j["emit_probe_records"].get<bool>();
    }
    if (j.contains("client")) {
      const auto& cl = j["client"];
      if (cl.contains("kind")) c.client_kind = cl["kind"].get<std::string>();
      if (cl.contains("base_url")) c.http.base_url = cl["base_url"].get<std::string>();
      if (cl.contains("chat_path")) c.http.chat_path = cl["chat_path"].get<std::string>();
      if (cl.contains("model_name")) c.http.model_name = cl["model_name"].get<std::string>();
      if (cl.contains("api_key_env")) c.http.api_key_env = cl["api_key_env"].get<std::string>();
      if (cl.contains("timeout_ms")) c.http.timeout_ms = cl["timeout_ms"].get<int>();
      if (cl.contains("max_in_flight")) c.http.max_in_flight = cl["max_in_flight"].get<int>();
      if (cl.contains("max_attempts")) c.http.max_attempts = cl["max_attempts"].get<int>();
      if (cl.contains("backoff_initial_ms")) {
        c.http.backoff_initial_ms = cl["backoff_initial_ms"].get<int>();
      }
      if (cl.contains("forward_probe")) {
        c.http.forward_probe_enabled = cl["forward_probe"].get<bool>();
      }
    }
    if (j.contains("mock")) {
      const auto& m = j["mock"];
      if (m.contains("premature_level")) c.mock.premature_level = m["premature_level"].get<double>();
      if (m.contains("progressive_lo")) c.mock.progressive_lo = m["progressive_lo"].get<double>();
      if (m.contains("progressive_hi")) c.mock.progressive_hi = m["progressive_hi"].get<double>();
      if (m.contains("premature_wrong_rate")) {
        c.mock.premature_wrong_rate = m["premature_wrong_rate"].get<double>();
      }
      if (m.contains("cot_tokens")) c.mock.cot_tokens = m["cot_tokens"].get<int>();
    }
    if (j.contains("problems")) {
      const auto& p = j["problems"];
      if (p.contains("count")) c.problems.count = p["count"].get<int>();
      if (p.contains("operands")) c.problems.operands = p["operands"].get<int>();
      if (p.contains("max_number")) c.problems.max_number = p["max_number"].get<long long>();
      if (p.contains("max_target")) c.problems.max_target = p["max_target"].get<long long>();
    }
    if (j.contains("monitor")) {
      const auto& m = j["monitor"];
      if (m.contains("judge")) c.monitor_params.judge = m["judge"].get<bool>();
      if (m.contains("prompts_dir")) {
        c.monitor_params.prompts_dir = m["prompts_dir"].get<std::string>();
      }
      if (m.contains("sentence_budget")) {
        c.monitor_params.sentence_budget = m["sentence_budget"].get<int>();
      }
    }
    return c;
  }

  static RunConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return from_json(j);
  }
};

// ---------------------------------------------------------------------------
// Records

struct CompletionRecord {
  std::string sample_id;
  std::string query_id;   // groups G completions for shaping
  std::string cohort;     // "premature" / "progressive" for planted mocks
  std::string question;
  std::string completion;
  double reward = 0.0;
  bool correct = false;
  std::string gold_answer;
};

inline nlohmann::json to_json(const CompletionRecord& r) {
  return nlohmann::json{{"sample_id", r.sample_id}, {"query_id", r.query_id},
                        {"cohort", r.cohort},       {"question", r.question},
                        {"completion", r.completion}, {"reward", r.reward},
                        {"correct", r.correct},     {"gold_answer", r.gold_answer}};
}

inline CompletionRecord completion_record_from_json(const nlohmann::json& j) {
  CompletionRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.query_id = j.at("query_id").get<std::string>();
  r.cohort = j.value("cohort", "");
  r.question = j.at("question").get<std::string>();
  r.completion = j.at("completion").get<std::string>();
  r.reward = j.at("reward").get<double>();
  r.correct = j.at("correct").get<bool>();
  r.gold_answer = j.value("gold_answer", "");
  return r;
}

// One row of the analysis join: classification summary per sample.
struct SampleRecord {
  std::string sample_id;
  bool correct = false;
  double rho = 0.0;
  bool degenerate = false;
  double inner_score = 0.0;
};

// ---------------------------------------------------------------------------
// Group comparison

struct GroupComparison {
  double threshold = 0.4;
  std::size_t n_total = 0;
  std::size_t n_excluded_degenerate = 0;
  std::size_t n_premature = 0;
  std::size_t n_progressive = 0;
  std::optional<monitor::GapStats> premature;
  std::optional<monitor::GapStats> progressive;
  std::optional<monitor::GapStats> premature_correct;
  std::optional<monitor::GapStats> progressive_correct;
};

// Partitions samples at the threshold (premature iff rho < tau) and runs the
// gap statistics per group. Degenerate trajectories are excluded, with the
// count surfaced. correct_only restricts the whole universe to correct
// samples; otherwise correct-only variants are reported alongside.
inline GroupComparison compare_groups(std::span<const SampleRecord> records,
                                      std::span<const monitor::GapReport> reports,
                                      double tau, bool correct_only = false) {
  std::unordered_map<std::string, const monitor::GapReport*> by_id;
  for (const auto& r : reports) by_id[r.sample_id] = &r;

  std::vector<std::string> missing;
  for (const auto& rec : records) {
    if (!by_id.count(rec.sample_id)) missing.push_back(rec.sample_id);
  }
  if (!missing.empty()) {
    std::string msg = "compare_groups: no gap report for " +
                      std::to_string(missing.size()) + " sample(s):";
    for (std::size_t i = 0; i < missing.size() && i < 8; ++i) {
      msg += ' ' + missing[i];
    }
    throw JoinError(msg, std::move(missing));
  }

  GroupComparison out;
  out.threshold = tau;
  std::vector<monitor::GapReport> prem, prog, prem_c, prog_c;
  for (const auto& rec : records) {
    ++out.n_total;
    if (correct_only && !rec.correct) continue;
    if (rec.degenerate) {
      ++out.n_excluded_degenerate;
      continue;
    }
    const auto& report = *by_id[rec.sample_id];
    const bool premature =
        trajectory::label_for_rho(rec.rho, tau) == trajectory::TrajectoryLabel::Premature;
    if (premature) {
      prem.push_back(report);
      if (rec.correct) prem_c.push_back(report);
    } else {
      prog.push_back(report);
      if (rec.correct) prog_c.push_back(report);
    }
  }
  out.n_premature = prem.size();
  out.n_progressive = prog.size();
  if (!prem.empty()) out.premature = monitor::gap_stats_over(prem);
  if (!prog.empty()) out.progressive = monitor::gap_stats_over(prog);
  if (!prem_c.empty()) out.premature_correct = monitor::gap_stats_over(prem_c);
  if (!prog_c.empty()) out.progressive_correct = monitor::gap_stats_over(prog_c);
  return out;
}

inline std::vector<GroupComparison> threshold_sweep(
    std::span<const SampleRecord> records,
    std::span<const monitor::GapReport> reports,
    std::span<const double> tau_values, bool correct_only = false) {
  if (tau_values.empty()) {
    throw std::invalid_argument("threshold_sweep: no thresholds");
  }
  std::vector<GroupComparison> out;
  out.reserve(tau_values.size());
  for (double tau : tau_values) {
    out.push_back(compare_groups(records, reports, tau, correct_only));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner-product threshold calibration

struct CalibrationResult {
  double threshold = 0.0;
  double agreement = 0.0;
  bool single_class = false;  // sentinel threshold, flagged
  std::size_t n_used = 0;
  std::size_t n_excluded_degenerate = 0;
};

// Finds the inner-score threshold whose induced labeling (inner > threshold
// means premature) agrees most with the Spearman labeling at tau_spearman.
// Candidates are the midpoints between sorted distinct inner scores plus
// sentinels past both ends; ties break toward the smaller threshold.
inline CalibrationResult calibrate_inner_threshold(
    std::span<const SampleRecord> records, double tau_spearman) {
  std::vector<std::pair<double, bool>> pts;  // (inner, premature?)
  CalibrationResult out;
  for (const auto& r : records) {
    if (r.degenerate) {
      ++out.n_excluded_degenerate;
      continue;
    }
    pts.emplace_back(r.inner_score,
                     trajectory::label_for_rho(r.rho, tau_spearman) ==
                         trajectory::TrajectoryLabel::Premature);
  }
  if (pts.size() < 2) {
    throw std::invalid_argument("calibrate_inner_threshold: need >= 2 usable records");
  }
  out.n_used = pts.size();

  std::vector<double> distinct;
  distinct.reserve(pts.size());
  for (const auto& [v, _] : pts) distinct.push_back(v);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
  }
  candidates.push_back(distinct.back() + 1.0);

  double best_threshold = candidates.front();
  double best_agreement = -1.0;
  for (double cand : candidates) {
    std::size_t agree = 0;
    for (const auto& [inner, premature] : pts) {
      if ((inner > cand) == premature) ++agree;
    }
    const double frac = static_cast<double>(agree) / static_cast<double>(pts.size());
    if (frac > best_agreement) {
      best_agreement = frac;
      best_threshold = cand;
    }
  }
  out.threshold = best_threshold;
  out.agreement = best_agreement;
  bool any_prem = false, any_prog = false;
  for (const auto& [_, premature] : pts) {
    any_prem |= premature;
    any_prog |= !premature;
  }
  out.single_class = !(any_prem && any_prog);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison serialization

inline nlohmann::json to_json(const monitor::GapStats& s) {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [c, v] : s.per_category_mean) {
    cats[std::string(monitor::to_string(c))] = v;
  }
  nlohmann::json sevs = nlohmann::json::object();
  for (const auto& [k, v] : s.per_severity_mean) {
    sevs[std::string(monitor::to_string(k))] = v;
  }
  return nlohmann::json{{"n", s.n},
                        {"gap_proportion", s.gap_proportion},
                        {"mean_gap_count", s.mean_gap_count},
                        {"per_category_mean", std::move(cats)},
                        {"per_severity_mean", std::move(sevs)}};
}

inline nlohmann::json to_json(const GroupComparison& c) {
  nlohmann::json j;
  j["threshold"] = c.threshold;
  j["n_total"] = c.n_total;
  j["n_excluded_degenerate"] = c.n_excluded_degenerate;
  j["n_premature"] = c.n_premature;
  j["n_progressive"] = c.n_progressive;
  j["premature"] = c.premature ? to_json(*c.premature) : nlohmann::json(nullptr);
  j["progressive"] = c.progressive ? to_json(*c.progressive) : nlohmann::json(nullptr);
  j["premature_correct"] =
      c.premature_correct ? to_json(*c.premature_correct) : nlohmann::json(nullptr);
  j["progressive_correct"] =
      c.progressive_correct ? to_json(*c.progressive_correct) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const CalibrationResult& c) {
  return nlohmann::json{{"threshold", c.threshold},
                        {"agreement", c.agreement},
                        {"single_class", c.single_class},
                        {"n_used", c.n_used},
                        {"n_excluded_degenerate", c.n_excluded_degenerate}};
}

inline void write_comparison_csv(std::ostream& os,
                                 std::span<const GroupComparison> sweep) {
  os << "threshold,n_premature,premature_gap_proportion,premature_mean_gaps,"
        "n_progressive,progressive_gap_proportion,progressive_mean_gaps,"
        "n_excluded_degenerate\n";
  for (const auto& c : sweep) {
    os << c.threshold << ',' << c.n_premature << ','
       << (c.premature ? c.premature->gap_proportion : 0.0) << ','
       << (c.premature ? c.premature->mean_gap_count : 0.0) << ','
       << c.n_progressive << ','
       << (c.progressive ? c.progressive->gap_proportion : 0.0) << ','
       << (c.progressive ? c.progressive->mean_gap_count : 0.0) << ','
       << c.n_excluded_degenerate << '\n';
  }
}

}  // namespace confshape::harness
