#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "confshape/detail/rng.hpp"
#include "confshape/harness.hpp"

namespace confshape::harness {

// Fixed run-directory layout; downstream tooling is path-stable.
inline constexpr const char* kProblemsFile = "problems.jsonl";
inline constexpr const char* kCompletionsFile = "completions.jsonl";
inline constexpr const char* kTrajectoriesFile = "trajectories.jsonl";
inline constexpr const char* kShapedFile = "shaped.jsonl";
inline constexpr const char* kGapsFile = "gaps.jsonl";
inline constexpr const char* kComparisonsFile = "comparisons.json";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kComparisonsCsvFile = "comparisons.csv";
inline constexpr const char* kProbesFile = "probes.jsonl";

struct StageOutcome {
  std::string status;  // complete | failed | skipped
  std::string error;
  std::size_t count = 0;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path dir;
  nlohmann::json manifest;
};

namespace detail_pipeline {

inline std::uint64_t sample_seed(const RunConfig& cfg, std::string_view sample_id) {
  return detail::mix2(cfg.seed, detail::fnv1a(sample_id));
}

// A same-numbers expression that misses the target, used to plant incorrect
// completions: the sum of all operands, falling back to their product.
inline std::optional<std::string> wrong_expression(
    const countdown::CountdownProblem& p) {
  using countdown::BinOp;
  using countdown::Expr;
  auto chain = [&](BinOp op) {
    Expr e = Expr::literal(p.numbers[0]);
    for (std::size_t i = 1; i < p.numbers.size(); ++i) {
      e = Expr::binary(op, std::move(e), Expr::literal(p.numbers[i]));
    }
    return e;
  };
  for (BinOp op : {BinOp::Add, BinOp::Mul}) {
    Expr e = chain(op);
    auto value = countdown::evaluate(e);
    if (value && *value != countdown::Rational(p.target)) {
      return countdown::render(e);
    }
  }
  return std::nullopt;
}

// Deterministic filler reasoning so checkpoint truncation has material to cut.
inline std::string filler_cot(const countdown::CountdownProblem& p,
                              std::uint64_t seed, int approx_tokens) {
  detail::Rng rng(seed);
  std::ostringstream os;
  int tokens = approx_tokens + static_cast<int>(rng.below(17));
  int emitted = 0;
  while (emitted < tokens) {
    const long long a = p.numbers[rng.below(p.numbers.size())];
    const long long b = p.numbers[rng.below(p.numbers.size())];
    os << "Trying " << a << " and " << b << " gives " << a + b
       << ", compare with " << p.target << ". ";
    emitted += 9;
  }
  return os.str();
}

}  // namespace detail_pipeline

// ---------------------------------------------------------------------------
// Stages. Each stage reads its inputs from the run directory and writes one
// output file; run_pipeline sequences them and records a manifest, so an
// interrupted run resumes from the first missing output.

inline std::size_t stage_gen(const RunConfig& cfg,
                             const std::filesystem::path& dir) {
  countdown::GenerateParams params;
  params.operand_count = cfg.problems.operands;
  params.max_number = cfg.problems.max_number;
  params.max_target = cfg.problems.max_target;
  params.seed = cfg.seed;
  auto problems = countdown::generate(cfg.problems.count, params);
  jsonl::Writer w(dir / kProblemsFile);
  for (const auto& p : problems) w.write(countdown::to_json(p));
  return problems.size();
}

namespace detail_pipeline {

inline std::vector<countdown::CountdownProblem> load_problems(
    const std::filesystem::path& dir) {
  std::vector<countdown::CountdownProblem> out;
  for (const auto& j : jsonl::read_file(dir / kProblemsFile)) {
    out.push_back(countdown::problem_from_json(j));
  }
  return out;
}

inline std::vector<CompletionRecord> load_completions(
    const std::filesystem::path& dir) {
  std::vector<CompletionRecord> out;
  for (const auto& j : jsonl::read_file(dir / kCompletionsFile)) {
    out.push_back(completion_record_from_json(j));
  }
  return out;
}

inline model::MockModelScript mock_script_for(const RunConfig& cfg,
                                              std::string_view sample_id,
                                              std::string_view cohort,
                                              std::string gold,
                                              std::string distractor) {
  model::MockModelScript script;
  script.num_checkpoints = static_cast<int>(cfg.grid.size());
  if (cohort == "premature") {
    script.shape = model::MockModelScript::Shape::Premature;
    script.p_hi = cfg.mock.premature_level;
  } else {
    script.shape = model::MockModelScript::Shape::Progressive;
    script.p_lo = cfg.mock.progressive_lo;
    script.p_hi = cfg.mock.progressive_hi;
  }
  script.gold_answer = std::move(gold);
  script.distractors = {std::move(distractor)};
  script.seed = sample_seed(cfg, sample_id);
  return script;
}

}  // namespace detail_pipeline

// Mock rollout plants one prematurely and one progressively confident
// completion per problem (a G=2 group per query); HTTP rollout asks the
// endpoint for each completion. Rewards come from the task verifier either
// way.
inline std::size_t stage_rollout(const RunConfig& cfg,
                                 const std::filesystem::path& dir) {
  if (cfg.task != Task::Countdown) {
    throw ConfigError("rollout: only the countdown task is generated locally");
  }
  auto problems = detail_pipeline::load_problems(dir);
  jsonl::Writer w(dir / kCompletionsFile);
  std::size_t count = 0;

  std::unique_ptr<model::HttpModelClient> http;
  if (cfg.client_kind == "http") {
    http = std::make_unique<model::HttpModelClient>(cfg.http);
  }

  for (const auto& p : problems) {
    const std::string question = countdown::task_prompt(p);
    if (http) {
      for (int g = 0; g < 2; ++g) {
        CompletionRecord rec;
        rec.sample_id = p.id + "#g" + std::to_string(g);
        rec.query_id = p.id;
        rec.question = question;
        model::GenRequest req;
        req.prompt = question;
        req.max_tokens = 1024;
        req.temperature = 1.0;
        req.sample_key = model::SampleKey{rec.sample_id, 0, 0};
        rec.completion = http->generate(req).text;
        rec.reward = countdown::reward(p, rec.completion);
        rec.correct = rec.reward == 1.0;
        w.write(to_json(rec));
        ++count;
      }
      continue;
    }

    auto solution = countdown::solve_brute(p);
    if (!solution) continue;  // generator guarantees solvability
    const std::string gold = countdown::render(*solution);
    auto wrong = detail_pipeline::wrong_expression(p);

    for (std::string_view cohort : {"premature", "progressive"}) {
      CompletionRecord rec;
      rec.sample_id = p.id + (cohort == "premature" ? "#prem" : "#prog");
      rec.query_id = p.id;
      rec.cohort = std::string(cohort);
      rec.question = question;
      rec.gold_answer = gold;

      bool plant_wrong = false;
      if (cohort == "premature" && wrong) {
        const double u = detail::unit_from(
            detail::mix2(detail_pipeline::sample_seed(cfg, rec.sample_id), 0x57));
        plant_wrong = u < cfg.mock.premature_wrong_rate;
      }
      const std::string answer = plant_wrong ? *wrong : gold;
      rec.completion =
          detail_pipeline::filler_cot(
              p, detail_pipeline::sample_seed(cfg, rec.sample_id),
              cfg.mock.cot_tokens) +
          "</think>\n<answer>" + answer + "</answer>";
      rec.reward = countdown::reward(p, rec.completion);
      rec.correct = rec.reward == 1.0;
      w.write(to_json(rec));
      ++count;
    }
  }
  return count;
}

// Builds one confidence trajectory per completion by checkpoint truncation
// probing. Samples whose probes failed (transport errors) are dropped from
// the output and reported; the stage is partial in that case.
inline std::size_t stage_probe(const RunConfig& cfg,
                               const std::filesystem::path& dir,
                               std::size_t* failed_samples = nullptr) {
  auto problems = detail_pipeline::load_problems(dir);
  auto completions = detail_pipeline::load_completions(dir);
  std::unordered_map<std::string, const countdown::CountdownProblem*> by_id;
  for (const auto& p : problems) by_id[p.id] = &p;

  trajectory::CheckpointGrid grid{cfg.grid};
  trajectory::ScoringVector weights{cfg.scoring_weights};

  std::unique_ptr<model::HttpModelClient> http;
  if (cfg.client_kind == "http") {
    http = std::make_unique<model::HttpModelClient>(cfg.http);
  }

  jsonl::Writer w(dir / kTrajectoriesFile);
  std::unique_ptr<jsonl::Writer> probes;
  if (cfg.emit_probe_records) {
    probes = std::make_unique<jsonl::Writer>(dir / kProbesFile);
  }

  std::size_t written = 0, failed = 0;
  for (const auto& rec : completions) {
    auto it = by_id.find(rec.query_id);
    if (it == by_id.end()) continue;
    const countdown::CountdownProblem& problem = *it->second;

    trajectory::BuildSpec spec;
    spec.sample_id = rec.sample_id;
    spec.problem_context = rec.question + "\n";
    spec.cot = rec.completion;
    spec.grid = grid;
    spec.mode = cfg.mode;
    spec.mc_samples = cfg.mc_samples;
    spec.probe_suffix = cfg.effective_probe_suffix();
    spec.max_in_flight = cfg.http.max_in_flight;
    spec.gold_answer = rec.gold_answer;
    spec.gold_matcher = [&problem](std::string_view answer) {
      return countdown::verify(problem, answer).valid();
    };
    spec.answer_extractor = [](std::string_view text) {
      return extract_answer(text, AnswerFormat::AnswerTag);
    };

    trajectory::BuildOutcome outcome;
    if (http) {
      outcome = trajectory::build_trajectory(*http, spec);
    } else {
      model::MockModel mock(detail_pipeline::mock_script_for(
          cfg, rec.sample_id, rec.cohort, rec.gold_answer,
          /*distractor=*/"1 + 1"));
      outcome = trajectory::build_trajectory(mock, spec);
    }
    if (probes) {
      for (const auto& pr : outcome.records) probes->write(trajectory::to_json(pr));
    }
    if (!outcome.complete()) {
      ++failed;
      continue;
    }
    auto record = trajectory::make_record(rec.sample_id, *outcome.trajectory,
                                          weights, cfg.spearman_threshold);
    w.write(trajectory::to_json(record));
    ++written;
  }
  if (failed_samples) *failed_samples = failed;
  return written;
}

inline std::size_t stage_shape(const RunConfig& cfg,
                               const std::filesystem::path& dir) {
  auto completions = detail_pipeline::load_completions(dir);
  std::unordered_map<std::string, trajectory::TrajectoryRecord> trajectories;
  for (const auto& j : jsonl::read_file(dir / kTrajectoriesFile)) {
    auto rec = trajectory::trajectory_record_from_json(j);
    trajectories.emplace(rec.sample_id, std::move(rec));
  }

  // Group completions by query in file order.
  std::vector<std::string> order;
  std::map<std::string, shaping::RolloutGroup> groups;
  for (const auto& rec : completions) {
    auto t = trajectories.find(rec.sample_id);
    if (t == trajectories.end()) continue;
    auto [it, fresh] = groups.try_emplace(rec.query_id);
    if (fresh) {
      it->second.query_id = rec.query_id;
      order.push_back(rec.query_id);
    }
    shaping::CompletionRollout roll;
    roll.completion_id = rec.sample_id;
    roll.text = rec.completion;
    roll.token_count =
        static_cast<int>(detail::ws_tokens(rec.completion).size());
    roll.reward = rec.reward;
    roll.trajectory = t->second.trajectory;
    it->second.completions.push_back(std::move(roll));
  }

  trajectory::ScoringVector weights{cfg.scoring_weights};
  shaping::ShapeOptions opts;
  opts.eta = cfg.eta;
  opts.correct_only = cfg.correct_only;

  std::vector<shaping::ShapedAdvantages> shaped;
  for (const auto& qid : order) {
    auto& group = groups[qid];
    if (group.completions.size() < 2) continue;  // nothing to normalize against
    // The scoring grid is the weight length; subsample 11-point trajectories.
    for (auto& c : group.completions) {
      if (c.trajectory.values.size() == 11 && weights.size() == 6) {
        c.trajectory = trajectory::subsample_to_six(c.trajectory);
      }
    }
    shaped.push_back(shaping::shape(group, weights, opts));
  }

  std::ofstream os(dir / kShapedFile, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write shaped.jsonl");
  shaping::write_shaped_jsonl(os, shaped, weights, cfg.eta);
  return shaped.size();
}

inline std::size_t stage_monitor(const RunConfig& cfg,
                                 const std::filesystem::path& dir) {
  auto problems = detail_pipeline::load_problems(dir);
  auto completions = detail_pipeline::load_completions(dir);
  std::unordered_map<std::string, const countdown::CountdownProblem*> by_id;
  for (const auto& p : problems) by_id[p.id] = &p;

  monitor::MonitorOptions options;
  options.profile = cfg.task == Task::Countdown ? monitor::Profile::Countdown
                                                : monitor::Profile::Mcq;
  options.sentence_budget = cfg.monitor_params.sentence_budget;
  if (!cfg.monitor_params.prompts_dir.empty()) {
    options.prompts =
        monitor::load_prompts(options.profile, cfg.monitor_params.prompts_dir);
  }

  // The judge rides the configured HTTP endpoint; without one the audit is
  // deterministic-only (phase 0 plus exact arithmetic).
  std::unique_ptr<model::HttpModelClient> judge;
  if (cfg.monitor_params.judge && cfg.client_kind == "http") {
    judge = std::make_unique<model::HttpModelClient>(cfg.http);
  }

  jsonl::Writer w(dir / kGapsFile);
  std::size_t count = 0;
  for (const auto& rec : completions) {
    const countdown::CountdownProblem* problem = nullptr;
    if (auto it = by_id.find(rec.query_id); it != by_id.end()) {
      problem = it->second;
    }
    auto report = monitor::audit_trace(judge.get(), options, rec.sample_id,
                                       rec.question, rec.completion, problem);
    w.write(monitor::to_json(report));
    ++count;
  }
  return count;
}

inline std::size_t stage_compare(const RunConfig& cfg,
                                 const std::filesystem::path& dir) {
  auto completions = detail_pipeline::load_completions(dir);
  std::unordered_map<std::string, const CompletionRecord*> completion_by_id;
  for (const auto& c : completions) completion_by_id[c.sample_id] = &c;

  std::vector<trajectory::TrajectoryRecord> trecords;
  for (const auto& j : jsonl::read_file(dir / kTrajectoriesFile)) {
    trecords.push_back(trajectory::trajectory_record_from_json(j));
  }
  std::vector<monitor::GapReport> reports;
  for (const auto& j : jsonl::read_file(dir / kGapsFile)) {
    reports.push_back(monitor::gap_report_from_json(j));
  }

  std::vector<SampleRecord> samples;
  std::map<std::string, std::vector<double>> cohort_inner;
  std::vector<double> all_inner;
  for (const auto& t : trecords) {
    SampleRecord s;
    s.sample_id = t.sample_id;
    s.rho = t.rho;
    s.degenerate = t.degenerate;
    s.inner_score = t.inner;
    if (auto it = completion_by_id.find(t.sample_id);
        it != completion_by_id.end()) {
      s.correct = it->second->correct;
      if (!it->second->cohort.empty()) {
        cohort_inner[it->second->cohort].push_back(t.inner);
      }
    }
    all_inner.push_back(t.inner);
    samples.push_back(std::move(s));
  }

  // Reports for samples without trajectories are ignored; trajectories
  // without reports are a join failure inside compare_groups.
  std::vector<monitor::GapReport> joined;
  std::unordered_set<std::string> have;
  for (const auto& s : samples) have.insert(s.sample_id);
  for (const auto& r : reports) {
    if (have.count(r.sample_id)) joined.push_back(r);
  }

  nlohmann::json out;
  GroupComparison def = compare_groups(samples, joined, cfg.spearman_threshold,
                                       cfg.correct_only);
  auto sweep = threshold_sweep(samples, joined, cfg.sweep_thresholds,
                               cfg.correct_only);
  out["default"] = to_json(def);
  nlohmann::json sweep_json = nlohmann::json::array();
  for (const auto& c : sweep) sweep_json.push_back(to_json(c));
  out["sweep"] = std::move(sweep_json);
  out["calibration"] =
      samples.size() >= 2
          ? to_json(calibrate_inner_threshold(samples, cfg.spearman_threshold))
          : nlohmann::json(nullptr);

  nlohmann::json summary;
  summary["samples"] = samples.size();
  summary["premature_score_overall"] =
      all_inner.empty() ? 0.0 : detail::mean(all_inner);
  nlohmann::json cohorts = nlohmann::json::object();
  for (const auto& [name, inners] : cohort_inner) {
    cohorts[name] = {{"n", inners.size()},
                     {"premature_score", detail::mean(inners)}};
  }
  summary["cohorts"] = std::move(cohorts);
  summary["eta"] = cfg.eta;
  summary["w"] = cfg.scoring_weights;
  out["summary"] = std::move(summary);

  {
    std::ofstream os(dir / kComparisonsFile, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write comparisons.json");
    os << out.dump(2) << '\n';
  }
  {
    std::ofstream os(dir / kComparisonsCsvFile,
                     std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write comparisons.csv");
    write_comparison_csv(os, sweep);
  }
  return sweep.size();
}

// ---------------------------------------------------------------------------
// Orchestration

namespace detail_pipeline {

inline const std::vector<std::pair<std::string, std::vector<std::string>>>&
stage_table() {
  // stage name -> input files it needs
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      table = {
          {"gen", {}},
          {"rollout", {kProblemsFile}},
          {"probe", {kProblemsFile, kCompletionsFile}},
          {"shape", {kCompletionsFile, kTrajectoriesFile}},
          {"monitor", {kProblemsFile, kCompletionsFile}},
          {"compare", {kCompletionsFile, kTrajectoriesFile, kGapsFile}},
      };
  return table;
}

inline std::string stage_output(const std::string& stage) {
  if (stage == "gen") return kProblemsFile;
  if (stage == "rollout") return kCompletionsFile;
  if (stage == "probe") return kTrajectoriesFile;
  if (stage == "shape") return kShapedFile;
  if (stage == "monitor") return kGapsFile;
  return kComparisonsFile;
}

}  // namespace detail_pipeline

inline std::size_t run_stage(const std::string& stage, const RunConfig& cfg,
                             const std::filesystem::path& dir,
                             std::size_t* probe_failures = nullptr) {
  if (stage == "gen") return stage_gen(cfg, dir);
  if (stage == "rollout") return stage_rollout(cfg, dir);
  if (stage == "probe") return stage_probe(cfg, dir, probe_failures);
  if (stage == "shape") return stage_shape(cfg, dir);
  if (stage == "monitor") return stage_monitor(cfg, dir);
  if (stage == "compare") return stage_compare(cfg, dir);
  throw std::invalid_argument("unknown stage: " + stage);
}

// Runs every stage in order, writing the manifest after each one. A fresh
// run validates the config up front; a resumed run requires the identical
// config and skips stages whose outputs already exist.
inline RunResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  nlohmann::json manifest;
  const fs::path manifest_path = dir / kManifestFile;
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded()) manifest = nlohmann::json::object();
    if (manifest.contains("config") &&
        manifest["config"].dump() != cfg.to_json().dump()) {
      throw ConfigError(
          "run directory was created with a different config; use a fresh "
          "--out directory");
    }
  }
  manifest["config"] = cfg.to_json();
  if (!manifest.contains("stages")) manifest["stages"] = nlohmann::json::object();

  auto save_manifest = [&] {
    std::ofstream os(manifest_path, std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << '\n';
  };

  bool transport_failure = false;
  bool any_failure = false;
  for (const auto& [stage, inputs] : detail_pipeline::stage_table()) {
    auto& entry = manifest["stages"][stage];
    const fs::path output = dir / detail_pipeline::stage_output(stage);
    if (entry.is_object() && entry.value("status", "") == "complete" &&
        fs::exists(output)) {
      continue;  // resume: stage already done
    }
    bool inputs_ok = true;
    for (const auto& input : inputs) {
      if (!fs::exists(dir / input)) inputs_ok = false;
    }
    if (!inputs_ok) {
      entry = {{"status", "skipped"}, {"error", "missing input"}, {"count", 0}};
      any_failure = true;
      save_manifest();
      continue;
    }
    try {
      std::size_t probe_failures = 0;
      std::size_t count = run_stage(stage, cfg, dir, &probe_failures);
      entry = {{"status", "complete"}, {"error", ""}, {"count", count}};
      if (stage == "probe" && probe_failures > 0) {
        entry["status"] = "partial";
        entry["failed_samples"] = probe_failures;
        any_failure = true;
      }
    } catch (const model::TransportError& e) {
      entry = {{"status", "failed"}, {"error", e.what()}, {"count", 0}};
      transport_failure = true;
      any_failure = true;
    } catch (const std::exception& e) {
      entry = {{"status", "failed"}, {"error", e.what()}, {"count", 0}};
      any_failure = true;
    }
    save_manifest();
  }

  RunResult result;
  result.dir = dir;
  result.exit_code = transport_failure ? kExitTransport
                     : any_failure     ? kExitPartial
                                       : kExitOk;
  manifest["exit_code"] = result.exit_code;
  save_manifest();
  result.manifest = manifest;
  return result;
}

// Runs one stage by name against an existing run directory, keeping the
// manifest in step so piecemeal CLI invocations compose with full runs.
inline RunResult run_single_stage(const std::string& stage,
                                  const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const fs::path manifest_path = dir / kManifestFile;
  nlohmann::json manifest = nlohmann::json::object();
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded()) manifest = nlohmann::json::object();
  }
  manifest["config"] = cfg.to_json();
  if (!manifest.contains("stages")) manifest["stages"] = nlohmann::json::object();

  RunResult result;
  result.dir = dir;
  std::size_t probe_failures = 0;
  try {
    std::size_t count = run_stage(stage, cfg, dir, &probe_failures);
    manifest["stages"][stage] = {{"status", "complete"}, {"error", ""},
                                 {"count", count}};
    if (stage == "probe" && probe_failures > 0) {
      manifest["stages"][stage]["status"] = "partial";
      manifest["stages"][stage]["failed_samples"] = probe_failures;
      result.exit_code = kExitPartial;
    }
  } catch (const model::TransportError& e) {
    manifest["stages"][stage] = {{"status", "failed"}, {"error", e.what()},
                                 {"count", 0}};
    result.exit_code = kExitTransport;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    manifest["stages"][stage] = {{"status", "failed"}, {"error", e.what()},
                                 {"count", 0}};
    result.exit_code = kExitPartial;
  }
  std::ofstream os(manifest_path, std::ios::binary | std::ios::trunc);
  os << manifest.dump(2) << '\n';
  result.manifest = manifest;
  return result;
}

// Offline end-to-end demonstration config: mock model, planted premature and
// progressive cohorts over generated Countdown problems.
inline RunConfig demo_config(std::string out_dir, std::uint64_t seed = 7,
                             int count = 50) {
  RunConfig cfg;
  cfg.task = Task::Countdown;
  cfg.grid = trajectory::CheckpointGrid::six().fractions();
  cfg.mc_samples = 10;
  cfg.mode = trajectory::TrajectoryMode::GoldAgreement;
  cfg.spearman_threshold = 0.4;
  cfg.eta = 0.1;
  cfg.seed = seed;
  cfg.out_dir = std::move(out_dir);
  cfg.client_kind = "mock";
  cfg.problems.count = count;
  cfg.problems.operands = 4;
  cfg.problems.max_number = 10;
  cfg.problems.max_target = 50;
  return cfg;
}

}  // namespace confshape::harness
