// Command-line front end: problem generation, rollouts, truncation probing,
// advantage shaping, reasoning-flaw monitoring, group comparisons, hint
// scanning, and the offline end-to-end demo.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "confshape/harness.hpp"
#include "confshape/hint_detect.hpp"
#include "confshape/pipeline.hpp"

namespace {

using namespace confshape;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool mock = false;
};

harness::RunConfig load_config(const GlobalFlags& flags) {
  harness::RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = harness::RunConfig::from_file(flags.config_path);
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.mock) cfg.client_kind = "mock";
  return cfg;
}

int run_stage_command(const std::string& stage, const harness::RunConfig& cfg) {
  auto result = harness::run_single_stage(stage, cfg);
  const auto& entry = result.manifest["stages"][stage];
  std::cout << stage << ": " << entry["status"].get<std::string>()
            << " (count=" << entry["count"] << ")";
  const std::string err = entry.value("error", "");
  if (!err.empty()) std::cout << " error: " << err;
  std::cout << "\n";
  return result.exit_code;
}

int run_hint_scan(const std::string& input, const std::string& output,
                  const std::string& summary_path,
                  const std::string& patterns_path) {
  hintdetect::DetectorConfig cfg =
      patterns_path.empty()
          ? hintdetect::DetectorConfig::defaults()
          : hintdetect::DetectorConfig::from_file(patterns_path);
  std::vector<hintdetect::HintCase> cases;
  for (const auto& j : jsonl::read_file(input)) {
    cases.push_back(hintdetect::hint_case_from_json(j));
  }
  if (cases.empty()) {
    std::cerr << "hint-scan: no cases in " << input << "\n";
    return harness::kExitConfig;
  }
  jsonl::Writer w(output);
  for (const auto& c : cases) {
    w.write(hintdetect::to_json(hintdetect::detect(c, cfg)));
  }
  auto summary = hintdetect::acknowledgement_rate(cases, cfg);
  std::ofstream os(summary_path, std::ios::binary | std::ios::trunc);
  os << hintdetect::to_json(summary).dump(2) << '\n';
  std::cout << "hint-scan: " << summary.acknowledged << "/" << summary.total
            << " acknowledged (rate " << summary.rate << ")\n";
  return harness::kExitOk;
}

int run_demo(const GlobalFlags& flags, int count) {
  harness::RunConfig cfg = harness::demo_config(
      flags.out_dir.empty() ? "demo_run" : flags.out_dir,
      flags.seed.value_or(7), count);
  if (!flags.config_path.empty()) {
    cfg = harness::RunConfig::from_file(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    cfg.client_kind = "mock";
  }
  auto result = harness::run_pipeline(cfg);
  std::cout << "demo: run directory " << result.dir.string() << " (exit "
            << result.exit_code << ")\n";
  for (const auto& [stage, entry] : result.manifest["stages"].items()) {
    std::cout << "  " << stage << ": " << entry.value("status", "?")
              << " count=" << entry.value("count", std::size_t{0}) << "\n";
  }
  const auto comparisons = result.dir / harness::kComparisonsFile;
  if (std::filesystem::exists(comparisons)) {
    std::ifstream in(comparisons);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("summary")) {
      const auto& s = j["summary"];
      std::cout << "  overall premature-confidence score O = "
                << s["premature_score_overall"] << "\n";
      if (s.contains("cohorts")) {
        for (const auto& [name, c] : s["cohorts"].items()) {
          std::cout << "    cohort " << name << ": O = "
                    << c["premature_score"] << " (n=" << c["n"] << ")\n";
        }
      }
    }
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-trajectory probing, GRPO confidence shaping, and "
               "reasoning-flaw auditing"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON run configuration");
  app.add_option("--seed", flags.seed, "Override the config seed");
  app.add_option("--out", flags.out_dir, "Run directory");
  app.add_flag("--mock", flags.mock, "Force the scripted mock client");

  auto* gen = app.add_subcommand("gen", "Generate Countdown problems");
  int gen_count = -1, gen_operands = -1;
  long long gen_max_number = -1, gen_max_target = -1;
  gen->add_option("--count", gen_count, "Number of problems");
  gen->add_option("--operands", gen_operands, "Operands per problem (3 or 4)");
  gen->add_option("--max-number", gen_max_number, "Largest operand");
  gen->add_option("--max-target", gen_max_target, "Largest accepted target");

  auto* rollout = app.add_subcommand("rollout", "Produce completions and rewards");
  auto* probe = app.add_subcommand("probe", "Build confidence trajectories");
  auto* shape = app.add_subcommand("shape", "Export shaped advantages");
  auto* monitor_cmd =
      app.add_subcommand("monitor", "Audit traces for reasoning flaws");
  auto* compare =
      app.add_subcommand("compare", "Group comparisons, sweeps, calibration");

  auto* hint =
      app.add_subcommand("hint-scan", "Run the hint-acknowledgement detector");
  std::string hint_in, hint_out = "hint_results.jsonl",
              hint_summary = "hint_summary.json", hint_patterns;
  hint->add_option("--in", hint_in, "HintCase JSONL input")->required();
  hint->add_option("--results", hint_out, "DetectionResult JSONL output");
  hint->add_option("--summary", hint_summary, "Summary JSON output");
  hint->add_option("--patterns", hint_patterns, "Pattern config file");

  auto* demo =
      app.add_subcommand("demo", "Offline end-to-end run on the mock model");
  int demo_count = 50;
  demo->add_option("--count", demo_count, "Number of Countdown problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      harness::RunConfig cfg = load_config(flags);
      if (gen_count >= 0) cfg.problems.count = gen_count;
      if (gen_operands >= 0) cfg.problems.operands = gen_operands;
      if (gen_max_number >= 0) cfg.problems.max_number = gen_max_number;
      if (gen_max_target >= 0) cfg.problems.max_target = gen_max_target;
      return run_stage_command("gen", cfg);
    }
    if (rollout->parsed()) return run_stage_command("rollout", load_config(flags));
    if (probe->parsed()) return run_stage_command("probe", load_config(flags));
    if (shape->parsed()) return run_stage_command("shape", load_config(flags));
    if (monitor_cmd->parsed()) return run_stage_command("monitor", load_config(flags));
    if (compare->parsed()) return run_stage_command("compare", load_config(flags));
    if (hint->parsed()) {
      return run_hint_scan(hint_in, hint_out, hint_summary, hint_patterns);
    }
    if (demo->parsed()) return run_demo(flags, demo_count);
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return harness::kExitConfig;
  } catch (const model::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return harness::kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return harness::kExitPartial;
  }
  return harness::kExitOk;
}
