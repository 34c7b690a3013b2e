#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "confshape/detail/numeric.hpp"
#include "confshape/detail/parallel.hpp"
#include "confshape/detail/text.hpp"
#include "confshape/model_client.hpp"

namespace confshape::trajectory {

// Strictly increasing checkpoint fractions in [0, 1].
class CheckpointGrid {
 public:
  explicit CheckpointGrid(std::vector<double> fractions)
      : fractions_(std::move(fractions)) {
    if (fractions_.size() < 2) {
      throw std::invalid_argument("CheckpointGrid: need at least 2 fractions");
    }
    for (std::size_t i = 0; i < fractions_.size(); ++i) {
      if (fractions_[i] < 0.0 || fractions_[i] > 1.0) {
        throw std::invalid_argument("CheckpointGrid: fraction outside [0,1]");
      }
      if (i > 0 && fractions_[i] <= fractions_[i - 1]) {
        throw std::invalid_argument("CheckpointGrid: not strictly increasing");
      }
    }
  }

  // K evenly spaced checkpoints covering 0% .. 100%.
  static CheckpointGrid evenly_spaced(int k) {
    if (k < 2) throw std::invalid_argument("CheckpointGrid: k < 2");
    std::vector<double> f(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      f[static_cast<std::size_t>(i)] =
          static_cast<double>(i) / static_cast<double>(k - 1);
    }
    return CheckpointGrid(std::move(f));
  }

  static CheckpointGrid eleven() { return evenly_spaced(11); }
  static CheckpointGrid six() { return evenly_spaced(6); }

  const std::vector<double>& fractions() const { return fractions_; }
  std::size_t size() const { return fractions_.size(); }

 private:
  std::vector<double> fractions_;
};

enum class TrajectoryMode { GoldAgreement, SelfAgreement, ForwardProbability };

inline std::string_view to_string(TrajectoryMode m) {
  switch (m) {
    case TrajectoryMode::GoldAgreement: return "gold_agreement";
    case TrajectoryMode::SelfAgreement: return "self_agreement";
    case TrajectoryMode::ForwardProbability: return "forward_probability";
  }
  return "?";
}

inline TrajectoryMode mode_from_string(std::string_view s) {
  if (s == "gold_agreement") return TrajectoryMode::GoldAgreement;
  if (s == "self_agreement") return TrajectoryMode::SelfAgreement;
  if (s == "forward_probability") return TrajectoryMode::ForwardProbability;
  throw std::invalid_argument("unknown trajectory mode: " + std::string(s));
}

// Per-checkpoint agreement fractions aligned with a grid.
struct ConfidenceTrajectory {
  std::vector<double> grid;    // checkpoint fractions
  std::vector<double> values;  // agreement fractions in [0,1]
  TrajectoryMode mode = TrajectoryMode::GoldAgreement;
  int mc_samples = 0;  // 0 in ForwardProbability mode

  void validate() const {
    if (values.size() != grid.size()) {
      throw std::invalid_argument("trajectory: grid/value length mismatch");
    }
    for (double v : values) {
      if (v < 0.0 || v > 1.0) {
        throw std::invalid_argument("trajectory: value outside [0,1]");
      }
    }
  }
};

// Fixed weights for the premature-confidence inner product: monotonically
// non-increasing, positive early and negative late.
class ScoringVector {
 public:
  explicit ScoringVector(std::vector<double> weights)
      : weights_(std::move(weights)) {
    if (weights_.size() < 2) {
      throw std::invalid_argument("ScoringVector: need at least 2 weights");
    }
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (i > 0 && weights_[i] > weights_[i - 1]) {
        throw std::invalid_argument("ScoringVector: not non-increasing");
      }
      has_pos |= weights_[i] > 0.0;
      has_neg |= weights_[i] < 0.0;
    }
    if (!has_pos || !has_neg) {
      throw std::invalid_argument(
          "ScoringVector: needs a positive prefix and a negative suffix");
    }
  }

  static ScoringVector default_six() {
    return ScoringVector({0.5, 0.3, 0.1, -0.1, -0.3, -0.5});
  }

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Truncation

// Number of tokens kept at a checkpoint: floor(fraction * token_count).
inline std::size_t truncation_count(std::size_t token_count, double fraction) {
  if (fraction <= 0.0) return 0;
  if (fraction >= 1.0) return token_count;
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(token_count)));
}

// First floor(fraction * |tokens|) whitespace tokens, joined by single spaces.
inline std::string truncate_text(std::string_view cot, double fraction) {
  auto toks = detail::ws_tokens(cot);
  return detail::join_tokens(toks, truncation_count(toks.size(), fraction));
}

// ---------------------------------------------------------------------------
// Spearman rank correlation

struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;  // constant input; rho fixed at 0
};

namespace detail_rank {

// Midranks: tied values share the average of their would-be ranks.
inline std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail_rank

// Spearman rho between the values and their index vector 0..n-1, with
// midrank treatment of ties. A constant vector has no defined rank
// correlation; it is reported as rho = 0 with the degenerate flag set.
inline SpearmanResult spearman(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("spearman: need at least 2 values");
  bool constant = true;
  for (std::size_t i = 1; i < n && constant; ++i) {
    constant = values[i] == values[0];
  }
  if (constant) return SpearmanResult{0.0, true};

  std::vector<double> rx = detail_rank::midranks(values);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;  // both rank means
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = (static_cast<double>(i) + 1.0) - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return SpearmanResult{sxy / std::sqrt(sxx * syy), false};
}

inline SpearmanResult spearman(const ConfidenceTrajectory& c) {
  return spearman(std::span<const double>(c.values));
}

// ---------------------------------------------------------------------------
// Inner-product quantification

// <c, w>: positive means front-loaded (premature) confidence, negative means
// back-loaded (progressive). Compensated summation keeps constant
// trajectories at exactly 0 against the zero-sum default weights.
inline double inner_score(std::span<const double> values,
                          const ScoringVector& w) {
  if (values.size() != w.size()) {
    throw std::invalid_argument("inner_score: length mismatch");
  }
  return detail::compensated_dot(values, std::span<const double>(w.weights()));
}

inline double inner_score(const ConfidenceTrajectory& c, const ScoringVector& w) {
  return inner_score(std::span<const double>(c.values), w);
}

// c' = [c0, c2, c4, c6, c8, c10]: every other checkpoint of an 11-point
// trajectory, for scoring against the 6-point weight vector.
inline ConfidenceTrajectory subsample_to_six(const ConfidenceTrajectory& c11) {
  if (c11.values.size() != 11 || c11.grid.size() != 11) {
    throw std::invalid_argument("subsample_to_six: expected an 11-point trajectory");
  }
  ConfidenceTrajectory out;
  out.mode = c11.mode;
  out.mc_samples = c11.mc_samples;
  for (std::size_t i = 0; i < 11; i += 2) {
    out.grid.push_back(c11.grid[i]);
    out.values.push_back(c11.values[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

enum class TrajectoryLabel { Premature, Progressive };

inline std::string_view to_string(TrajectoryLabel l) {
  return l == TrajectoryLabel::Premature ? "premature" : "progressive";
}

inline TrajectoryLabel label_from_string(std::string_view s) {
  if (s == "premature") return TrajectoryLabel::Premature;
  if (s == "progressive") return TrajectoryLabel::Progressive;
  throw std::invalid_argument("unknown label: " + std::string(s));
}

struct TrajectoryClassification {
  double spearman_rho = 0.0;
  bool degenerate = false;
  TrajectoryLabel label = TrajectoryLabel::Premature;
  double threshold = 0.4;
};

// Premature iff rho < threshold (strict). Degenerate constant trajectories
// land at rho = 0 < threshold for any positive threshold: constant-high is
// the canonical premature shape, constant-low carries the degenerate flag so
// group statistics can exclude it.
inline TrajectoryLabel label_for_rho(double rho, double threshold) {
  return rho < threshold ? TrajectoryLabel::Premature
                         : TrajectoryLabel::Progressive;
}

inline TrajectoryClassification classify(const ConfidenceTrajectory& c,
                                         double threshold) {
  if (threshold < -1.0 || threshold > 1.0) {
    throw std::invalid_argument("classify: threshold outside [-1,1]");
  }
  SpearmanResult r = spearman(c);
  TrajectoryClassification out;
  out.spearman_rho = r.rho;
  out.degenerate = r.degenerate;
  out.threshold = threshold;
  out.label = r.degenerate ? TrajectoryLabel::Premature
                           : label_for_rho(r.rho, threshold);
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory building

struct ProbeRecord {
  std::string sample_id;
  int checkpoint_index = 0;
  int mc_index = 0;
  std::string raw_answer;
  bool matched = false;
};

struct FailedCell {
  int checkpoint_index = 0;
  int mc_index = 0;
  std::string error;
};

struct BuildSpec {
  std::string sample_id;
  std::string problem_context;  // prompt text preceding the chain of thought
  std::string cot;              // the full completion being probed
  CheckpointGrid grid = CheckpointGrid::six();
  TrajectoryMode mode = TrajectoryMode::GoldAgreement;
  int mc_samples = 10;
  std::string probe_suffix;
  int max_in_flight = 8;

  // GoldAgreement: decides whether a probe answer matches the gold answer
  // (task-specific: Countdown verify, boxed equality, MCQ letter equality).
  std::function<bool(std::string_view)> gold_matcher;

  // SelfAgreement: pulls the final answer out of a completion or probe reply.
  std::function<std::optional<std::string>(std::string_view)> answer_extractor;

  // ForwardProbability: gold answer forwarded to the backend hook.
  std::string gold_answer;
};

struct BuildOutcome {
  std::optional<ConfidenceTrajectory> trajectory;   // set iff complete
  std::vector<std::optional<double>> partial_values;  // per checkpoint
  std::vector<ProbeRecord> records;
  std::vector<FailedCell> failures;

  bool complete() const { return trajectory.has_value(); }
};

namespace detail_build {

inline std::string normalize_answer(std::string_view s) {
  return detail::collapse_ws(s);
}

}  // namespace detail_build

// Probes the model at every checkpoint of the grid and aggregates agreement
// fractions. Transport failures do not abort the build; failed cells are
// reported and the trajectory is only materialized when every cell succeeded.
inline BuildOutcome build_trajectory(model::ModelClient& client,
                                     const BuildSpec& spec) {
  if (spec.mc_samples < 1 && spec.mode != TrajectoryMode::ForwardProbability) {
    throw std::invalid_argument("build_trajectory: mc_samples must be >= 1");
  }
  if (spec.probe_suffix.empty()) {
    throw std::invalid_argument("build_trajectory: probe_suffix empty");
  }

  const std::size_t k = spec.grid.size();
  BuildOutcome out;
  out.partial_values.assign(k, std::nullopt);

  // Pre-compute truncated contexts (token prefixes of the CoT).
  std::vector<std::string> contexts(k);
  for (std::size_t i = 0; i < k; ++i) {
    contexts[i] =
        spec.problem_context + truncate_text(spec.cot, spec.grid.fractions()[i]);
  }

  if (spec.mode == TrajectoryMode::ForwardProbability) {
    std::mutex mu;
    detail::parallel_for(k, spec.max_in_flight, [&](std::size_t i) {
      model::SampleKey key{spec.sample_id, static_cast<int>(i), 0};
      try {
        double p = client.forward_probe(contexts[i], spec.probe_suffix,
                                        spec.gold_answer, key);
        std::lock_guard<std::mutex> lock(mu);
        out.partial_values[i] = std::clamp(p, 0.0, 1.0);
      } catch (const model::TransportError& err) {
        std::lock_guard<std::mutex> lock(mu);
        out.failures.push_back(FailedCell{static_cast<int>(i), 0, err.what()});
      }
    });
  } else {
    std::function<bool(std::string_view)> matcher;
    if (spec.mode == TrajectoryMode::GoldAgreement) {
      if (!spec.gold_matcher) {
        throw std::invalid_argument("build_trajectory: gold_matcher required");
      }
      matcher = spec.gold_matcher;
    } else {
      // Self-agreement compares probes against the full-CoT answer a*.
      if (!spec.answer_extractor) {
        throw std::invalid_argument("build_trajectory: answer_extractor required");
      }
      auto a_star = spec.answer_extractor(spec.cot);
      if (!a_star) {
        throw std::invalid_argument(
            "build_trajectory: completion has no extractable answer");
      }
      std::string target = detail_build::normalize_answer(*a_star);
      auto extractor = spec.answer_extractor;
      matcher = [target, extractor](std::string_view probe_answer) {
        auto extracted = extractor(probe_answer);
        std::string got = detail_build::normalize_answer(
            extracted ? *extracted : std::string(probe_answer));
        return got == target;
      };
    }

    const std::size_t cells = k * static_cast<std::size_t>(spec.mc_samples);
    std::vector<std::optional<ProbeRecord>> cell_records(cells);
    std::vector<std::optional<FailedCell>> cell_failures(cells);
    detail::parallel_for(cells, spec.max_in_flight, [&](std::size_t cell) {
      const std::size_t ck = cell / static_cast<std::size_t>(spec.mc_samples);
      const int mc = static_cast<int>(cell % static_cast<std::size_t>(spec.mc_samples));
      model::SampleKey key{spec.sample_id, static_cast<int>(ck), mc};
      try {
        std::string answer = client.probe(contexts[ck], spec.probe_suffix, key);
        ProbeRecord rec;
        rec.sample_id = spec.sample_id;
        rec.checkpoint_index = static_cast<int>(ck);
        rec.mc_index = mc;
        rec.matched = matcher(answer);
        rec.raw_answer = std::move(answer);
        cell_records[cell] = std::move(rec);
      } catch (const model::TransportError& err) {
        cell_failures[cell] = FailedCell{static_cast<int>(ck), mc, err.what()};
      }
    });

    for (std::size_t ck = 0; ck < k; ++ck) {
      int matched = 0;
      bool all_ok = true;
      for (int mc = 0; mc < spec.mc_samples; ++mc) {
        const std::size_t cell =
            ck * static_cast<std::size_t>(spec.mc_samples) +
            static_cast<std::size_t>(mc);
        if (cell_records[cell]) {
          out.records.push_back(*cell_records[cell]);
          matched += cell_records[cell]->matched ? 1 : 0;
        } else {
          all_ok = false;
          out.failures.push_back(*cell_failures[cell]);
        }
      }
      if (all_ok) {
        out.partial_values[ck] =
            static_cast<double>(matched) / static_cast<double>(spec.mc_samples);
      }
    }
  }

  bool complete = true;
  for (const auto& v : out.partial_values) complete &= v.has_value();
  if (complete) {
    ConfidenceTrajectory traj;
    traj.grid = spec.grid.fractions();
    traj.mode = spec.mode;
    traj.mc_samples =
        spec.mode == TrajectoryMode::ForwardProbability ? 0 : spec.mc_samples;
    traj.values.reserve(k);
    for (const auto& v : out.partial_values) traj.values.push_back(*v);
    out.trajectory = std::move(traj);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

struct TrajectoryRecord {
  std::string sample_id;
  ConfidenceTrajectory trajectory;
  double rho = 0.0;
  bool degenerate = false;
  double inner = 0.0;
  TrajectoryLabel label = TrajectoryLabel::Premature;
};

inline TrajectoryRecord make_record(std::string sample_id,
                                    ConfidenceTrajectory traj,
                                    const ScoringVector& w, double threshold) {
  TrajectoryRecord rec;
  rec.sample_id = std::move(sample_id);
  auto cls = classify(traj, threshold);
  rec.rho = cls.spearman_rho;
  rec.degenerate = cls.degenerate;
  rec.label = cls.label;
  // Scoring happens on the weight vector's grid length; longer trajectories
  // are subsampled to match.
  if (traj.values.size() == w.size()) {
    rec.inner = inner_score(traj, w);
  } else if (traj.values.size() == 11 && w.size() == 6) {
    rec.inner = inner_score(subsample_to_six(traj), w);
  } else {
    throw std::invalid_argument("make_record: trajectory/weights length mismatch");
  }
  rec.trajectory = std::move(traj);
  return rec;
}

inline nlohmann::json to_json(const TrajectoryRecord& r) {
  return nlohmann::json{{"sample_id", r.sample_id},
                        {"grid", r.trajectory.grid},
                        {"values", r.trajectory.values},
                        {"mode", std::string(to_string(r.trajectory.mode))},
                        {"mc_samples", r.trajectory.mc_samples},
                        {"rho", r.rho},
                        {"degenerate", r.degenerate},
                        {"inner_score", r.inner},
                        {"label", std::string(to_string(r.label))}};
}

inline TrajectoryRecord trajectory_record_from_json(const nlohmann::json& j) {
  TrajectoryRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.trajectory.grid = j.at("grid").get<std::vector<double>>();
  r.trajectory.values = j.at("values").get<std::vector<double>>();
  r.trajectory.mode = mode_from_string(j.at("mode").get<std::string>());
  r.trajectory.mc_samples = j.at("mc_samples").get<int>();
  r.rho = j.at("rho").get<double>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.inner = j.at("inner_score").get<double>();
  r.label = label_from_string(j.at("label").get<std::string>());
  r.trajectory.validate();
  return r;
}

inline nlohmann::json to_json(const ProbeRecord& r) {
  return nlohmann::json{{"sample_id", r.sample_id},
                        {"checkpoint_index", r.checkpoint_index},
                        {"mc_index", r.mc_index},
                        {"raw_answer", r.raw_answer},
                        {"matched", r.matched}};
}

inline ProbeRecord probe_record_from_json(const nlohmann::json& j) {
  ProbeRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.checkpoint_index = j.at("checkpoint_index").get<int>();
  r.mc_index = j.at("mc_index").get<int>();
  r.raw_answer = j.at("raw_answer").get<std::string>();
  r.matched = j.at("matched").get<bool>();
  return r;
}

}  // namespace confshape::trajectory
