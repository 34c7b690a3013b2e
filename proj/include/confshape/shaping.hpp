#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confshape/detail/numeric.hpp"
#include "confshape/trajectory.hpp"

namespace confshape::shaping {

inline constexpr double kSigmaEpsilon = 1e-8;
inline constexpr double kCorrectGateThreshold = 0.999;

struct CompletionRollout {
  std::string completion_id;
  std::string text;
  int token_count = 0;
  double reward = 0.0;
  trajectory::ConfidenceTrajectory trajectory;
};

// G completions for one query, with rewards and confidence trajectories.
struct RolloutGroup {
  std::string query_id;
  std::vector<CompletionRollout> completions;
};

// Group-relative advantages: A_i = (r_i - mu) / max(sigma, eps) with the
// population standard deviation. All-equal rewards yield exact zeros.
inline std::vector<double> group_advantages(std::span<const double> rewards,
                                            double epsilon = kSigmaEpsilon) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantages: need at least 2 rewards");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) {
      throw std::invalid_argument("group_advantages: non-finite reward");
    }
  }
  bool all_equal = true;
  for (std::size_t i = 1; i < rewards.size() && all_equal; ++i) {
    all_equal = rewards[i] == rewards[0];
  }
  std::vector<double> out(rewards.size(), 0.0);
  if (all_equal) return out;

  const double mu = detail::mean(rewards);
  double ss = 0.0;
  for (double r : rewards) {
    const double d = r - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(rewards.size()));
  const double denom = sigma > epsilon ? sigma : epsilon;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = (rewards[i] - mu) / denom;
  }
  return out;
}

// P = eta * <c, w>. Positive P (front-loaded confidence) lowers the shaped
// advantage. eta = 0 recovers vanilla GRPO exactly.
inline double penalty(const trajectory::ConfidenceTrajectory& c,
                      const trajectory::ScoringVector& w, double eta) {
  if (eta < 0.0) throw std::invalid_argument("penalty: eta must be >= 0");
  if (eta == 0.0) return 0.0;
  return eta * trajectory::inner_score(c, w);
}

struct ShapedCompletion {
  std::string completion_id;
  double reward = 0.0;
  double base_advantage = 0.0;  // A_i
  double inner = 0.0;           // <c_i, w>
  double penalty = 0.0;         // P_i
  double shaped = 0.0;          // A_i - P_i, constant across the tokens
};

struct ShapedAdvantages {
  std::string query_id;
  std::vector<ShapedCompletion> completions;
  double reward_mean = 0.0;
  double reward_stddev = 0.0;  // population
  double group_score = 0.0;    // mean <c_i, w> over the group
};

struct ShapeOptions {
  double eta = 0.0;
  bool correct_only = false;  // zero the penalty on incorrect completions
  double correct_threshold = kCorrectGateThreshold;
};

// One shaping step for a rollout group: group-relative advantages minus the
// premature-confidence penalty. The penalty has no token index; trainers
// broadcast the per-completion scalar across tokens.
inline ShapedAdvantages shape(const RolloutGroup& group,
                              const trajectory::ScoringVector& w,
                              const ShapeOptions& opts) {
  if (group.completions.size() < 2) {
    throw std::invalid_argument("shape: group needs at least 2 completions");
  }
  std::vector<double> rewards;
  rewards.reserve(group.completions.size());
  for (const auto& c : group.completions) rewards.push_back(c.reward);

  std::vector<double> advantages = group_advantages(rewards);

  ShapedAdvantages out;
  out.query_id = group.query_id;
  out.reward_mean = detail::mean(rewards);
  double ss = 0.0;
  for (double r : rewards) ss += (r - out.reward_mean) * (r - out.reward_mean);
  out.reward_stddev = std::sqrt(ss / static_cast<double>(rewards.size()));

  std::vector<double> inners;
  inners.reserve(group.completions.size());
  out.completions.reserve(group.completions.size());
  for (std::size_t i = 0; i < group.completions.size(); ++i) {
    const auto& c = group.completions[i];
    ShapedCompletion sc;
    sc.completion_id = c.completion_id;
    sc.reward = c.reward;
    sc.base_advantage = advantages[i];
    sc.inner = trajectory::inner_score(c.trajectory, w);
    inners.push_back(sc.inner);
    const bool gated =
        opts.correct_only && c.reward < opts.correct_threshold;
    sc.penalty = (opts.eta == 0.0 || gated) ? 0.0 : opts.eta * sc.inner;
    sc.shaped = sc.base_advantage - sc.penalty;
    out.completions.push_back(std::move(sc));
  }
  out.group_score = detail::mean(inners);
  return out;
}

// Batch premature-confidence score O: the unweighted mean of <c_i, w> over
// every completion in the batch. Larger means more front-loaded confidence.
inline double batch_score(std::span<const RolloutGroup> groups,
                          const trajectory::ScoringVector& w) {
  std::vector<double> inners;
  for (const auto& g : groups) {
    for (const auto& c : g.completions) {
      inners.push_back(trajectory::inner_score(c.trajectory, w));
    }
  }
  if (inners.empty()) {
    throw std::invalid_argument("batch_score: empty batch");
  }
  return detail::mean(inners);
}

// ---------------------------------------------------------------------------
// Export: the hand-off surface to an external RL trainer.

inline nlohmann::json to_json(const ShapedCompletion& c,
                              const std::string& query_id) {
  return nlohmann::json{{"query_id", query_id},
                        {"completion_id", c.completion_id},
                        {"reward", c.reward},
                        {"advantage", c.base_advantage},
                        {"penalty", c.penalty},
                        {"shaped_advantage", c.shaped},
                        {"inner_score", c.inner}};
}

// JSONL: one record per completion plus a footer record with the batch score.
inline void write_shaped_jsonl(std::ostream& os,
                               std::span<const ShapedAdvantages> batch,
                               const trajectory::ScoringVector& w, double eta) {
  std::vector<double> inners;
  for (const auto& g : batch) {
    for (const auto& c : g.completions) {
      os << to_json(c, g.query_id).dump() << '\n';
      inners.push_back(c.inner);
    }
  }
  nlohmann::json footer{{"record", "batch_footer"},
                        {"O", inners.empty() ? 0.0 : detail::mean(inners)},
                        {"eta", eta},
                        {"w", w.weights()},
                        {"completions", inners.size()}};
  os << footer.dump() << '\n';
}

}  // namespace confshape::shaping
