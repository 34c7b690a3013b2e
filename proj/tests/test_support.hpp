#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "confshape/countdown.hpp"
#include "confshape/detail/rng.hpp"
#include "confshape/model_client.hpp"

namespace testsupport {

// Random expression tree over positive literals; used for round-trip and
// evaluator fuzzing.
inline confshape::countdown::Expr random_expr(confshape::detail::Rng& rng,
                                              int max_depth,
                                              long long max_literal = 50) {
  using confshape::countdown::BinOp;
  using confshape::countdown::Expr;
  if (max_depth <= 0 || rng.below(3) == 0) {
    return Expr::literal(rng.range(1, max_literal));
  }
  static constexpr BinOp kOps[4] = {BinOp::Add, BinOp::Sub, BinOp::Mul,
                                    BinOp::Div};
  BinOp op = kOps[rng.below(4)];
  Expr left = random_expr(rng, max_depth - 1, max_literal);
  Expr right = random_expr(rng, max_depth - 1, max_literal);
  return Expr::binary(op, std::move(left), std::move(right));
}

// Judge double that replays canned replies in call order and records the
// prompts it saw. The monitor pipeline is sequential, so replay order is
// deterministic.
class ScriptedJudge final : public confshape::model::ModelClient {
 public:
  explicit ScriptedJudge(std::vector<std::string> replies)
      : replies_(replies.begin(), replies.end()) {}

  confshape::model::GenResponse generate(
      const confshape::model::GenRequest& req) override {
    prompts.push_back(req.prompt);
    if (replies_.empty()) {
      throw std::runtime_error("ScriptedJudge: reply script exhausted");
    }
    confshape::model::GenResponse resp;
    resp.text = std::move(replies_.front());
    replies_.pop_front();
    resp.token_count = 1;
    return resp;
  }

  std::vector<std::string> prompts;

 private:
  std::deque<std::string> replies_;
};

}  // namespace testsupport
