#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "confshape/detail/rng.hpp"
#include "confshape/detail/text.hpp"

namespace confshape::model {

// Identifies one logical probe call; mock randomness is keyed on it, so
// concurrency cannot reorder the stream.
struct SampleKey {
  std::string sample_id;
  int checkpoint_index = 0;
  int mc_index = 0;
};

struct GenRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop;
  SampleKey sample_key;
  bool idempotent = true;  // non-idempotent requests are never retried
};

struct GenResponse {
  std::string text;
  int token_count = 0;
  std::optional<double> answer_logprob;  // <= 0 when the backend reports it
};

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool retryable, int status = 0,
                 int attempts = 1)
      : std::runtime_error(what),
        retryable_(retryable),
        status_(status),
        attempts_(attempts) {}

  bool retryable() const { return retryable_; }
  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  bool retryable_;
  int status_;
  int attempts_;
};

// Abstract model interface for generation and truncation probing.
// Implementations must be safe for concurrent calls.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  virtual GenResponse generate(const GenRequest& req) = 0;

  // Short-form answer continuation for a truncated context. The default
  // routes through generate() with a small budget.
  virtual std::string probe(std::string_view truncated_context,
                            std::string_view probe_suffix,
                            const SampleKey& key) {
    if (probe_suffix.empty()) {
      throw std::invalid_argument("probe: empty probe suffix");
    }
    GenRequest req;
    req.prompt = std::string(truncated_context) + std::string(probe_suffix);
    req.max_tokens = 32;
    req.temperature = 1.0;
    req.sample_key = key;
    return std::string(detail::trim(generate(req).text));
  }

  // Probability mass the backend assigns to the gold answer as the direct
  // continuation. Optional capability; MC agreement is the portable path.
  virtual bool supports_forward_probe() const { return false; }
  virtual double forward_probe(std::string_view /*truncated_context*/,
                               std::string_view /*probe_suffix*/,
                               std::string_view /*gold_answer*/,
                               const SampleKey& /*key*/) {
    throw std::logic_error("forward probing not supported by this client");
  }
};

// ---------------------------------------------------------------------------
// Scripted mock model

struct MockModelScript {
  enum class Shape { Premature, Progressive, Custom };

  Shape shape = Shape::Premature;
  double p_hi = 1.0;               // Premature level / Progressive endpoint
  double p_lo = 0.0;               // Progressive start
  std::vector<double> custom;      // per-checkpoint probabilities
  int num_checkpoints = 6;         // grid size assumed by Progressive
  std::string gold_answer;
  std::vector<std::string> distractors;
  std::string cot_template;        // the scripted chain of thought
  std::uint64_t seed = 0;

  void validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in01(p_hi) || !in01(p_lo)) {
      throw std::invalid_argument("mock script: probability outside [0,1]");
    }
    if (shape == Shape::Progressive && p_lo > p_hi) {
      throw std::invalid_argument("mock script: Progressive requires p_lo <= p_hi");
    }
    if (shape == Shape::Custom) {
      if (custom.empty()) {
        throw std::invalid_argument("mock script: Custom needs probabilities");
      }
      for (double p : custom) {
        if (!in01(p)) throw std::invalid_argument("mock script: probability outside [0,1]");
      }
    }
    if (distractors.empty()) {
      throw std::invalid_argument("mock script: distractors required");
    }
    if (num_checkpoints < 2) {
      throw std::invalid_argument("mock script: num_checkpoints < 2");
    }
  }

  // Planted gold-agreement probability at a checkpoint index.
  double planted_p(int checkpoint_index) const {
    switch (shape) {
      case Shape::Premature:
        return p_hi;
      case Shape::Progressive: {
        int k = std::max(0, std::min(checkpoint_index, num_checkpoints - 1));
        double t = static_cast<double>(k) /
                   static_cast<double>(num_checkpoints - 1);
        return p_lo + (p_hi - p_lo) * t;
      }
      case Shape::Custom: {
        int k = std::max(0, std::min(checkpoint_index,
                                     static_cast<int>(custom.size()) - 1));
        return custom[static_cast<std::size_t>(k)];
      }
    }
    return 0.0;
  }
};

// Deterministic scripted model. Every response is a pure function of
// (script, sample_key), so re-running a pipeline reproduces each probe
// bit-exactly regardless of scheduling.
class MockModel final : public ModelClient {
 public:
  explicit MockModel(MockModelScript script) : script_(std::move(script)) {
    script_.validate();
  }

  const MockModelScript& script() const { return script_; }

  GenResponse generate(const GenRequest& req) override {
    GenResponse resp;
    resp.text = script_.cot_template;
    resp.token_count =
        static_cast<int>(detail::ws_tokens(script_.cot_template).size());
    (void)req;
    return resp;
  }

  std::string probe(std::string_view, std::string_view probe_suffix,
                    const SampleKey& key) override {
    if (probe_suffix.empty()) {
      throw std::invalid_argument("probe: empty probe suffix");
    }
    const double p = script_.planted_p(key.checkpoint_index);
    const std::uint64_t base = detail::mix2(
        detail::mix2(script_.seed, detail::fnv1a(key.sample_id)),
        detail::mix2(static_cast<std::uint64_t>(key.checkpoint_index) + 0x51,
                     static_cast<std::uint64_t>(key.mc_index) + 0xA7));
    if (detail::unit_from(base) < p) return script_.gold_answer;
    const std::uint64_t which =
        detail::pick_from(detail::splitmix64(base ^ 0xD15742AC7ULL),
                          script_.distractors.size());
    return script_.distractors[static_cast<std::size_t>(which)];
  }

  bool supports_forward_probe() const override { return true; }

  double forward_probe(std::string_view, std::string_view, std::string_view,
                       const SampleKey& key) override {
    return script_.planted_p(key.checkpoint_index);
  }

 private:
  MockModelScript script_;
};

// ---------------------------------------------------------------------------
// HTTP chat-completions client

struct HttpClientConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string chat_path = "/v1/chat/completions";
  std::string model_name = "default";
  std::string api_key_env;    // name of the env var holding the bearer token
  std::string system_prompt;  // optional leading system message
  int timeout_ms = 30000;
  int max_in_flight = 8;      // consumed by probe fan-out, not per-call state
  int max_attempts = 3;
  int backoff_initial_ms = 500;
  double backoff_factor = 2.0;
  bool forward_probe_enabled = false;

  void validate() const {
    if (base_url.empty()) throw std::invalid_argument("http client: base_url empty");
    if (timeout_ms < 1) throw std::invalid_argument("http client: timeout_ms < 1");
    if (max_attempts < 1) throw std::invalid_argument("http client: max_attempts < 1");
    if (max_in_flight < 1) throw std::invalid_argument("http client: max_in_flight < 1");
  }
};

// Chat-completions client with bounded retries on transient failures
// (timeouts, 429, 5xx). Each call uses its own connection, so concurrent
// calls are safe.
class HttpModelClient final : public ModelClient {
 public:
  explicit HttpModelClient(HttpClientConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  const HttpClientConfig& config() const { return cfg_; }
  std::uint64_t total_retries() const { return retries_.load(); }

  GenResponse generate(const GenRequest& req) override {
    const int budget = req.idempotent ? cfg_.max_attempts : 1;
    int delay_ms = cfg_.backoff_initial_ms;
    for (int attempt = 1;; ++attempt) {
      try {
        return attempt_once(req);
      } catch (const TransportError& err) {
        if (!err.retryable() || attempt >= budget) {
          throw TransportError(err.what(), false, err.status(), attempt);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        delay_ms = static_cast<int>(delay_ms * cfg_.backoff_factor);
        retries_.fetch_add(1);
      }
    }
  }

  bool supports_forward_probe() const override {
    return cfg_.forward_probe_enabled;
  }

  double forward_probe(std::string_view truncated_context,
                       std::string_view probe_suffix, std::string_view,
                       const SampleKey& key) override {
    if (!cfg_.forward_probe_enabled) {
      throw std::logic_error("forward probing disabled for this endpoint");
    }
    GenRequest req;
    req.prompt = std::string(truncated_context) + std::string(probe_suffix);
    req.max_tokens = 1;
    req.sample_key = key;
    GenResponse resp = generate(req);
    if (!resp.answer_logprob) {
      throw TransportError("backend did not return a logprob for the probe",
                           false);
    }
    return std::exp(*resp.answer_logprob);
  }

 private:
  GenResponse attempt_once(const GenRequest& req) {
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    cli.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    cli.set_write_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }

    nlohmann::json body;
    body["model"] = cfg_.model_name;
    nlohmann::json messages = nlohmann::json::array();
    if (!cfg_.system_prompt.empty()) {
      messages.push_back({{"role", "system"}, {"content", cfg_.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", req.prompt}});
    body["messages"] = std::move(messages);
    body["max_tokens"] = req.max_tokens;
    body["temperature"] = req.temperature;
    if (!req.stop.empty()) body["stop"] = req.stop;
    if (cfg_.forward_probe_enabled) body["logprobs"] = true;

    auto res = cli.Post(cfg_.chat_path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("transport failure: " + httplib::to_string(res.error()),
                           /*retryable=*/true);
    }
    if (res->status == 429 || res->status >= 500) {
      throw TransportError("endpoint returned status " + std::to_string(res->status),
                           /*retryable=*/true, res->status);
    }
    if (res->status != 200) {
      throw TransportError("endpoint returned status " + std::to_string(res->status),
                           /*retryable=*/false, res->status);
    }

    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      throw TransportError("malformed JSON in endpoint response",
                           /*retryable=*/false, res->status);
    }
    try {
      GenResponse out;
      const auto& choice = reply.at("choices").at(0);
      out.text = choice.at("message").at("content").get<std::string>();
      if (reply.contains("usage") &&
          reply["usage"].contains("completion_tokens")) {
        out.token_count = reply["usage"]["completion_tokens"].get<int>();
      } else {
        out.token_count = static_cast<int>(detail::ws_tokens(out.text).size());
      }
      if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
        const auto& lp = choice["logprobs"];
        if (lp.contains("content") && lp["content"].is_array() &&
            !lp["content"].empty() && lp["content"][0].contains("logprob")) {
          out.answer_logprob = lp["content"][0]["logprob"].get<double>();
        }
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected response schema: ") + e.what(),
                           /*retryable=*/false, res->status);
    }
  }

  HttpClientConfig cfg_;
  std::atomic<std::uint64_t> retries_{0};
};

}  // namespace confshape::model
