#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "weir/model.hpp"
#include "weir/usage.hpp"

namespace weir {

// Raw text-completion transport. Implementations never interpret the text;
// response validation is the grammar's job.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult complete(const ModelDescriptor& model,
                                    const CompletionRequest& request) = 0;
};

// FIFO queue of canned replies with a chars-per-token tokenizer stub.
// Single-consumer: one instance per run.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(ScriptedEndpoint spec);

  CompletionResult complete(const ModelDescriptor& model,
                            const CompletionRequest& request) override;

  std::size_t remaining() const { return queue_.size(); }
  // Every request seen, in order. Tests assert profiles and temperatures here.
  const std::vector<CompletionRequest>& requests() const { return requests_; }

 private:
  std::deque<std::string> queue_;
  double chars_per_token_;
  std::vector<CompletionRequest> requests_;
};

// Chat-completion HTTP backend (system message = profile, one user message =
// prompt). Token counts are taken from the endpoint's reported usage.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(RemoteEndpoint spec);

  CompletionResult complete(const ModelDescriptor& model,
                            const CompletionRequest& request) override;

  // Request body built for a call; exposed for wire-format tests.
  static std::string serialize_body(const ModelDescriptor& model,
                                    const CompletionRequest& request);

 private:
  RemoteEndpoint spec_;
};

struct UsageContext {
  std::string run_id;
  int step_index = 0;
  Purpose purpose = Purpose::planning;
};

struct CompletionOutcome {
  CompletionResult result;
  std::int64_t usage_event_id = -1;  // id the ledger assigned to this call
};

struct GatewayOptions {
  int rate_limit_retries = 3;
  double backoff_initial_s = 0.5;
  std::function<void(double)> sleep;  // injectable for tests; default real sleep
};

// Uniform entry point for model calls: routes to the model's backend, retries
// RateLimited up to 3 times with exponential backoff (transport retries never
// count against a model's format-retry budget m), and emits exactly one
// UsageEvent per successful completion.
class Gateway {
 public:
  explicit Gateway(UsageSink& sink, GatewayOptions options = GatewayOptions());

  void bind(const std::string& model_id, std::unique_ptr<Backend> backend);
  Backend* backend(const std::string& model_id) const;

  CompletionOutcome complete(const ModelDescriptor& model, const CompletionRequest& request,
                             const UsageContext& ctx);

 private:
  UsageSink& sink_;
  GatewayOptions options_;
  std::vector<std::pair<std::string, std::unique_ptr<Backend>>> backends_;
};

}  // namespace weir
