#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "weir/money.hpp"

namespace weir {

// Remote chat-completion endpoint. Credentials come from the environment
// variable named by api_key_env, never from the config file.
struct RemoteEndpoint {
  std::string base_url;                          // e.g. "https://api.openai.com"
  std::string path = "/v1/chat/completions";
  std::string api_key_env;                       // default derived from model id
  int timeout_s = 120;
};

// Deterministic scripted endpoint for tests and offline demos. Each call pops
// the next reply; token counts come from the chars-per-token stub.
struct ScriptedEndpoint {
  std::vector<std::string> replies;
  double chars_per_token = 4.0;
};

using EndpointBinding = std::variant<RemoteEndpoint, ScriptedEndpoint>;

// One model tier of the cascade.
struct ModelDescriptor {
  std::string id;
  int tier_rank = 0;  // position in the cascade, 0 = cheapest
  TokenPrice price_per_input_token;
  TokenPrice price_per_output_token;
  int max_format_retries = 3;  // response-quality retries, not transport retries
  EndpointBinding endpoint;

  bool is_scripted() const { return std::holds_alternative<ScriptedEndpoint>(endpoint); }
  bool is_free() const {
    return price_per_input_token.is_zero() && price_per_output_token.is_zero();
  }
};

struct CompletionRequest {
  std::string profile;  // system-prompt text, may be empty
  std::string prompt;
  double temperature = 0.0;  // in [0, 1]
  int max_output_tokens = 4096;
  std::vector<std::string> stop_sequences;
};

struct CompletionResult {
  std::string text;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::string model_id;
  std::int64_t latency_ms = 0;
};

}  // namespace weir
