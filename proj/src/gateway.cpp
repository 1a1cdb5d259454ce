#include "weir/gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "weir/errors.hpp"

namespace weir {

using nlohmann::json;

// -- ScriptedBackend --------------------------------------------------------

ScriptedBackend::ScriptedBackend(ScriptedEndpoint spec)
    : queue_(spec.replies.begin(), spec.replies.end()),
      chars_per_token_(spec.chars_per_token > 0 ? spec.chars_per_token : 4.0) {}

CompletionResult ScriptedBackend::complete(const ModelDescriptor& model,
                                           const CompletionRequest& request) {
  requests_.push_back(request);
  if (queue_.empty()) {
    throw ScriptExhausted("scripted backend for '" + model.id + "' has no queued response");
  }
  std::string reply = std::move(queue_.front());
  queue_.pop_front();

  CompletionResult result;
  result.text = std::move(reply);
  result.tokens_in = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(request.prompt.size()) / chars_per_token_));
  result.tokens_out = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(result.text.size()) / chars_per_token_));
  result.model_id = model.id;
  result.latency_ms = 0;
  return result;
}

// -- HttpBackend -------------------------------------------------------------

HttpBackend::HttpBackend(RemoteEndpoint spec) : spec_(std::move(spec)) {}

std::string HttpBackend::serialize_body(const ModelDescriptor& model,
                                        const CompletionRequest& request) {
  json messages = json::array();
  if (!request.profile.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.profile}});
  }
  messages.push_back({{"role", "user"}, {"content", request.prompt}});

  json body = {
      {"model", model.id},
      {"messages", std::move(messages)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
  // prompts can embed raw subprocess output; never let bad UTF-8 abort a call
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

CompletionResult HttpBackend::complete(const ModelDescriptor& model,
                                       const CompletionRequest& request) {
  httplib::Client client(spec_.base_url);
  client.set_connection_timeout(spec_.timeout_s, 0);
  client.set_read_timeout(spec_.timeout_s, 0);
  client.set_write_timeout(spec_.timeout_s, 0);

  httplib::Headers headers;
  if (!spec_.api_key_env.empty()) {
    if (const char* key = std::getenv(spec_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(spec_.path, headers, serialize_body(model, request), "application/json");
  const auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();

  if (!res) {
    throw TransportError("request to " + spec_.base_url + spec_.path + " failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    std::optional<double> retry_after;
    if (res->has_header("Retry-After")) {
      try {
        retry_after = std::stod(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    throw RateLimited("model '" + model.id + "' rate limited (HTTP 429)", retry_after);
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("model '" + model.id + "' returned HTTP " +
                         std::to_string(res->status) + ": " + res->body);
  }

  json payload = json::parse(res->body, nullptr, false);
  if (payload.is_discarded()) {
    throw TransportError("model '" + model.id + "' returned non-JSON body");
  }

  CompletionResult result;
  result.model_id = model.id;
  result.latency_ms = elapsed_ms;
  try {
    result.text = payload.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError("model '" + model.id + "' response missing message content: " +
                         std::string(e.what()));
  }
  // Token counts from the endpoint's reported usage, never re-estimated.
  if (payload.contains("usage")) {
    const auto& usage = payload["usage"];
    result.tokens_in = usage.value("prompt_tokens", std::int64_t{0});
    result.tokens_out = usage.value("completion_tokens", std::int64_t{0});
  }
  return result;
}

// -- Gateway ----------------------------------------------------------------

Gateway::Gateway(UsageSink& sink, GatewayOptions options) : sink_(sink), options_(std::move(options)) {
  if (!options_.sleep) {
    options_.sleep = [](double seconds) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
  }
}

void Gateway::bind(const std::string& model_id, std::unique_ptr<Backend> backend) {
  for (auto& [id, b] : backends_) {
    if (id == model_id) {
      b = std::move(backend);
      return;
    }
  }
  backends_.emplace_back(model_id, std::move(backend));
}

Backend* Gateway::backend(const std::string& model_id) const {
  for (const auto& [id, b] : backends_) {
    if (id == model_id) return b.get();
  }
  return nullptr;
}

CompletionOutcome Gateway::complete(const ModelDescriptor& model,
                                    const CompletionRequest& request, const UsageContext& ctx) {
  if (request.prompt.empty()) throw Error("completion request with empty prompt");
  if (request.temperature < 0.0 || request.temperature > 1.0) {
    throw Error("temperature out of range: " + std::to_string(request.temperature));
  }
  Backend* b = backend(model.id);
  if (b == nullptr) throw Error("no backend bound for model '" + model.id + "'");

  CompletionResult result;
  double backoff = options_.backoff_initial_s;
  for (int attempt = 0;; ++attempt) {
    try {
      result = b->complete(model, request);
      break;
    } catch (const RateLimited& rl) {
      if (attempt >= options_.rate_limit_retries) throw;
      options_.sleep(rl.retry_after_s.value_or(backoff));
      backoff *= 2;
    }
  }

  UsageEvent event;
  event.run_id = ctx.run_id;
  event.step_index = ctx.step_index;
  event.model_id = model.id;
  event.purpose = ctx.purpose;
  event.tokens_in = result.tokens_in;
  event.tokens_out = result.tokens_out;
  const std::int64_t id = sink_.record(std::move(event));
  return CompletionOutcome{std::move(result), id};
}

}  // namespace weir
