#include "weir/config.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "weir/errors.hpp"

namespace weir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf, 16);
}

namespace {

std::string default_api_key_env(const std::string& model_id) {
  std::string out = "WEIR_API_KEY_";
  for (char c : model_id) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_';
  }
  return out;
}

TokenPrice parse_price(const json& value, const std::string& path) {
  try {
    if (value.is_string()) return TokenPrice::parse(value.get<std::string>());
    if (value.is_number()) {
      return TokenPrice::parse(Decimal::from_double(value.get<double>()).to_string());
    }
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "expected a decimal price (string or number)");
}

double require_range(const json& parent, const char* key, double fallback, double lo, double hi,
                     const std::string& path) {
  if (!parent.contains(key)) return fallback;
  if (!parent[key].is_number()) throw ConfigError(path, "expected a number");
  const double v = parent[key].get<double>();
  if (v < lo || v > hi) {
    throw ConfigError(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

long require_int(const json& parent, const char* key, long fallback, long lo,
                 const std::string& path) {
  if (!parent.contains(key)) return fallback;
  if (!parent[key].is_number_integer()) throw ConfigError(path, "expected an integer");
  const long v = parent[key].get<long>();
  if (v < lo) throw ConfigError(path, "must be at least " + std::to_string(lo));
  return v;
}

}  // namespace

EngineConfig parse_engine_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("(root)", "config must be a JSON object");

  // optional external pricing table: model id -> {price_per_input_token, ...}
  json pricing_table = json::object();
  if (doc.contains("pricing_file")) {
    if (!doc["pricing_file"].is_string()) {
      throw ConfigError("pricing_file", "expected a path string");
    }
    fs::path pricing_path = doc["pricing_file"].get<std::string>();
    if (pricing_path.is_relative()) pricing_path = base_dir / pricing_path;
    std::ifstream in(pricing_path);
    if (!in.is_open()) {
      throw ConfigError("pricing_file", "cannot open '" + pricing_path.string() + "'");
    }
    pricing_table = json::parse(in, nullptr, false);
    if (pricing_table.is_discarded() || !pricing_table.is_object()) {
      throw ConfigError("pricing_file", "'" + pricing_path.string() + "' is not a JSON object");
    }
  }

  EngineConfig config;

  if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
    throw ConfigError("models", "at least one model is required");
  }

  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < doc["models"].size(); ++i) {
    const std::string path = "models[" + std::to_string(i) + "]";
    const json& m = doc["models"][i];
    if (!m.is_object()) throw ConfigError(path, "expected an object");

    ModelDescriptor model;
    if (!m.contains("id") || !m["id"].is_string() || m["id"].get<std::string>().empty()) {
      throw ConfigError(path + ".id", "a non-empty model id is required");
    }
    model.id = m["id"].get<std::string>();
    if (!seen_ids.insert(model.id).second) {
      throw ConfigError(path + ".id", "duplicate model id '" + model.id + "'");
    }

    const json& endpoint = m.contains("endpoint") ? m["endpoint"] : json::object();
    const std::string kind = endpoint.value("type", "");
    if (kind == "scripted") {
      ScriptedEndpoint scripted;
      if (endpoint.contains("replies")) {
        if (!endpoint["replies"].is_array()) {
          throw ConfigError(path + ".endpoint.replies", "expected an array of strings");
        }
        for (const auto& r : endpoint["replies"]) {
          if (!r.is_string()) {
            throw ConfigError(path + ".endpoint.replies", "expected an array of strings");
          }
          scripted.replies.push_back(r.get<std::string>());
        }
      }
      scripted.chars_per_token = endpoint.value("chars_per_token", 4.0);
      if (scripted.chars_per_token <= 0) {
        throw ConfigError(path + ".endpoint.chars_per_token", "must be positive");
      }
      model.endpoint = std::move(scripted);
    } else if (kind == "remote") {
      RemoteEndpoint remote;
      if (!endpoint.contains("base_url") || !endpoint["base_url"].is_string()) {
        throw ConfigError(path + ".endpoint.base_url", "a base URL is required");
      }
      remote.base_url = endpoint["base_url"].get<std::string>();
      remote.path = endpoint.value("path", std::string("/v1/chat/completions"));
      remote.api_key_env = endpoint.value("api_key_env", default_api_key_env(model.id));
      remote.timeout_s =
          static_cast<int>(require_int(endpoint, "timeout_s", 120, 1, path + ".endpoint.timeout_s"));
      model.endpoint = std::move(remote);
    } else {
      throw ConfigError(path + ".endpoint.type", "must be 'scripted' or 'remote'");
    }

    // prices: explicit > pricing file > zero for scripted endpoints
    const bool has_explicit =
        m.contains("price_per_input_token") || m.contains("price_per_output_token");
    if (has_explicit) {
      if (!m.contains("price_per_input_token") || !m.contains("price_per_output_token")) {
        throw ConfigError(path, "give both price_per_input_token and price_per_output_token");
      }
      model.price_per_input_token =
          parse_price(m["price_per_input_token"], path + ".price_per_input_token");
      model.price_per_output_token =
          parse_price(m["price_per_output_token"], path + ".price_per_output_token");
    } else if (pricing_table.contains(model.id)) {
      const json& p = pricing_table[model.id];
      model.price_per_input_token = parse_price(
          p.at("price_per_input_token"), "pricing_file:" + model.id + ".price_per_input_token");
      model.price_per_output_token = parse_price(
          p.at("price_per_output_token"), "pricing_file:" + model.id + ".price_per_output_token");
    } else if (model.is_scripted()) {
      // scripted test doubles are no-cost unless priced
    } else {
      throw ConfigError(path, "no pricing for remote model '" + model.id +
                                  "' (set prices here or in the pricing file)");
    }

    if (m.contains("max_format_retries")) {
      model.max_format_retries = static_cast<int>(
          require_int(m, "max_format_retries", 3, 1, path + ".max_format_retries"));
    } else {
      model.max_format_retries = 0;  // filled after tier resolution
    }
    config.models.push_back(std::move(model));
  }

  // cascade: defaults to the declared model order
  const json& cascade = doc.contains("cascade") ? doc["cascade"] : json::object();
  std::vector<std::string> tier_ids;
  if (cascade.contains("tiers")) {
    if (!cascade["tiers"].is_array() || cascade["tiers"].empty()) {
      throw ConfigError("cascade.tiers", "expected a non-empty array of model ids");
    }
    for (const auto& t : cascade["tiers"]) {
      if (!t.is_string()) throw ConfigError("cascade.tiers", "expected model id strings");
      tier_ids.push_back(t.get<std::string>());
    }
  } else {
    for (const auto& m : config.models) tier_ids.push_back(m.id);
  }

  CascadeConfig& cc = config.run.cascade;
  for (std::size_t i = 0; i < tier_ids.size(); ++i) {
    const ModelDescriptor* found = nullptr;
    for (const auto& m : config.models) {
      if (m.id == tier_ids[i]) found = &m;
    }
    if (found == nullptr) {
      throw ConfigError("cascade.tiers[" + std::to_string(i) + "]",
                        "unknown model '" + tier_ids[i] + "'");
    }
    ModelDescriptor tier = *found;
    tier.tier_rank = static_cast<int>(i);
    cc.tiers.push_back(std::move(tier));
  }
  // retry defaults per tier position: 3 for base tiers, 1 for the expert tier
  for (std::size_t i = 0; i < cc.tiers.size(); ++i) {
    if (cc.tiers[i].max_format_retries == 0) {
      const bool is_expert = cc.tiers.size() >= 2 && i == cc.tiers.size() - 1;
      cc.tiers[i].max_format_retries = is_expert ? 1 : 3;
    }
  }
  cc.repeat_threshold =
      static_cast<int>(require_int(cascade, "repeat_threshold", 3, 2, "cascade.repeat_threshold"));
  cc.lifeline_cap =
      static_cast<int>(require_int(cascade, "lifeline_cap", 5, 0, "cascade.lifeline_cap"));
  cc.expert_tier_index = cc.tiers.size() - 1;
  const std::string trigger = cascade.value("repeat_trigger", "before_r");
  if (trigger == "before_r") {
    cc.repeat_trigger = RepeatTrigger::before_r;
  } else if (trigger == "at_r") {
    cc.repeat_trigger = RepeatTrigger::at_r;
  } else {
    throw ConfigError("cascade.repeat_trigger", "must be 'before_r' or 'at_r'");
  }
  cc.validate();

  // run parameters, defaulting to the shipped hyperparameters
  const json& run = doc.contains("run") ? doc["run"] : json::object();
  RunConfig& rc = config.run;
  rc.max_actions = static_cast<int>(require_int(run, "max_actions", 30, 1, "run.max_actions"));
  rc.short_term_k = static_cast<int>(require_int(run, "short_term_k", 3, 0, "run.short_term_k"));
  if (run.contains("retrieval_enabled")) {
    if (!run["retrieval_enabled"].is_boolean()) {
      throw ConfigError("run.retrieval_enabled", "expected a boolean");
    }
    rc.retrieval_enabled = run["retrieval_enabled"].get<bool>();
  }
  rc.planning_temperature =
      require_range(run, "planning_temperature", 0.2, 0.0, 1.0, "run.planning_temperature");
  rc.worker_temperature =
      require_range(run, "worker_temperature", 0.01, 0.0, 1.0, "run.worker_temperature");
  rc.max_output_tokens = static_cast<int>(
      require_int(run, "max_output_tokens", 4096, 1, "run.max_output_tokens"));
  if (run.contains("stop_sequences")) {
    if (!run["stop_sequences"].is_array()) {
      throw ConfigError("run.stop_sequences", "expected an array of strings");
    }
    for (const auto& s : run["stop_sequences"]) {
      if (!s.is_string()) throw ConfigError("run.stop_sequences", "expected strings");
      rc.stop_sequences.push_back(s.get<std::string>());
    }
  }
  rc.truncation_cap = static_cast<std::size_t>(
      require_int(run, "truncation_cap", 5000, 64, "run.truncation_cap"));
  rc.understand_chunk_chars = static_cast<std::size_t>(
      require_int(run, "understand_chunk_chars", 20000, 1, "run.understand_chunk_chars"));
  rc.retrieval_max_chars = static_cast<std::size_t>(
      require_int(run, "retrieval_max_chars", 60000, 64, "run.retrieval_max_chars"));
  if (run.contains("seed_label")) {
    if (!run["seed_label"].is_string()) throw ConfigError("run.seed_label", "expected a string");
    rc.seed_label = run["seed_label"].get<std::string>();
  }

  // engine credentials are kept out of subprocess environments
  bool all_scripted = true;
  for (const auto& tier : cc.tiers) {
    if (const auto* remote = std::get_if<RemoteEndpoint>(&tier.endpoint)) {
      rc.scrub_env.push_back(remote->api_key_env);
      all_scripted = false;
    }
  }
  rc.deterministic = all_scripted;

  // effective-config echo (scripted replies abbreviated to a count) and hash
  json echo_models = json::array();
  json full_models = json::array();
  for (const auto& tier : cc.tiers) {
    json base = {
        {"id", tier.id},
        {"tier_rank", tier.tier_rank},
        {"price_per_input_token", tier.price_per_input_token.to_string()},
        {"price_per_output_token", tier.price_per_output_token.to_string()},
        {"max_format_retries", tier.max_format_retries},
    };
    json full = base;
    if (const auto* scripted = std::get_if<ScriptedEndpoint>(&tier.endpoint)) {
      base["endpoint"] = {{"type", "scripted"},
                          {"replies", scripted->replies.size()},
                          {"chars_per_token", scripted->chars_per_token}};
      full["endpoint"] = {{"type", "scripted"},
                          {"replies", scripted->replies},
                          {"chars_per_token", scripted->chars_per_token}};
    } else {
      const auto& remote = std::get<RemoteEndpoint>(tier.endpoint);
      base["endpoint"] = {{"type", "remote"},
                          {"base_url", remote.base_url},
                          {"path", remote.path},
                          {"api_key_env", remote.api_key_env},
                          {"timeout_s", remote.timeout_s}};
      full["endpoint"] = base["endpoint"];
    }
    echo_models.push_back(std::move(base));
    full_models.push_back(std::move(full));
  }

  json run_echo = {
      {"max_actions", rc.max_actions},
      {"short_term_k", rc.short_term_k},
      {"retrieval_enabled", rc.retrieval_enabled},
      {"planning_temperature", rc.planning_temperature},
      {"worker_temperature", rc.worker_temperature},
      {"max_output_tokens", rc.max_output_tokens},
      {"stop_sequences", rc.stop_sequences},
      {"truncation_cap", rc.truncation_cap},
      {"understand_chunk_chars", rc.understand_chunk_chars},
      {"retrieval_max_chars", rc.retrieval_max_chars},
      {"seed_label", rc.seed_label},
  };
  json cascade_echo = {
      {"tiers", tier_ids},
      {"repeat_threshold", cc.repeat_threshold},
      {"lifeline_cap", cc.lifeline_cap},
      {"repeat_trigger", trigger},
  };

  config.echo = json{{"models", std::move(echo_models)},
                     {"cascade", cascade_echo},
                     {"run", run_echo}};
  const json full = json{{"models", std::move(full_models)},
                         {"cascade", std::move(cascade_echo)},
                         {"run", std::move(run_echo)}};
  // scripted replies are arbitrary model text; hash them byte-tolerantly
  config.config_hash =
      fnv1a_hex(full.dump(-1, ' ', false, json::error_handler_t::replace));
  return config;
}

EngineConfig load_engine_config(const fs::path& config_path) {
  std::ifstream in(config_path);
  if (!in.is_open()) {
    throw ConfigError("(file)", "cannot open config '" + config_path.string() + "'");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("(file)", "'" + config_path.string() + "' is not valid JSON");
  }
  return parse_engine_config(doc, config_path.parent_path());
}

}  // namespace weir
