#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "weir/config.hpp"
#include "weir/errors.hpp"

using namespace weir;
using namespace weir::testing;
using nlohmann::json;

namespace {

json scripted_entry(const std::string& id) {
  return json{{"id", id},
              {"endpoint", {{"type", "scripted"}, {"replies", json::array()}}}};
}

}  // namespace

TEST_CASE("a models-only config yields the shipped defaults") {
  const json doc = {{"models", json::array({scripted_entry("a"), scripted_entry("b")})}};
  const EngineConfig config = parse_engine_config(doc, ".");

  CHECK(config.run.max_actions == 30);
  CHECK(config.run.short_term_k == 3);
  CHECK(config.run.cascade.repeat_threshold == 3);
  CHECK(config.run.cascade.lifeline_cap == 5);
  CHECK(config.run.planning_temperature == 0.2);
  CHECK(config.run.worker_temperature == 0.01);
  CHECK(config.run.retrieval_enabled);
  CHECK(config.run.max_output_tokens == 4096);
  CHECK(config.run.cascade.repeat_trigger == RepeatTrigger::before_r);

  // tiers default to the declared model order; retry defaults 3 then 1
  REQUIRE(config.run.cascade.tiers.size() == 2);
  CHECK(config.run.cascade.tiers[0].id == "a");
  CHECK(config.run.cascade.tiers[0].tier_rank == 0);
  CHECK(config.run.cascade.tiers[0].max_format_retries == 3);
  CHECK(config.run.cascade.tiers[1].max_format_retries == 1);
  CHECK(config.run.cascade.expert_tier_index == 1);
  CHECK(config.run.deterministic);

  // explicit retries win over positional defaults
  json explicit_doc = doc;
  explicit_doc["models"][1]["max_format_retries"] = 4;
  CHECK(parse_engine_config(explicit_doc, ".").run.cascade.tiers[1].max_format_retries == 4);
}

TEST_CASE("config errors carry precise field paths") {
  auto path_of = [](const json& doc) {
    try {
      parse_engine_config(doc, ".");
      return std::string("(no error)");
    } catch (const ConfigError& e) {
      return e.path;
    }
  };

  CHECK(path_of(json::object()) == "models");
  CHECK(path_of({{"models", json::array({json{{"endpoint", {{"type", "scripted"}}}}})}}) ==
        "models[0].id");
  CHECK(path_of({{"models", json::array({scripted_entry("a"), scripted_entry("a")})}}) ==
        "models[1].id");

  json bad_tier = {{"models", json::array({scripted_entry("a")})},
                   {"cascade", {{"tiers", json::array({"ghost"})}}}};
  CHECK(path_of(bad_tier) == "cascade.tiers[0]");

  json bad_trigger = {{"models", json::array({scripted_entry("a")})},
                      {"cascade", {{"repeat_trigger", "sometimes"}}}};
  CHECK(path_of(bad_trigger) == "cascade.repeat_trigger");

  json bad_temp = {{"models", json::array({scripted_entry("a")})},
                   {"run", {{"planning_temperature", 1.5}}}};
  CHECK(path_of(bad_temp) == "run.planning_temperature");

  json bad_r = {{"models", json::array({scripted_entry("a")})},
                {"cascade", {{"repeat_threshold", 1}}}};
  CHECK(path_of(bad_r) == "cascade.repeat_threshold");

  json no_endpoint = {{"models", json::array({json{{"id", "x"}}})}};
  CHECK(path_of(no_endpoint) == "models[0].endpoint.type");

  // a remote model with no pricing anywhere is rejected
  json remote = {{"models", json::array({json{
                     {"id", "gpt"},
                     {"endpoint", {{"type", "remote"}, {"base_url", "https://x"}}}}})}};
  CHECK(path_of(remote) == "models[0]");
}

TEST_CASE("tier price ordering is validated") {
  json doc = {{"models",
               json::array({json{{"id", "pricey"},
                                 {"price_per_input_token", "0.00001"},
                                 {"price_per_output_token", "0.00003"},
                                 {"endpoint", {{"type", "scripted"}, {"replies", json::array()}}}},
                            scripted_entry("free")})}};
  // declared order puts the expensive model first: rejected
  CHECK_THROWS_AS(parse_engine_config(doc, "."), ConfigError);

  doc["cascade"] = {{"tiers", json::array({"free", "pricey"})}};
  const EngineConfig config = parse_engine_config(doc, ".");
  CHECK(config.run.cascade.tiers[0].id == "free");
}

TEST_CASE("pricing file supplies prices by model id") {
  TempDir dir("pricing");
  write_file(dir.path / "prices.json",
             json{{"gpt", {{"price_per_input_token", "0.00001"},
                           {"price_per_output_token", "0.00003"}}}}
                 .dump());
  const json doc = {
      {"pricing_file", "prices.json"},
      {"models", json::array({json{
           {"id", "gpt"}, {"endpoint", {{"type", "remote"}, {"base_url", "https://x"}}}}})}};
  const EngineConfig config = parse_engine_config(doc, dir.path);
  CHECK(config.models[0].price_per_input_token == TokenPrice::parse("0.00001"));
  CHECK(config.models[0].price_per_output_token == TokenPrice::parse("0.00003"));
  CHECK_FALSE(config.run.deterministic);  // remote tier present
}

TEST_CASE("remote endpoints derive credential env vars and scrub them") {
  const json doc = {
      {"models",
       json::array({json{{"id", "my-model.v2"},
                         {"price_per_input_token", "0"},
                         {"price_per_output_token", "0"},
                         {"endpoint", {{"type", "remote"}, {"base_url", "https://x"}}}}})}};
  const EngineConfig config = parse_engine_config(doc, ".");
  const auto& remote = std::get<RemoteEndpoint>(config.models[0].endpoint);
  CHECK(remote.api_key_env == "WEIR_API_KEY_MY_MODEL_V2");
  REQUIRE(config.run.scrub_env.size() == 1);
  CHECK(config.run.scrub_env[0] == "WEIR_API_KEY_MY_MODEL_V2");

  json named = doc;
  named["models"][0]["endpoint"]["api_key_env"] = "MY_KEY";
  CHECK(std::get<RemoteEndpoint>(parse_engine_config(named, ".").models[0].endpoint).api_key_env ==
        "MY_KEY");
}

TEST_CASE("config hash is stable and sensitive to scripted content") {
  json doc = {{"models", json::array({json{
                   {"id", "a"},
                   {"endpoint",
                    {{"type", "scripted"}, {"replies", json::array({"hello"})}}}}})}};
  const std::string h1 = parse_engine_config(doc, ".").config_hash;
  const std::string h2 = parse_engine_config(doc, ".").config_hash;
  CHECK(h1 == h2);
  CHECK(h1.size() == 16);

  doc["models"][0]["endpoint"]["replies"][0] = "different";
  CHECK(parse_engine_config(doc, ".").config_hash != h1);

  doc["run"]["max_actions"] = 7;
  const EngineConfig overridden = parse_engine_config(doc, ".");
  CHECK(overridden.run.max_actions == 7);
  CHECK(overridden.echo["run"]["max_actions"] == 7);  // effective config echoed
}

TEST_CASE("the shipped configs parse") {
  const EngineConfig golden = load_engine_config(source_dir() / "configs/golden-scripted.json");
  CHECK(golden.run.deterministic);
  CHECK(golden.run.cascade.tiers.size() == 2);

  const EngineConfig remote = load_engine_config(source_dir() / "configs/default.json");
  CHECK_FALSE(remote.run.deterministic);
  CHECK(remote.run.cascade.tiers[1].id == "gpt-4-0125-preview");
  CHECK(remote.run.cascade.tiers[1].price_per_input_token == TokenPrice::parse("0.00001"));
  CHECK(remote.run.cascade.tiers[1].max_format_retries == 1);
}

TEST_CASE("at_r selects the alternate repeat reading") {
  json doc = {{"models", json::array({scripted_entry("a")})},
              {"cascade", {{"repeat_trigger", "at_r"}}}};
  CHECK(parse_engine_config(doc, ".").run.cascade.repeat_trigger == RepeatTrigger::at_r);
}
