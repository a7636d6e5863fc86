#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fedcost/scenario.hpp"

using namespace fedcost;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse_str(const std::string& text) {
  return parse_scenario_json(nlohmann::json::parse(text), fs::temp_directory_path());
}

std::string expect_config_error(const std::string& text) {
  try {
    parse_str(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({
  "rounds": 3,
  "clients": [{"id": "c1", "epoch_cold_s": 700, "epoch_warm_s": 600, "zones": ["z1"]}],
  "market": {"zones": [{"id": "z1", "on_demand_price_per_hour": 1.0,
                        "spot_trace": [{"at_s": 0, "price_per_hour": 0.4}]}]}
})";

fs::path temp_file(const std::string& name, const std::string& content) {
  fs::path dir = fs::temp_directory_path() / "fedcost-scenario-tests";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream f(p);
  f << content;
  return p;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("a minimal scenario parses with documented defaults") {
  ScenarioConfig cfg = parse_str(kMinimal);
  CHECK(cfg.name == "unnamed");
  CHECK(cfg.rounds == 3);
  CHECK(cfg.seed == 0);
  CHECK(cfg.policy.mode == PolicyMode::FedCostAware);
  CHECK(cfg.policy.ema_alpha == 0.3);
  CHECK(cfg.policy.t_threshold_s == 60.0);
  CHECK(cfg.policy.t_buffer_s == 30.0);
  CHECK(cfg.policy.transfer_latency_s == 0.0);
  CHECK(cfg.provisioning.base_delay_s == 120.0);
  CHECK(cfg.provisioning.jitter.kind == ProvisioningJitter::Kind::None);
  CHECK(cfg.preemption.kind == PreemptionModel::Kind::None);
  CHECK(cfg.clients.at(0).noise.kind == DurationNoise::Kind::None);
  CHECK(cfg.clients.at(0).checkpoint_interval_s == 300.0);
  CHECK_FALSE(cfg.clients.at(0).budget.has_value());
  CHECK(cfg.market.billing_increment_s == 1.0);
}

TEST_CASE("a spot price above on-demand is a config error") {
  std::string bad = R"({
    "rounds": 3,
    "clients": [{"id": "c1", "epoch_cold_s": 700, "epoch_warm_s": 600, "zones": ["z1"]}],
    "market": {"zones": [{"id": "z1", "on_demand_price_per_hour": 0.3,
                          "spot_trace": [{"at_s": 0, "price_per_hour": 0.4}]}]}
  })";
  std::string msg = expect_config_error(bad);
  CHECK(msg.find("z1") != std::string::npos);
  CHECK(msg.find("on-demand") != std::string::npos);
}

TEST_CASE("the cost-aware policy needs room for calibration") {
  std::string two_rounds(kMinimal);
  two_rounds.replace(two_rounds.find("\"rounds\": 3"), 11, "\"rounds\": 2");
  std::string msg = expect_config_error(two_rounds);
  CHECK(msg.find("rounds") != std::string::npos);

  // Baselines run fine with fewer rounds.
  nlohmann::json j = nlohmann::json::parse(two_rounds);
  j["policy"] = {{"mode", "plainspot"}};
  ScenarioConfig cfg = parse_scenario_json(j, fs::temp_directory_path());
  CHECK(cfg.rounds == 2);
}

TEST_CASE("field-level mistakes carry their field path") {
  nlohmann::json j = nlohmann::json::parse(kMinimal);

  SUBCASE("unknown top-level key") {
    j["surprise"] = 1;
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("unknown zone in client candidates") {
    j["clients"][0]["zones"] = {"mystery"};
    std::string msg;
    try {
      parse_scenario_json(j, ".");
    } catch (const ConfigError& e) {
      msg = e.what();
    }
    CHECK(msg.find("clients[0]") != std::string::npos);
    CHECK(msg.find("mystery") != std::string::npos);
  }
  SUBCASE("duplicate client ids") {
    j["clients"].push_back(j["clients"][0]);
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("warm epoch longer than cold") {
    j["clients"][0]["epoch_cold_s"] = 100.0;
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("spot trace must start at zero") {
    j["market"]["zones"][0]["spot_trace"] = {{{"at_s", 10.0}, {"price_per_hour", 0.4}}};
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("spot trace must ascend strictly") {
    j["market"]["zones"][0]["spot_trace"] = {{{"at_s", 0.0}, {"price_per_hour", 0.4}},
                                             {{"at_s", 0.0}, {"price_per_hour", 0.3}}};
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("uniform jitter wider than the base delay") {
    j["provisioning"] = {{"base_delay_s", 100.0},
                         {"jitter", {{"kind", "uniform"}, {"half_width_s", 150.0}}}};
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("ema alpha outside (0,1]") {
    j["policy"] = {{"ema_alpha", 0.0}};
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("negative budget") {
    j["clients"][0]["budget"] = -1.0;
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
  SUBCASE("preemption trace referencing an unknown zone") {
    j["preemption"] = {{"kind", "trace"},
                       {"events", {{{"zone", "nowhere"}, {"at_s", 100.0}}}}};
    CHECK_THROWS_AS(parse_scenario_json(j, "."), ConfigError);
  }
}

TEST_CASE("price traces load from csv and merge into the market") {
  std::string csv =
      "zone_id,effective_from_seconds,spot_price_per_hour,on_demand_price_per_hour\n"
      "zc,0,0.40,1.0\n"
      "zc,3600,0.30,1.0\n";
  fs::path csv_path = temp_file("prices.csv", csv);
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j["market"]["zones"].push_back({{"id", "zc"}});
  j["market"]["price_trace_csv"] = csv_path.filename().string();
  ScenarioConfig cfg = parse_scenario_json(j, csv_path.parent_path());
  REQUIRE(cfg.market.traces.count("zc") == 1);
  CHECK(cfg.market.traces.at("zc").points.size() == 2);
  CHECK(cfg.market.traces.at("zc").points[1].spot_per_hour == 0.30);
  CHECK(cfg.market.traces.at("zc").on_demand_per_hour == 1.0);
}

TEST_CASE("csv ingestion rejects malformed inputs") {
  std::istringstream bad_header("zone,when,spot,od\nz,0,0.4,1\n");
  CHECK_THROWS_AS(load_price_trace_csv(bad_header, "inline"), ConfigError);

  std::istringstream bad_number(
      "zone_id,effective_from_seconds,spot_price_per_hour,on_demand_price_per_hour\n"
      "z,0,abc,1\n");
  CHECK_THROWS_AS(load_price_trace_csv(bad_number, "inline"), ConfigError);

  std::istringstream inconsistent_od(
      "zone_id,effective_from_seconds,spot_price_per_hour,on_demand_price_per_hour\n"
      "z,0,0.4,1.0\nz,3600,0.3,2.0\n");
  CHECK_THROWS_AS(load_price_trace_csv(inconsistent_od, "inline"), ConfigError);
}

TEST_CASE("a zone priced both inline and by csv is ambiguous") {
  std::string csv =
      "zone_id,effective_from_seconds,spot_price_per_hour,on_demand_price_per_hour\n"
      "z1,0,0.40,1.0\n";
  fs::path csv_path = temp_file("dup.csv", csv);
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j["market"]["price_trace_csv"] = csv_path.filename().string();
  CHECK_THROWS_AS(parse_scenario_json(j, csv_path.parent_path()), ConfigError);
}

TEST_CASE("preemption events load from csv") {
  std::istringstream in("zone_id,fire_at_seconds\nz1,3613\nz1,9000.5\n");
  auto events = load_preemption_trace_csv(in, "inline");
  REQUIRE(events.size() == 2);
  CHECK(events[0].zone == "z1");
  CHECK(events[0].fire_at == 3613.0);
  CHECK(events[1].fire_at == 9000.5);
}

TEST_CASE("the digest pins the scenario but not the policy mode") {
  ScenarioConfig a = parse_str(kMinimal);
  ScenarioConfig b = parse_str(kMinimal);
  CHECK(config_digest(a) == config_digest(b));

  b.policy.mode = PolicyMode::OnDemand;
  CHECK(config_digest(a) == config_digest(b));  // mode excluded by design

  b.seed = 99;
  CHECK(config_digest(a) != config_digest(b));

  ScenarioConfig c = parse_str(kMinimal);
  c.market.traces.at("z1").points[0].spot_per_hour = 0.41;
  CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("parse_scenario_file reports missing files and bad json") {
  CHECK_THROWS_AS(parse_scenario_file("/nonexistent/path.json"), ConfigError);
  fs::path p = temp_file("broken.json", "{ not json");
  CHECK_THROWS_AS(parse_scenario_file(p.string()), ConfigError);
}

TEST_CASE("bundled scenarios parse and carry the expected shapes") {
  ScenarioConfig isic = parse_scenario_file(std::string(FEDCOST_SCENARIO_DIR) +
                                            "/fed-isic-like.json");
  CHECK(isic.clients.size() == 6);
  CHECK(isic.rounds == 20);
  CHECK(isic.market.traces.at("us-east-1a").points.front().spot_per_hour == 0.3951);
  CHECK(isic.market.traces.at("us-east-1a").on_demand_per_hour == 1.0080);

  ScenarioConfig mnist = parse_scenario_file(std::string(FEDCOST_SCENARIO_DIR) +
                                             "/mnist-like.json");
  CHECK(mnist.clients.size() == 3);
  CHECK(mnist.rounds == 10);
  CHECK(mnist.market.traces.at("us-east-1a").points.front().spot_per_hour == 0.3937);
  CHECK(mnist.market.traces.at("us-east-1a").on_demand_per_hour == 1.0060);
}

}  // TEST_SUITE("scenario")
