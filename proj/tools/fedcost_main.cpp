#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedcost/orchestrator.hpp"
#include "fedcost/report.hpp"
#include "fedcost/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fedcost;

struct RunArgs {
  std::string config_path;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

struct CompareArgs {
  std::vector<std::string> summaries;
  std::string out_path;
};

int do_run(const RunArgs& args) {
  ScenarioConfig cfg = parse_scenario_file(args.config_path);
  std::optional<PolicyMode> override;
  if (!args.policy.empty()) {
    override = policy_mode_from_string(args.policy);
    if (!override) throw ConfigError("unknown policy '" + args.policy + "'");
  }
  if (args.seed) cfg.seed = *args.seed;

  fs::path out = !args.out_dir.empty() ? fs::path(args.out_dir)
                 : cfg.outputs_dir     ? fs::path(*cfg.outputs_dir)
                                       : fs::path("out");
  fs::create_directories(out);

  Engine engine;
  Orchestrator orch(engine, cfg, override);
  RunResult result = orch.run();

  std::string policy_name = to_string(result.policy);
  fs::path timeline = out / ("timeline_" + policy_name + ".csv");
  fs::path summary = out / ("summary_" + policy_name + ".json");
  orch.ledger().export_timeline_csv(timeline.string());
  write_json_file(run_summary_json(result), summary.string());

  std::cout << "scenario=" << result.scenario_name << " policy=" << policy_name
            << " rounds=" << result.rounds_completed << "/" << result.rounds_configured
            << " final_time_s=" << round6(result.final_time)
            << " total_cost=" << round6(result.total_cost) << '\n';
  for (const auto& w : orch.warnings()) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << timeline.string() << '\n';
  std::cout << "wrote " << summary.string() << '\n';
  return 0;
}

int do_validate(const std::string& config_path) {
  ScenarioConfig cfg = parse_scenario_file(config_path);
  std::cout << "ok name=" << cfg.name << " clients=" << cfg.clients.size()
            << " rounds=" << cfg.rounds << " digest=" << config_digest(cfg) << '\n';
  return 0;
}

int do_compare(const CompareArgs& args) {
  std::vector<nlohmann::json> summaries;
  summaries.reserve(args.summaries.size());
  for (const auto& path : args.summaries) summaries.push_back(load_json_file(path));
  nlohmann::json cmp = comparison_json(summaries);
  std::cout << comparison_table(cmp);
  if (!args.out_path.empty()) {
    write_json_file(cmp, args.out_path);
    std::cout << "wrote " << args.out_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware synchronous federated-learning scheduling simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario under one policy");
  run_cmd->add_option("--config", run_args.config_path, "Scenario file (JSON)")->required();
  run_cmd->add_option("--policy", run_args.policy,
                      "fedcostaware|plainspot|ondemand (default: scenario setting)");
  run_cmd->add_option("--seed", run_args.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run_args.out_dir,
                      "Output directory (default: scenario 'outputs' or ./out)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a scenario file");
  validate_cmd->add_option("--config", validate_path, "Scenario file (JSON)")->required();

  CompareArgs cmp_args;
  auto* compare_cmd = app.add_subcommand("compare", "Compare run summaries of one scenario");
  compare_cmd->add_option("summaries", cmp_args.summaries, "Run summary files")->expected(-1);
  compare_cmd->add_option("--out", cmp_args.out_path, "Write the comparison JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_args);
    if (validate_cmd->parsed()) return do_validate(validate_path);
    if (compare_cmd->parsed()) return do_compare(cmp_args);
  } catch (const fedcost::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fedcost::SimError& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
