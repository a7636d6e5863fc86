#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcost/errors.hpp"
#include "fedcost/ledger.hpp"
#include "fedcost/orchestrator.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

inline constexpr const char* kSummaryFormat = "fedcost-summary-v1";
inline constexpr const char* kComparisonFormat = "fedcost-comparison-v1";

// Machine-readable single-run summary: totals, per-client spend vs budget,
// seed and config digest for reproducibility.
inline nlohmann::json run_summary_json(const RunResult& r) {
  nlohmann::json j;
  j["format"] = kSummaryFormat;
  j["scenario"] = r.scenario_name;
  j["policy"] = to_string(r.policy);
  j["seed"] = r.seed;
  j["config_digest"] = r.config_digest;
  j["rounds_configured"] = r.rounds_configured;
  j["rounds_completed"] = r.rounds_completed;
  j["final_time_s"] = round6(r.final_time);
  j["total_cost"] = round6(r.total_cost);
  j["calibration_cost"] = round6(r.calibration_cost);
  j["post_calibration_cost"] = round6(r.total_cost - r.calibration_cost);
  for (const auto& [id, out] : r.clients) {
    nlohmann::json cj;
    cj["spent"] = round6(out.spent);
    if (out.budget) cj["budget"] = round6(*out.budget);
    else cj["budget"] = nullptr;
    if (out.excluded_at_round) cj["excluded_at_round"] = *out.excluded_at_round;
    else cj["excluded_at_round"] = nullptr;
    cj["terminations"] = out.terminations;
    for (Money v : out.cumulative_by_round) {
      cj["cumulative_cost_by_round"].push_back(round6(v));
    }
    j["clients"][id] = std::move(cj);
  }
  return j;
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(2) << '\n';
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Merges per-policy summaries of one scenario into a comparison. Savings are
// computed against the on-demand row when present; fedcostaware additionally
// reports its saving over plainspot.
inline nlohmann::json comparison_json(const std::vector<nlohmann::json>& summaries) {
  if (summaries.size() < 2) {
    throw ConfigError("compare needs at least two run summaries");
  }
  std::string digest;
  std::string scenario;
  std::map<std::string, Money> totals;
  nlohmann::json per_policy;
  for (const auto& s : summaries) {
    if (!s.is_object() || s.value("format", "") != kSummaryFormat) {
      throw ConfigError("compare: input is not a run summary");
    }
    std::string d = s.at("config_digest").get<std::string>();
    if (digest.empty()) {
      digest = d;
      scenario = s.at("scenario").get<std::string>();
    } else if (d != digest) {
      throw ConfigError("compare: scenario digest mismatch (" + digest + " vs " + d + ")");
    }
    std::string policy = s.at("policy").get<std::string>();
    if (totals.count(policy)) throw ConfigError("compare: duplicate policy " + policy);
    totals[policy] = s.at("total_cost").get<Money>();
    per_policy[policy] = {{"total_cost", s.at("total_cost")},
                          {"calibration_cost", s.at("calibration_cost")},
                          {"rounds_completed", s.at("rounds_completed")},
                          {"final_time_s", s.at("final_time_s")}};
  }

  nlohmann::json j;
  j["format"] = kComparisonFormat;
  j["scenario"] = scenario;
  j["config_digest"] = digest;
  j["seed"] = summaries.front().at("seed");
  j["policies"] = std::move(per_policy);
  if (auto od = totals.find("ondemand"); od != totals.end()) {
    for (const auto& [policy, cost] : totals) {
      if (policy == "ondemand") continue;
      j["savings_vs_ondemand_pct"][policy] = round6(savings_percent(cost, od->second));
    }
  }
  if (totals.count("fedcostaware") && totals.count("plainspot")) {
    j["savings_vs_plainspot_pct"]["fedcostaware"] =
        round6(savings_percent(totals.at("fedcostaware"), totals.at("plainspot")));
  }
  return j;
}

// Fixed-order text rendering of a comparison, one row per policy.
inline std::string comparison_table(const nlohmann::json& cmp) {
  std::ostringstream os;
  os << "scenario: " << cmp.at("scenario").get<std::string>() << "  (digest "
     << cmp.at("config_digest").get<std::string>() << ")\n";
  os << std::left << std::setw(16) << "policy" << std::right << std::setw(14) << "total_cost"
     << std::setw(22) << "savings_vs_ondemand" << '\n';
  for (const char* policy : {"fedcostaware", "plainspot", "ondemand"}) {
    if (!cmp.at("policies").contains(policy)) continue;
    os << std::left << std::setw(16) << policy << std::right << std::setw(14) << std::fixed
       << std::setprecision(6) << cmp.at("policies").at(policy).at("total_cost").get<double>();
    if (cmp.contains("savings_vs_ondemand_pct") &&
        cmp.at("savings_vs_ondemand_pct").contains(policy)) {
      std::ostringstream pct;
      pct << std::fixed << std::setprecision(4)
          << cmp.at("savings_vs_ondemand_pct").at(policy).get<double>() << " %";
      os << std::setw(22) << pct.str();
    } else {
      os << std::setw(22) << "-";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace fedcost
