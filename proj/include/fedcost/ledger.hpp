#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedcost/errors.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

enum class IntervalState { SpinUp, TrainingCold, TrainingWarm, Idle, Saved, Recovery };

inline const char* to_string(IntervalState s) {
  switch (s) {
    case IntervalState::SpinUp: return "spinup";
    case IntervalState::TrainingCold: return "training_cold";
    case IntervalState::TrainingWarm: return "training_warm";
    case IntervalState::Idle: return "idle";
    case IntervalState::Saved: return "saved";
    case IntervalState::Recovery: return "recovery";
  }
  return "unknown";
}

// One client-state span at one rate; the atom of cost accounting.
struct TimelineInterval {
  ClientId client;
  int round = 0;
  IntervalState state{};
  SimTime start = 0.0;
  SimTime end = 0.0;
  Money rate_per_hour = 0.0;
  Money cost = 0.0;
};

// Append-only cost log with running totals. Intervals must arrive
// time-ordered per client and may not overlap; zero-length spans are dropped.
class Ledger {
 public:
  void record(const ClientId& client, int round, IntervalState state, SimTime start,
              SimTime end, Money rate_per_hour) {
    if (end < start) throw SimError("ledger: interval ends before it starts");
    if (state == IntervalState::Saved && rate_per_hour != 0.0) {
      throw SimError("ledger: saved span carries a nonzero rate");
    }
    if (end == start) return;
    auto it = last_end_.find(client);
    if (it != last_end_.end() && start < it->second - 1e-9) {
      std::ostringstream os;
      os << "ledger: overlapping interval for " << client << " starting at t=" << start
         << " (previous span ends at t=" << it->second << ")";
      throw SimError(os.str());
    }
    Money cost = (end - start) / kSecondsPerHour * rate_per_hour;
    intervals_.push_back({client, round, state, start, end, rate_per_hour, cost});
    last_end_[client] = end;
    per_client_[client] += cost;
    total_ += cost;
  }

  Money total_cost() const { return total_; }

  Money client_cost(const ClientId& client) const {
    auto it = per_client_.find(client);
    return it == per_client_.end() ? 0.0 : it->second;
  }

  Money cost_through_round(int last_round) const {
    Money sum = 0.0;
    for (const auto& iv : intervals_) {
      if (iv.round <= last_round) sum += iv.cost;
    }
    return sum;
  }

  const std::vector<TimelineInterval>& intervals() const { return intervals_; }

  void export_timeline_csv(std::ostream& os) const {
    std::vector<const TimelineInterval*> rows;
    rows.reserve(intervals_.size());
    for (const auto& iv : intervals_) rows.push_back(&iv);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
      if (a->client != b->client) return a->client < b->client;
      return a->start < b->start;
    });
    os << "client_id,round,state,start_s,end_s,rate_per_hr,cost\n";
    os << std::fixed << std::setprecision(6);
    for (const auto* iv : rows) {
      os << iv->client << ',' << iv->round << ',' << to_string(iv->state) << ',' << iv->start
         << ',' << iv->end << ',' << iv->rate_per_hour << ',' << iv->cost << '\n';
    }
  }

  void export_timeline_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write timeline to " + path);
    export_timeline_csv(f);
  }

 private:
  std::vector<TimelineInterval> intervals_;
  std::map<ClientId, SimTime> last_end_;
  std::map<ClientId, Money> per_client_;
  Money total_ = 0.0;
};

// Relative saving of a policy against a baseline, in percent.
inline Money savings_percent(Money policy_cost, Money baseline_cost) {
  if (!(baseline_cost > 0.0)) {
    throw ConfigError("savings undefined against a non-positive baseline cost");
  }
  return (baseline_cost - policy_cost) / baseline_cost * 100.0;
}

}  // namespace fedcost
