#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "fedcost/engine.hpp"
#include "fedcost/errors.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

enum class PolicyMode { FedCostAware, PlainSpot, OnDemand };

inline const char* to_string(PolicyMode m) {
  switch (m) {
    case PolicyMode::FedCostAware: return "fedcostaware";
    case PolicyMode::PlainSpot: return "plainspot";
    case PolicyMode::OnDemand: return "ondemand";
  }
  return "unknown";
}

inline std::optional<PolicyMode> policy_mode_from_string(const std::string& s) {
  if (s == "fedcostaware") return PolicyMode::FedCostAware;
  if (s == "plainspot") return PolicyMode::PlainSpot;
  if (s == "ondemand") return PolicyMode::OnDemand;
  return std::nullopt;
}

struct PolicyParams {
  PolicyMode mode = PolicyMode::FedCostAware;
  double ema_alpha = 0.3;           // smoothing factor for runtime estimates
  double t_threshold_s = 60.0;      // minimum net saving that justifies a termination
  double t_buffer_s = 30.0;         // pre-warm safety margin
  double transfer_latency_s = 0.0;  // per-round model exchange time
  double resume_overhead = 1.0;     // extra scale on work replayed after a preemption
};

inline double ema(double alpha, double old_value, double observed) {
  return alpha * observed + (1.0 - alpha) * old_value;
}

struct ClientEstimates {
  std::optional<double> epoch_cold_s;
  std::optional<double> epoch_warm_s;
  std::optional<double> spin_up_s;
  bool calibrated() const { return epoch_cold_s && epoch_warm_s && spin_up_s; }
};

// Per-client runtime estimates. Round 1 seeds the cold-epoch and spin-up
// values, round 2 the warm value; later observations fold in by EMA.
class EstimateBook {
 public:
  explicit EstimateBook(double ema_alpha = 0.3) : alpha_(ema_alpha) {}

  void record_cold_calibration(const ClientId& client, double total_s, double execution_s) {
    if (execution_s <= 0.0 || total_s < execution_s) {
      throw SimError("calibration: inconsistent cold observation for " + client);
    }
    auto& e = map_[client];
    e.epoch_cold_s = execution_s;
    e.spin_up_s = total_s - execution_s;
  }

  void record_warm_calibration(const ClientId& client, double execution_s) {
    auto it = map_.find(client);
    if (it == map_.end() || !it->second.epoch_cold_s) {
      throw SimError("calibration: warm observation before cold for " + client);
    }
    if (execution_s <= 0.0) throw SimError("calibration: non-positive warm observation for " + client);
    it->second.epoch_warm_s = execution_s;
  }

  bool calibrated(const ClientId& client) const {
    auto it = map_.find(client);
    return it != map_.end() && it->second.calibrated();
  }

  void update_epoch(const ClientId& client, double observed_execution_s, StartKind kind) {
    auto& e = checked(client);
    if (kind == StartKind::Cold) {
      e.epoch_cold_s = ema(alpha_, *e.epoch_cold_s, observed_execution_s);
    } else {
      e.epoch_warm_s = ema(alpha_, *e.epoch_warm_s, observed_execution_s);
    }
  }

  void update_spin_up(const ClientId& client, double observed_s) {
    auto& e = checked(client);
    e.spin_up_s = ema(alpha_, *e.spin_up_s, observed_s);
  }

  // Full post-round refresh: epoch EMA always; spin-up EMA only when a fresh
  // instance had to come up for this result, otherwise that estimate stays.
  void update(const ClientId& client, double observed_execution_s, StartKind kind,
              std::optional<double> observed_spin_up_s) {
    update_epoch(client, observed_execution_s, kind);
    if (observed_spin_up_s) update_spin_up(client, *observed_spin_up_s);
  }

  double epoch_cold(const ClientId& client) const { return *checked_const(client).epoch_cold_s; }
  double epoch_warm(const ClientId& client) const { return *checked_const(client).epoch_warm_s; }
  double spin_up(const ClientId& client) const { return *checked_const(client).spin_up_s; }

  const ClientEstimates* find(const ClientId& client) const {
    auto it = map_.find(client);
    return it == map_.end() ? nullptr : &it->second;
  }

  double alpha() const { return alpha_; }

 private:
  ClientEstimates& checked(const ClientId& client) {
    auto it = map_.find(client);
    if (it == map_.end() || !it->second.calibrated()) {
      throw SimError("estimates not calibrated for " + client);
    }
    return it->second;
  }
  const ClientEstimates& checked_const(const ClientId& client) const {
    auto it = map_.find(client);
    if (it == map_.end() || !it->second.calibrated()) {
      throw SimError("estimates not calibrated for " + client);
    }
    return it->second;
  }

  double alpha_;
  std::map<ClientId, ClientEstimates> map_;
};

// Where a client's current-round pipeline started and whether it includes a
// fresh spin-up. For cold clients start_time is the instance request time;
// for warm clients the task dispatch time.
struct RoundClientInfo {
  SimTime start_time = 0.0;
  bool cold_start = false;
  std::optional<SimTime> finish_override;  // recovery estimate after a preemption
};

inline SimTime expected_finish(const ClientId& client, const RoundClientInfo& info,
                               const EstimateBook& book) {
  if (info.finish_override) return *info.finish_override;
  if (info.cold_start) return info.start_time + book.spin_up(client) + book.epoch_cold(client);
  return info.start_time + book.epoch_warm(client);
}

inline SimTime estimate_slowest_finish_time(
    const std::map<ClientId, RoundClientInfo>& round_clients, const EstimateBook& book) {
  if (round_clients.empty()) throw SimError("slowest-finish estimate over an empty round");
  SimTime slowest = -std::numeric_limits<SimTime>::infinity();
  for (const auto& [client, info] : round_clients) {
    slowest = std::max(slowest, expected_finish(client, info, book));
  }
  return slowest;
}

struct TerminationDecision {
  bool terminate = false;
  SimTime prewarm_start_time = 0.0;  // meaningful when terminate is true
  SimTime slowest_finish = 0.0;
  double idle_s = 0.0;
};

// Terminate when the predicted idle window pays for the respin and then some:
// (F_s - F_i) - spin_up > threshold. The slowest client has zero idle and is
// always kept.
inline TerminationDecision evaluate_termination(
    const ClientId& client, SimTime finish_time,
    const std::map<ClientId, RoundClientInfo>& round_clients, const PolicyParams& params,
    const EstimateBook& book) {
  TerminationDecision d;
  d.slowest_finish = estimate_slowest_finish_time(round_clients, book);
  d.idle_s = d.slowest_finish - finish_time;
  double spin_up = book.spin_up(client);
  d.terminate = d.idle_s - spin_up > params.t_threshold_s;
  d.prewarm_start_time = d.slowest_finish - spin_up - params.t_buffer_s;
  return d;
}

// Rescheduled pre-warm after a mid-round preemption pushed the barrier out.
inline SimTime adjusted_prewarm_time(SimTime original_slowest_finish, SimTime recovery_finish,
                                     double est_spin_up_s, double buffer_s) {
  return std::max(original_slowest_finish, recovery_finish) - est_spin_up_s - buffer_s;
}

// Pre-round cost estimate. Spin-up is charged only when the instance is not
// up yet; before calibration there is nothing to estimate with, so 0.
inline Money estimate_round_cost(bool cold_epoch, bool needs_spin_up,
                                 const ClientEstimates& est, Money spot_price_per_hour) {
  if (!est.calibrated()) return 0.0;
  double seconds = (cold_epoch ? *est.epoch_cold_s : *est.epoch_warm_s) +
                   (needs_spin_up ? *est.spin_up_s : 0.0);
  return seconds / kSecondsPerHour * spot_price_per_hour;
}

struct BudgetDecision {
  bool participate = true;
  Money estimated_cost = 0.0;
};

inline BudgetDecision check_budget(const std::optional<Money>& budget, Money spent,
                                   Money estimated_round_cost) {
  BudgetDecision d;
  d.estimated_cost = estimated_round_cost;
  d.participate = !budget || spent + estimated_round_cost <= *budget;
  return d;
}

// Pending proactive restarts, keyed by client. Each entry owns a live,
// cancellable engine ticket; at most one entry per client.
class PreWarmQueue {
 public:
  struct Entry {
    SimTime spin_up_start_time = 0.0;
    Engine::Ticket ticket;
  };

  void add(const ClientId& client, Entry entry) {
    if (entries_.count(client)) throw SimError("prewarm queue already holds " + client);
    entries_.emplace(client, entry);
  }

  std::optional<Entry> take(const ClientId& client) {
    auto it = entries_.find(client);
    if (it == entries_.end()) return std::nullopt;
    Entry e = it->second;
    entries_.erase(it);
    return e;
  }

  bool contains(const ClientId& client) const { return entries_.count(client) > 0; }
  std::size_t size() const { return entries_.size(); }
  std::map<ClientId, Entry>& entries() { return entries_; }
  const std::map<ClientId, Entry>& entries() const { return entries_; }

 private:
  std::map<ClientId, Entry> entries_;
};

}  // namespace fedcost
