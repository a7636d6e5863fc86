#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedcost/engine.hpp"
#include "fedcost/errors.hpp"
#include "fedcost/rng.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

struct Zone {
  ZoneId id;
  std::string instance_type;
};

struct PricePoint {
  SimTime effective_from = 0.0;
  Money spot_per_hour = 0.0;
};

// Piecewise-constant spot prices (left-inclusive breakpoints, first point at
// t=0) plus a flat on-demand rate.
struct PriceTrace {
  std::vector<PricePoint> points;
  Money on_demand_per_hour = 0.0;
};

struct ProvisioningJitter {
  enum class Kind { None, Uniform, LogNormal };
  Kind kind = Kind::None;
  double half_width_s = 0.0;  // Uniform: base + U[-hw, +hw]
  double mu = 0.0;            // LogNormal: base * exp(N(mu, sigma^2))
  double sigma = 0.0;
};

struct ProvisioningModel {
  double base_delay_s = 120.0;
  ProvisioningJitter jitter;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
};

struct PreemptionEventSpec {
  ZoneId zone;
  SimTime fire_at = 0.0;
};

struct PreemptionModel {
  enum class Kind { None, Poisson, Trace };
  Kind kind = Kind::None;
  double rate_per_hour = 0.0;               // Poisson, per running instance
  std::vector<PreemptionEventSpec> events;  // Trace
  std::optional<std::uint64_t> seed;
};

enum class InstanceState { Requested, Running, Terminated, Preempted };

inline const char* to_string(InstanceState s) {
  switch (s) {
    case InstanceState::Requested: return "requested";
    case InstanceState::Running: return "running";
    case InstanceState::Terminated: return "terminated";
    case InstanceState::Preempted: return "preempted";
  }
  return "unknown";
}

// The machine meters from the request: it is on (and billed) while it boots
// and prepares, before it can take work at ready_at.
struct Instance {
  InstanceId id = 0;
  ClientId client;
  ZoneId zone;
  PricingMode mode = PricingMode::Spot;
  InstanceState state = InstanceState::Requested;
  SimTime requested_at = 0.0;
  SimTime ready_at = 0.0;
  SimTime stopped_at = 0.0;
  double provision_delay_s = 0.0;

  bool alive() const {
    return state == InstanceState::Requested || state == InstanceState::Running;
  }
};

struct FinalAccrual {
  SimTime from = 0.0;
  SimTime to = 0.0;
  Money cost = 0.0;
};

// Zones, price traces, provisioning latency, preemption and billing — the
// environment the scheduling policies act against. Owned by the event loop;
// all mutation happens inside handlers.
class SpotMarket {
 public:
  SpotMarket(Engine& engine, std::vector<Zone> zones, std::map<ZoneId, PriceTrace> traces,
             ProvisioningModel provisioning, PreemptionModel preemption,
             std::uint64_t run_seed, double billing_increment_s = 1.0)
      : engine_(engine),
        traces_(std::move(traces)),
        provisioning_(provisioning),
        preemption_(preemption),
        provisioning_seed_(provisioning.seed.value_or(run_seed)),
        preemption_seed_(preemption.seed.value_or(run_seed)),
        billing_increment_s_(billing_increment_s) {
    for (auto& z : zones) {
      if (!zones_.emplace(z.id, z).second) throw ConfigError("duplicate zone id " + z.id);
      if (!traces_.count(z.id)) throw ConfigError("zone " + z.id + " has no price trace");
    }
    if (preemption_.kind == PreemptionModel::Kind::Trace) {
      for (const auto& ev : preemption_.events) {
        ZoneId zone = ev.zone;
        trace_tickets_.push_back(engine_.schedule(
            ev.fire_at, EventKind::Preemption, [this, zone] { preempt_zone(zone); }));
      }
    }
  }

  void set_preemption_handler(std::function<void(InstanceId)> fn) {
    preemption_handler_ = std::move(fn);
  }

  // --- prices ---

  Money price_at(const ZoneId& zone, SimTime t, PricingMode mode) const {
    const PriceTrace& trace = trace_of(zone);
    if (t < 0.0) throw SimError("price lookup at negative time");
    if (mode == PricingMode::OnDemand) return trace.on_demand_per_hour;
    Money price = trace.points.front().spot_per_hour;
    for (const auto& p : trace.points) {
      if (p.effective_from <= t) price = p.spot_per_hour;
      else break;
    }
    return price;
  }

  // Minimal spot price at t; ties go to the lexicographically smallest id.
  ZoneId cheapest_zone(SimTime t, const std::vector<ZoneId>& candidates) const {
    if (candidates.empty()) throw SimError("cheapest_zone: empty candidate set");
    const ZoneId* best = nullptr;
    Money best_price = 0.0;
    for (const ZoneId& z : candidates) {
      Money p = price_at(z, t, PricingMode::Spot);
      if (!best || p < best_price || (p == best_price && z < *best)) {
        best = &z;
        best_price = p;
      }
    }
    return *best;
  }

  // Invokes fn(from, to, rate) over the constant-rate pieces of [from, to].
  template <typename Fn>
  void for_each_rate_segment(const ZoneId& zone, PricingMode mode, SimTime from, SimTime to,
                             Fn&& fn) const {
    if (to < from) throw SimError("rate segment span ends before it starts");
    if (to == from) return;
    const PriceTrace& trace = trace_of(zone);
    if (mode == PricingMode::OnDemand) {
      fn(from, to, trace.on_demand_per_hour);
      return;
    }
    SimTime cursor = from;
    Money rate = price_at(zone, from, PricingMode::Spot);
    for (const auto& p : trace.points) {
      if (p.effective_from <= from) continue;
      if (p.effective_from >= to) break;
      fn(cursor, p.effective_from, rate);
      cursor = p.effective_from;
      rate = p.spot_per_hour;
    }
    fn(cursor, to, rate);
  }

  // --- instance lifecycle ---

  InstanceId request_instance(const ClientId& client, const ZoneId& zone, SimTime t,
                              PricingMode mode, std::function<void(InstanceId)> on_ready) {
    if (active_.count(client)) {
      throw SimError("client " + client + " already holds a requested or running instance");
    }
    if (!zones_.count(zone)) throw SimError("request in unknown zone " + zone);
    double delay = sample_provisioning_delay(client);
    InstanceId id = next_instance_id_++;
    Instance inst;
    inst.id = id;
    inst.client = client;
    inst.zone = zone;
    inst.mode = mode;
    inst.state = InstanceState::Requested;
    inst.requested_at = t;
    inst.ready_at = t + delay;
    inst.provision_delay_s = delay;
    instances_.emplace(id, inst);
    active_.emplace(client, id);
    ready_callbacks_.emplace(id, std::move(on_ready));
    tickets_[id].ready = engine_.schedule(t + delay, EventKind::InstanceReady,
                                          [this, id] { on_instance_ready(id); });
    if (preemption_.kind == PreemptionModel::Kind::Poisson && mode == PricingMode::Spot) {
      auto rng = RandomStream::derive(preemption_seed_, "preempt", id);
      SimTime at = t + rng.exponential(preemption_.rate_per_hour) * kSecondsPerHour;
      tickets_[id].preempt =
          engine_.schedule(at, EventKind::Preemption, [this, id] { maybe_preempt(id); });
    }
    return id;
  }

  // Stops the meter and returns the whole billed window for the ledger.
  // Sessions shorter than the billing increment bill the increment.
  FinalAccrual terminate_instance(InstanceId id, SimTime t) {
    Instance& inst = mutable_instance(id);
    if (inst.state == InstanceState::Terminated || inst.state == InstanceState::Preempted) {
      std::ostringstream os;
      os << "terminate on instance #" << id << " already in state " << to_string(inst.state);
      throw SimError(os.str());
    }
    if (t < inst.requested_at) throw SimError("terminate before the instance was requested");
    SimTime stop = t;
    double dur = t - inst.requested_at;
    if (dur > 0.0 && dur < billing_increment_s_) {
      stop = inst.requested_at + billing_increment_s_;
    }
    drop_tickets(id);
    if (inst.state == InstanceState::Requested) ready_callbacks_.erase(id);
    inst.state = InstanceState::Terminated;
    inst.stopped_at = stop;
    active_.erase(inst.client);
    return FinalAccrual{inst.requested_at, stop, accrue_cost(id, inst.requested_at, stop)};
  }

  // Prorated cost over [from, to]; the window must sit inside the billed
  // lifetime. Exactly additive under any partition of the window.
  Money accrue_cost(InstanceId id, SimTime from, SimTime to) const {
    const Instance& inst = instance(id);
    if (from > to) throw SimError("accrual window ends before it starts");
    SimTime limit = inst.alive() ? engine_.now() : inst.stopped_at;
    if (from < inst.requested_at - 1e-9 || to > limit + 1e-9) {
      std::ostringstream os;
      os << "accrual window [" << from << ", " << to << "] outside instance #" << id
         << " lifetime [" << inst.requested_at << ", " << limit << "]";
      throw SimError(os.str());
    }
    Money total = 0.0;
    for_each_rate_segment(inst.zone, inst.mode, from, to,
                          [&](SimTime a, SimTime b, Money rate) {
                            total += (b - a) / kSecondsPerHour * rate;
                          });
    return total;
  }

  const Instance& instance(InstanceId id) const {
    auto it = instances_.find(id);
    if (it == instances_.end()) throw SimError("unknown instance id");
    return it->second;
  }

  std::optional<InstanceId> active_instance(const ClientId& client) const {
    auto it = active_.find(client);
    if (it == active_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<InstanceId, Instance>& instances() const { return instances_; }

  // Drops market events that have not fired (run teardown).
  void cancel_pending() {
    for (auto& [id, t] : tickets_) {
      engine_.cancel(t.ready);
      engine_.cancel(t.preempt);
    }
    for (auto& t : trace_tickets_) engine_.cancel(t);
    trace_tickets_.clear();
  }

 private:
  struct Tickets {
    Engine::Ticket ready;
    Engine::Ticket preempt;
  };

  const PriceTrace& trace_of(const ZoneId& zone) const {
    auto it = traces_.find(zone);
    if (it == traces_.end()) throw SimError("unknown zone " + zone);
    return it->second;
  }

  Instance& mutable_instance(InstanceId id) {
    auto it = instances_.find(id);
    if (it == instances_.end()) throw SimError("unknown instance id");
    return it->second;
  }

  double sample_provisioning_delay(const ClientId& client) {
    std::uint64_t ordinal = request_ordinal_[client]++;
    auto rng = RandomStream::derive(provisioning_seed_, "provision", fnv1a64(client), ordinal);
    double delay = provisioning_.base_delay_s;
    switch (provisioning_.jitter.kind) {
      case ProvisioningJitter::Kind::None:
        break;
      case ProvisioningJitter::Kind::Uniform:
        delay += rng.uniform(-provisioning_.jitter.half_width_s, provisioning_.jitter.half_width_s);
        break;
      case ProvisioningJitter::Kind::LogNormal:
        delay *= std::exp(rng.normal(provisioning_.jitter.mu, provisioning_.jitter.sigma));
        break;
    }
    if (!(delay > 0.0)) throw SimError("sampled provisioning delay not positive");
    return delay;
  }

  void on_instance_ready(InstanceId id) {
    Instance& inst = mutable_instance(id);
    if (inst.state != InstanceState::Requested) return;  // raced with teardown
    inst.state = InstanceState::Running;
    auto cb = ready_callbacks_.find(id);
    if (cb != ready_callbacks_.end()) {
      auto fn = std::move(cb->second);
      ready_callbacks_.erase(cb);
      if (fn) fn(id);
    }
  }

  // Only running machines get reclaimed; one still provisioning at the
  // sampled instant survives.
  void maybe_preempt(InstanceId id) {
    Instance& inst = mutable_instance(id);
    if (inst.state != InstanceState::Running) return;
    do_preempt(inst);
  }

  void preempt_zone(const ZoneId& zone) {
    std::vector<InstanceId> victims;
    for (const auto& [id, inst] : instances_) {
      if (inst.zone == zone && inst.mode == PricingMode::Spot &&
          inst.state == InstanceState::Running) {
        victims.push_back(id);
      }
    }
    for (InstanceId id : victims) do_preempt(mutable_instance(id));
  }

  void do_preempt(Instance& inst) {
    drop_tickets(inst.id);
    inst.state = InstanceState::Preempted;
    inst.stopped_at = engine_.now();
    active_.erase(inst.client);
    if (preemption_handler_) preemption_handler_(inst.id);
  }

  void drop_tickets(InstanceId id) {
    auto it = tickets_.find(id);
    if (it == tickets_.end()) return;
    engine_.cancel(it->second.ready);
    engine_.cancel(it->second.preempt);
    tickets_.erase(it);
  }

  Engine& engine_;
  std::map<ZoneId, Zone> zones_;
  std::map<ZoneId, PriceTrace> traces_;
  ProvisioningModel provisioning_;
  PreemptionModel preemption_;
  std::uint64_t provisioning_seed_;
  std::uint64_t preemption_seed_;
  double billing_increment_s_;

  InstanceId next_instance_id_ = 1;
  std::map<InstanceId, Instance> instances_;
  std::map<ClientId, InstanceId> active_;
  std::map<InstanceId, std::function<void(InstanceId)>> ready_callbacks_;
  std::map<InstanceId, Tickets> tickets_;
  std::vector<Engine::Ticket> trace_tickets_;
  std::map<ClientId, std::uint64_t> request_ordinal_;
  std::function<void(InstanceId)> preemption_handler_;
};

}  // namespace fedcost
