#pragma once

// Analytic replay of a deterministic cost-aware run (noise none, jitter none,
// preemption none, unlimited budgets). Computes billed windows round by round
// with plain arithmetic, no event queue, so it serves as an independent
// oracle for the event-driven simulator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fedcost/scenario.hpp"

namespace closed_form {

using namespace fedcost;

struct Result {
  Money total_cost = 0.0;
  std::map<ClientId, Money> per_client;
  std::vector<double> barriers;  // barriers[r-1] = barrier of round r
  // Readiness bookkeeping for the pre-warm punctuality check.
  bool prewarm_always_punctual = true;  // ready at or before the round barrier
  bool zero_round_start_delay = true;   // cold epochs start right at the round start
};

inline Money spot_price(const ScenarioConfig& cfg, const ZoneId& zone, double t) {
  const PriceTrace& trace = cfg.market.traces.at(zone);
  Money price = trace.points.front().spot_per_hour;
  for (const auto& p : trace.points) {
    if (p.effective_from <= t) price = p.spot_per_hour;
    else break;
  }
  return price;
}

inline ZoneId cheapest(const ScenarioConfig& cfg, const std::vector<ZoneId>& zones, double t) {
  const ZoneId* best = nullptr;
  Money best_price = 0.0;
  for (const auto& z : zones) {
    Money p = spot_price(cfg, z, t);
    if (!best || p < best_price || (p == best_price && z < *best)) {
      best = &z;
      best_price = p;
    }
  }
  return *best;
}

inline Money span_cost(const ScenarioConfig& cfg, const ZoneId& zone, double a, double b) {
  const PriceTrace& trace = cfg.market.traces.at(zone);
  Money cost = 0.0;
  double cursor = a;
  Money rate = spot_price(cfg, zone, a);
  for (const auto& p : trace.points) {
    if (p.effective_from <= a) continue;
    if (p.effective_from >= b) break;
    cost += (p.effective_from - cursor) / kSecondsPerHour * rate;
    cursor = p.effective_from;
    rate = p.spot_per_hour;
  }
  cost += (b - cursor) / kSecondsPerHour * rate;
  return cost;
}

inline Result replay_fedcostaware(const ScenarioConfig& cfg) {
  const double spin = cfg.provisioning.base_delay_s;
  const double threshold = cfg.policy.t_threshold_s;
  const double buffer = cfg.policy.t_buffer_s;
  const int rounds = cfg.rounds;

  struct Client {
    const ClientProfile* profile;
    double est_spin = 0.0;  // calibration computes total - execution
    double cold = 0.0, warm = 0.0;
    bool cold_this_round = false;
    double request_time = 0.0;  // request behind the current cold pipeline
    double open_since = 0.0;    // start of the open billed span
    ZoneId open_zone;
    bool open = false;
    Money cost = 0.0;
  };

  std::map<ClientId, Client> clients;
  for (const auto& p : cfg.clients) {
    Client c;
    c.profile = &p;
    c.cold = p.epoch_cold_s;
    c.warm = p.epoch_warm_s;
    clients.emplace(p.id, c);
  }

  Result res;

  // Round 1: every machine comes up from t=0; the first epoch runs cold.
  double barrier = 0.0;
  for (auto& [id, c] : clients) {
    c.open_zone = cheapest(cfg, c.profile->zones, 0.0);
    c.open_since = 0.0;
    c.open = true;
    double finish = (0.0 + spin) + c.cold;
    c.est_spin = finish - c.cold;  // observed total minus execution
    barrier = std::max(barrier, finish);
  }
  res.barriers.push_back(barrier);
  if (rounds >= 2) {
    double b2 = 0.0;
    for (auto& [id, c] : clients) b2 = std::max(b2, barrier + c.warm);
    barrier = b2;
    res.barriers.push_back(barrier);
  }

  for (int r = 3; r <= rounds; ++r) {
    double round_start = barrier;

    // Estimated slowest finish from the scheduler's viewpoint.
    double slowest = -std::numeric_limits<double>::infinity();
    for (auto& [id, c] : clients) {
      double ef = c.cold_this_round ? c.request_time + c.est_spin + c.cold
                                    : round_start + c.warm;
      slowest = std::max(slowest, ef);
    }

    // Actual finishes.
    std::map<ClientId, double> finish;
    double next_barrier = -std::numeric_limits<double>::infinity();
    for (auto& [id, c] : clients) {
      double f;
      if (c.cold_this_round) {
        double ready = c.request_time + spin;
        if (ready > round_start) res.zero_round_start_delay = false;
        double start = std::max(ready, round_start);
        f = start + c.cold;
      } else {
        f = round_start + c.warm;
      }
      finish[id] = f;
      next_barrier = std::max(next_barrier, f);
    }

    // Termination decisions at each finish; terminated clients re-request at
    // the pre-warm time (clamped to the decision instant).
    for (auto& [id, c] : clients) {
      double idle = slowest - finish[id];
      bool terminate = idle - c.est_spin > threshold;
      if (terminate) {
        c.cost += span_cost(cfg, c.open_zone, c.open_since, finish[id]);
        c.open = false;
        if (r < rounds) {
          double p = slowest - c.est_spin - buffer;
          p = std::max(p, finish[id]);
          c.request_time = p;
          c.open_zone = cheapest(cfg, c.profile->zones, p);
          c.open_since = p;
          c.open = true;
          if (p + spin > next_barrier) res.prewarm_always_punctual = false;
          c.cold_this_round = true;
        } else {
          c.cold_this_round = false;
        }
      } else {
        c.cold_this_round = false;
      }
    }

    barrier = next_barrier;
    res.barriers.push_back(barrier);
  }

  for (auto& [id, c] : clients) {
    if (c.open) {
      c.cost += span_cost(cfg, c.open_zone, c.open_since, barrier);
      c.open = false;
    }
    res.per_client[id] = c.cost;
    res.total_cost += c.cost;
  }
  return res;
}

// Baseline replay: every machine runs from t=0 to the final barrier.
inline Result replay_baseline(const ScenarioConfig& cfg, PricingMode mode) {
  const double spin = cfg.provisioning.base_delay_s;
  double barrier = 0.0;
  for (const auto& c : cfg.clients) barrier = std::max(barrier, (0.0 + spin) + c.epoch_cold_s);
  for (int r = 2; r <= cfg.rounds; ++r) {
    double b = 0.0;
    for (const auto& c : cfg.clients) b = std::max(b, barrier + c.epoch_warm_s);
    barrier = b;
  }
  Result res;
  res.barriers.assign(1, barrier);
  for (const auto& c : cfg.clients) {
    ZoneId zone = cheapest(cfg, c.zones, 0.0);
    Money cost;
    if (mode == PricingMode::OnDemand) {
      cost = barrier / kSecondsPerHour * cfg.market.traces.at(zone).on_demand_per_hour;
    } else {
      cost = span_cost(cfg, zone, 0.0, barrier);
    }
    res.per_client[c.id] = cost;
    res.total_cost += cost;
  }
  return res;
}

}  // namespace closed_form
