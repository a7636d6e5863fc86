#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fedcost/errors.hpp"
#include "fedcost/rng.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

// Multiplicative, mean-one noise on epoch durations.
struct DurationNoise {
  enum class Kind { None, Uniform, LogNormal };
  Kind kind = Kind::None;
  double half_width = 0.0;  // Uniform: multiplier from [1-hw, 1+hw]
  double sigma = 0.0;       // LogNormal: exp(N(-sigma^2/2, sigma^2))
};

struct ClientProfile {
  ClientId id;
  double epoch_cold_s = 0.0;  // first epoch on a freshly provisioned instance
  double epoch_warm_s = 0.0;  // epoch on an already-running instance
  DurationNoise noise;
  std::optional<Money> budget;  // absent = unlimited
  double checkpoint_interval_s = 300.0;
  std::vector<ZoneId> zones;  // candidate zones; cheapest picked at request time
};

// One multiplier per (seed, client, round). The same draw scales cold and
// warm, so cold >= warm survives noise.
inline double noise_multiplier(const DurationNoise& noise, std::uint64_t seed,
                               const ClientId& client, int round) {
  if (noise.kind == DurationNoise::Kind::None) return 1.0;
  auto rng = RandomStream::derive(seed, "epoch-noise", fnv1a64(client),
                                  static_cast<std::uint64_t>(round));
  if (noise.kind == DurationNoise::Kind::Uniform) {
    return rng.uniform(1.0 - noise.half_width, 1.0 + noise.half_width);
  }
  double s = noise.sigma;
  return std::exp(rng.normal(-0.5 * s * s, s));
}

inline double epoch_duration_s(const ClientProfile& profile, StartKind kind,
                               int round, std::uint64_t seed) {
  double base = kind == StartKind::Cold ? profile.epoch_cold_s : profile.epoch_warm_s;
  return base * noise_multiplier(profile.noise, seed, profile.id, round);
}

// Progress marks at which local state persists to storage. A mark landing
// exactly on the epoch end still counts; the result upload covers the rest.
inline std::vector<double> checkpoint_progress_points(double epoch_s, double interval_s) {
  if (interval_s <= 0.0) throw SimError("checkpoint interval must be positive");
  std::vector<double> points;
  double slack = 1e-9 * std::max(1.0, epoch_s);
  for (int k = 1; k * interval_s <= epoch_s + slack; ++k) {
    points.push_back(k * interval_s);
  }
  return points;
}

struct CheckpointRecord {
  ClientId client;
  int round = 0;
  double progress_s = 0.0;
  SimTime saved_at = 0.0;
};

// Wall-time multiplier for work replayed on a replacement instance after a
// preemption. Progress lost from a warm epoch reruns at the cold/warm ratio.
inline double resume_slowdown(const ClientProfile& profile, StartKind interrupted_kind,
                              double resume_overhead) {
  double ratio = interrupted_kind == StartKind::Warm
                     ? profile.epoch_cold_s / profile.epoch_warm_s
                     : 1.0;
  return ratio * resume_overhead;
}

// Synchronous-round barrier bookkeeping. Aggregation may only happen once
// every participant has reported.
struct RoundState {
  int index = 0;
  std::set<ClientId> participants;
  std::map<ClientId, SimTime> finished;
  std::optional<SimTime> barrier_complete_at;

  bool complete() const { return finished.size() == participants.size(); }

  // Events arrive in time order, so the last finish is the max finish.
  bool record_finish(const ClientId& client, SimTime t) {
    if (!participants.count(client)) {
      throw SimError("round " + std::to_string(index) + ": finish from non-participant " + client);
    }
    if (finished.count(client)) {
      throw SimError("round " + std::to_string(index) + ": duplicate finish for " + client);
    }
    finished.emplace(client, t);
    if (complete()) {
      barrier_complete_at = t;
      return true;
    }
    return false;
  }
};

}  // namespace fedcost
