#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "fedcost/errors.hpp"
#include "fedcost/types.hpp"

namespace fedcost {

enum class EventKind {
  EpochComplete,
  InstanceReady,
  PreWarmDue,
  Preemption,
  RoundStart,
  BudgetCheck,
  Checkpoint,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::EpochComplete: return "epoch_complete";
    case EventKind::InstanceReady: return "instance_ready";
    case EventKind::PreWarmDue: return "prewarm_due";
    case EventKind::Preemption: return "preemption";
    case EventKind::RoundStart: return "round_start";
    case EventKind::BudgetCheck: return "budget_check";
    case EventKind::Checkpoint: return "checkpoint";
  }
  return "unknown";
}

// Single-threaded virtual-clock event loop. Events with equal fire times are
// delivered in insertion order, so a run's schedule is a pure function of its
// inputs. Handlers run to completion; no reentrancy.
class Engine {
 public:
  static constexpr std::uint64_t kDefaultMaxDispatches = 10'000'000;

  struct Ticket {
    std::uint64_t seq = 0;  // 0 = never scheduled
  };

  struct DispatchRecord {
    SimTime fired_at = 0.0;
    std::uint64_t seq = 0;
    EventKind kind{};
    bool operator==(const DispatchRecord&) const = default;
  };

  explicit Engine(std::uint64_t max_dispatches = kDefaultMaxDispatches)
      : max_dispatches_(max_dispatches) {}

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SimTime now() const { return now_; }
  std::size_t pending_count() const { return pending_.size(); }
  std::uint64_t dispatch_count() const { return dispatched_; }

  Ticket schedule(SimTime fire_at, EventKind kind, std::function<void()> handler) {
    if (!std::isfinite(fire_at)) {
      throw SimError("engine: cannot schedule an event at a non-finite time");
    }
    if (fire_at < now_) {
      std::ostringstream os;
      os << "engine: event scheduled at t=" << fire_at << " before now=" << now_;
      throw SimError(os.str());
    }
    std::uint64_t seq = next_seq_++;
    heap_.push(HeapItem{fire_at, seq});
    pending_.emplace(seq, Entry{kind, std::move(handler)});
    return Ticket{seq};
  }

  // True when the event existed and had not fired yet; false on a second
  // cancel or after delivery.
  bool cancel(Ticket ticket) { return pending_.erase(ticket.seq) > 0; }

  // Pops and dispatches in (fire_at, sequence) order until the queue drains.
  // Returns the clock after the last delivered event.
  SimTime run_until_quiescent() {
    while (!heap_.empty()) {
      HeapItem item = heap_.top();
      heap_.pop();
      auto it = pending_.find(item.seq);
      if (it == pending_.end()) continue;  // cancelled
      Entry entry = std::move(it->second);
      pending_.erase(it);
      now_ = item.fire_at;
      if (++dispatched_ > max_dispatches_) {
        std::ostringstream os;
        os << "engine: dispatch cap exceeded (" << max_dispatches_
           << " events, now=" << now_ << ", pending=" << pending_.size()
           << "); likely a runaway scheduling loop";
        throw SimError(os.str());
      }
      if (log_enabled_) log_.push_back({now_, item.seq, entry.kind});
      entry.handler();
    }
    return now_;
  }

  void enable_dispatch_log(bool on) { log_enabled_ = on; }
  const std::vector<DispatchRecord>& dispatch_log() const { return log_; }

 private:
  struct HeapItem {
    SimTime fire_at;
    std::uint64_t seq;
  };
  struct LaterFirst {
    bool operator()(const HeapItem& a, const HeapItem& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };
  struct Entry {
    EventKind kind;
    std::function<void()> handler;
  };

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t dispatched_ = 0;
  std::uint64_t max_dispatches_;
  std::priority_queue<HeapItem, std::vector<HeapItem>, LaterFirst> heap_;
  std::map<std::uint64_t, Entry> pending_;
  bool log_enabled_ = false;
  std::vector<DispatchRecord> log_;
};

}  // namespace fedcost
