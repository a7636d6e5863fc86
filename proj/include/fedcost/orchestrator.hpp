#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedcost/engine.hpp"
#include "fedcost/errors.hpp"
#include "fedcost/ledger.hpp"
#include "fedcost/market.hpp"
#include "fedcost/scenario.hpp"
#include "fedcost/scheduler.hpp"
#include "fedcost/types.hpp"
#include "fedcost/workload.hpp"

namespace fedcost {

struct ClientOutcome {
  Money spent = 0.0;
  std::optional<Money> budget;
  std::optional<int> excluded_at_round;
  int terminations = 0;
  std::vector<Money> cumulative_by_round;  // index 0 = through round 1
};

struct RunResult {
  std::string scenario_name;
  PolicyMode policy{};
  std::uint64_t seed = 0;
  std::string config_digest;
  int rounds_configured = 0;
  int rounds_completed = 0;
  SimTime final_time = 0.0;
  Money total_cost = 0.0;
  Money calibration_cost = 0.0;
  std::map<ClientId, ClientOutcome> clients;
};

// Drives one scenario under one policy: the two calibration rounds, the
// synchronous training loop, estimate refreshes, instance lifecycle
// decisions, budget gating, preemption recovery, and the cost ledger.
class Orchestrator {
 public:
  struct RoundRecord {
    int index = 0;
    SimTime started_at = 0.0;
    SimTime barrier_at = 0.0;
    std::vector<ClientId> participants;
  };

  struct EpochRecord {
    ClientId client;
    int round = 0;
    StartKind kind{};
    SimTime started_at = 0.0;
    SimTime finished_at = -1.0;
    double planned_duration_s = 0.0;
    bool preempted = false;
  };

  // Every termination evaluation, kept or not.
  struct TerminationRecord {
    ClientId client;
    int round = 0;
    SimTime at = 0.0;
    SimTime slowest_finish_estimate = 0.0;
    double idle_s = 0.0;
    bool terminated = false;
    SimTime prewarm_at = 0.0;
  };

  struct PrewarmRecord {
    ClientId client;
    int target_round = 0;
    SimTime scheduled_for = 0.0;  // follows adjustments
    SimTime fired_at = -1.0;
    SimTime ready_at = -1.0;
  };

  struct PreemptionRecord {
    ClientId client;
    int round = 0;
    SimTime at = 0.0;
    bool was_training = false;
    double progress_s = 0.0;
    double lost_work_s = 0.0;
    double resumed_from_s = 0.0;
    SimTime recovery_finish = 0.0;
    SimTime original_slowest_finish = 0.0;
    std::vector<std::pair<ClientId, SimTime>> adjusted_prewarms;
  };

  Orchestrator(Engine& engine, ScenarioConfig cfg,
               std::optional<PolicyMode> policy_override = std::nullopt)
      : engine_(engine), cfg_(std::move(cfg)), estimates_(cfg_.policy.ema_alpha) {
    if (policy_override) cfg_.policy.mode = *policy_override;
    validate(cfg_);
    // Spot volatility is an opt-in hazard; the on-demand baseline never sees it.
    PreemptionModel preemption = cfg_.preemption;
    if (cfg_.policy.mode == PolicyMode::OnDemand) preemption = PreemptionModel{};
    market_.emplace(engine_, cfg_.market.zones, cfg_.market.traces, cfg_.provisioning,
                    preemption, cfg_.seed, cfg_.market.billing_increment_s);
    market_->set_preemption_handler([this](InstanceId id) { on_instance_preempted(id); });
    for (const auto& profile : cfg_.clients) {
      ClientRuntime cr;
      cr.profile = profile;
      clients_.emplace(profile.id, std::move(cr));
    }
  }

  RunResult run() {
    if (started_) throw SimError("orchestrator: run() called twice");
    started_ = true;
    engine_.schedule(engine_.now(), EventKind::RoundStart, [this] { round_boundary(); });
    SimTime final_time = engine_.run_until_quiescent();

    RunResult result;
    result.scenario_name = cfg_.name;
    result.policy = cfg_.policy.mode;
    result.seed = cfg_.seed;
    result.config_digest = config_digest(cfg_);
    result.rounds_configured = cfg_.rounds;
    result.rounds_completed = rounds_completed_;
    result.final_time = final_time;
    result.total_cost = ledger_.total_cost();
    result.calibration_cost = ledger_.cost_through_round(std::min(2, cfg_.rounds));
    std::map<ClientId, std::map<int, Money>> per_round;
    for (const auto& iv : ledger_.intervals()) per_round[iv.client][iv.round] += iv.cost;
    for (const auto& [id, cr] : clients_) {
      ClientOutcome out;
      out.spent = ledger_.client_cost(id);
      out.budget = cr.profile.budget;
      if (cr.excluded) out.excluded_at_round = cr.excluded_at_round;
      out.terminations = cr.terminations;
      Money running = 0.0;
      for (int r = 1; r <= rounds_completed_; ++r) {
        auto cit = per_round.find(id);
        if (cit != per_round.end()) {
          auto rit = cit->second.find(r);
          if (rit != cit->second.end()) running += rit->second;
        }
        out.cumulative_by_round.push_back(running);
      }
      result.clients.emplace(id, std::move(out));
    }
    return result;
  }

  // --- simulation event handlers (driven by the engine) ---

  void start_epoch(const ClientId& id, StartKind kind) {
    SimTime now = engine_.now();
    ClientRuntime& cr = runtime(id);
    if (!cr.instance || !cr.instance_ready) {
      throw SimError("epoch start without a running instance for " + id);
    }
    if (cr.training) throw SimError("epoch already in progress for " + id);
    if (!round_state_.participants.count(id)) {
      throw SimError(id + " is not a participant of the current round");
    }
    double duration = epoch_duration_s(cr.profile, kind, round_, cfg_.seed);
    cr.training = true;
    cr.epoch_kind = kind;
    cr.epoch_total_s = duration;
    cr.progress_base_s = 0.0;
    cr.piece_rate = 1.0;
    cr.piece_planned_s = duration;
    cr.piece_started_at = now;
    cr.last_checkpoint_s = 0.0;
    schedule_checkpoints(id, cr, now, 0.0, duration, 1.0);
    cr.epoch_ticket = engine_.schedule(now + duration, EventKind::EpochComplete,
                                       [this, id] { on_epoch_complete(id); });
    set_cover(id, kind == StartKind::Cold ? Cover::TrainingCold : Cover::TrainingWarm, now);
    epoch_records_.push_back({id, round_, kind, now, -1.0, duration, false});
    cr.open_epoch = epoch_records_.size() - 1;
  }

  void on_epoch_complete(const ClientId& id) {
    SimTime now = engine_.now();
    ClientRuntime& cr = runtime(id);
    if (!cr.training) throw SimError("epoch completion for " + id + " which is not training");
    cr.training = false;
    cr.in_recovery = false;
    cr.finished_this_round = true;
    cr.fresh_instance = false;
    cr.exec_wall_s += cr.piece_planned_s;
    cr.checkpoint_tickets.clear();
    if (cr.open_epoch) {
      epoch_records_[*cr.open_epoch].finished_at = now;
      cr.open_epoch.reset();
    }
    set_cover(id, Cover::Idle, now);

    if (round_ == 1) {
      cold_calibration_obs_[id] = {now - round_start_, cr.exec_wall_s};
    } else if (round_ == 2) {
      warm_calibration_obs_[id] = cr.exec_wall_s;
    } else {
      estimates_.update_epoch(id, cr.exec_wall_s, cr.epoch_kind);
      for (double obs : cr.pending_spin_obs) estimates_.update_spin_up(id, obs);
    }
    cr.pending_spin_obs.clear();

    if (cfg_.policy.mode == PolicyMode::FedCostAware && round_ > 2) {
      consider_termination(id, cr, now);
    }

    if (round_state_.record_finish(id, now)) on_barrier();
  }

  // --- post-run inspection ---

  const Engine& engine() const { return engine_; }
  const SpotMarket& market() const { return *market_; }
  const Ledger& ledger() const { return ledger_; }
  const EstimateBook& estimates() const { return estimates_; }
  const PolicyParams& params() const { return cfg_.policy; }
  const ScenarioConfig& config() const { return cfg_; }
  const PreWarmQueue& prewarm_queue() const { return prewarm_queue_; }

  const std::vector<RoundRecord>& round_records() const { return round_records_; }
  const std::vector<EpochRecord>& epoch_records() const { return epoch_records_; }
  const std::vector<TerminationRecord>& termination_records() const { return termination_records_; }
  const std::vector<PrewarmRecord>& prewarm_records() const { return prewarm_records_; }
  const std::vector<PreemptionRecord>& preemption_records() const { return preemption_records_; }
  const std::vector<CheckpointRecord>& checkpoint_records() const { return checkpoint_records_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  enum class Cover { None, SpinUp, TrainingCold, TrainingWarm, Idle, Saved, Recovery };

  struct ClientRuntime {
    ClientProfile profile;

    bool excluded = false;
    int excluded_at_round = 0;
    int terminations = 0;

    std::optional<InstanceId> instance;
    bool instance_ready = false;
    bool fresh_instance = true;  // no epoch has completed on it yet
    std::vector<double> pending_spin_obs;

    // Round-scoped task state.
    bool training = false;
    bool finished_this_round = false;
    RoundClientInfo info;
    StartKind epoch_kind = StartKind::Cold;
    double epoch_total_s = 0.0;    // planned duration of the current epoch
    double progress_base_s = 0.0;  // progress when the running piece started
    double piece_rate = 1.0;       // progress per wall second of the running piece
    double piece_planned_s = 0.0;  // planned wall length of the running piece
    SimTime piece_started_at = 0.0;
    double exec_wall_s = 0.0;  // training wall accumulated this round
    double last_checkpoint_s = 0.0;
    bool in_recovery = false;
    double resume_remaining_wall_s = 0.0;
    double resume_base_s = 0.0;
    Engine::Ticket epoch_ticket;
    std::vector<Engine::Ticket> checkpoint_tickets;

    // Ledger mark.
    Cover cover = Cover::None;
    SimTime mark = 0.0;
    InstanceId cover_instance = 0;

    std::optional<std::size_t> open_epoch;
    std::optional<std::size_t> open_prewarm;
  };

  ClientRuntime& runtime(const ClientId& id) {
    auto it = clients_.find(id);
    if (it == clients_.end()) throw SimError("unknown client " + id);
    return it->second;
  }

  // --- ledger cover machinery ---

  static IntervalState to_interval_state(Cover c) {
    switch (c) {
      case Cover::SpinUp: return IntervalState::SpinUp;
      case Cover::TrainingCold: return IntervalState::TrainingCold;
      case Cover::TrainingWarm: return IntervalState::TrainingWarm;
      case Cover::Idle: return IntervalState::Idle;
      case Cover::Saved: return IntervalState::Saved;
      case Cover::Recovery: return IntervalState::Recovery;
      case Cover::None: break;
    }
    throw SimError("no interval state for an empty cover");
  }

  void emit_cover(ClientRuntime& cr, const ClientId& id, SimTime to, int round) {
    if (cr.cover == Cover::None || to <= cr.mark) return;
    if (cr.cover == Cover::Saved) {
      ledger_.record(id, round, IntervalState::Saved, cr.mark, to, 0.0);
      return;
    }
    const Instance& inst = market_->instance(cr.cover_instance);
    market_->for_each_rate_segment(
        inst.zone, inst.mode, cr.mark, to, [&](SimTime a, SimTime b, Money rate) {
          ledger_.record(id, round, to_interval_state(cr.cover), a, b, rate);
        });
  }

  void set_cover(const ClientId& id, Cover next, SimTime at) {
    ClientRuntime& cr = runtime(id);
    emit_cover(cr, id, at, round_);
    cr.cover = next;
    cr.mark = at;
    if (next != Cover::None && next != Cover::Saved) {
      if (!cr.instance) throw SimError("billed cover without an instance for " + id);
      cr.cover_instance = *cr.instance;
    }
  }

  // Round boundaries cut every open span so intervals partition each round.
  void split_covers_at(SimTime at) {
    for (auto& [id, cr] : clients_) {
      if (cr.cover == Cover::None || at <= cr.mark) continue;
      emit_cover(cr, id, at, round_);
      cr.mark = at;
    }
  }

  // --- round lifecycle ---

  void round_boundary() {
    SimTime now = engine_.now();
    split_covers_at(now);
    ++round_;
    round_start_ = now;
    engine_.schedule(now, EventKind::BudgetCheck, [this] { begin_round(); });
  }

  void begin_round() {
    SimTime now = engine_.now();
    std::set<ClientId> participants;
    for (auto& [id, cr] : clients_) {
      if (cr.excluded) continue;
      if (!budget_gate(id, cr, now).participate) {
        exclude_client(id, cr, now);
        continue;
      }
      participants.insert(id);
    }
    if (participants.empty()) {
      rounds_completed_ = round_ - 1;
      shutdown(now);
      return;
    }
    round_state_ = RoundState{};
    round_state_.index = round_;
    round_state_.participants = participants;
    round_records_.push_back(
        {round_, now, 0.0, std::vector<ClientId>(participants.begin(), participants.end())});
    for (const auto& id : participants) dispatch_round_task(id);
  }

  BudgetDecision budget_gate(const ClientId& id, ClientRuntime& cr, SimTime now) {
    bool instance_running = cr.instance && cr.instance_ready;
    bool cold_epoch = !cr.instance || cr.fresh_instance;
    Money est_cost = 0.0;
    if (const ClientEstimates* est = estimates_.find(id); est && est->calibrated()) {
      ZoneId zone = market_->cheapest_zone(now, cr.profile.zones);
      Money price = market_->price_at(zone, now, pricing_mode());
      est_cost = estimate_round_cost(cold_epoch, !instance_running, *est, price);
    }
    return check_budget(cr.profile.budget, ledger_.client_cost(id), est_cost);
  }

  void exclude_client(const ClientId& id, ClientRuntime& cr, SimTime now) {
    cr.excluded = true;
    cr.excluded_at_round = round_;
    if (auto entry = prewarm_queue_.take(id)) engine_.cancel(entry->ticket);
    if (cr.instance) {
      FinalAccrual acc = market_->terminate_instance(*cr.instance, now);
      set_cover(id, Cover::None, acc.to);
      cr.instance.reset();
      cr.instance_ready = false;
    } else {
      set_cover(id, Cover::None, now);
    }
  }

  void dispatch_round_task(const ClientId& id) {
    SimTime now = engine_.now();
    ClientRuntime& cr = runtime(id);
    if (cr.training || cr.in_recovery) throw SimError("dispatch while " + id + " is still busy");
    cr.finished_this_round = false;
    cr.exec_wall_s = 0.0;
    cr.info = RoundClientInfo{};
    if (cr.instance) {
      const Instance& inst = market_->instance(*cr.instance);
      if (cr.instance_ready) {
        bool cold = cr.fresh_instance;
        cr.info.start_time = cold ? inst.requested_at : now;
        cr.info.cold_start = cold;
        start_epoch(id, cold ? StartKind::Cold : StartKind::Warm);
      } else {
        // Still provisioning; the epoch starts when the instance comes up.
        cr.info.start_time = inst.requested_at;
        cr.info.cold_start = true;
      }
      return;
    }
    if (auto entry = prewarm_queue_.take(id)) {
      // The queued spin-up lies in the future but the round needs the
      // instance now; pull it in.
      engine_.cancel(entry->ticket);
      if (cr.open_prewarm) prewarm_records_[*cr.open_prewarm].fired_at = now;
    }
    request_instance_for(id, now);
    cr.info.start_time = now;
    cr.info.cold_start = true;
  }

  PricingMode pricing_mode() const {
    return cfg_.policy.mode == PolicyMode::OnDemand ? PricingMode::OnDemand : PricingMode::Spot;
  }

  void request_instance_for(const ClientId& id, SimTime now) {
    ClientRuntime& cr = runtime(id);
    ZoneId zone = market_->cheapest_zone(now, cr.profile.zones);
    InstanceId inst =
        market_->request_instance(id, zone, now, pricing_mode(),
                                  [this, id](InstanceId ready) { on_instance_ready(id, ready); });
    cr.instance = inst;
    cr.instance_ready = false;
    cr.fresh_instance = true;
    set_cover(id, Cover::SpinUp, now);
  }

  // --- epoch support ---

  void schedule_checkpoints(const ClientId& id, ClientRuntime& cr, SimTime now,
                            double from_progress, double total_progress, double slowdown) {
    cr.checkpoint_tickets.clear();
    for (double p : checkpoint_progress_points(total_progress, cr.profile.checkpoint_interval_s)) {
      if (p <= from_progress) continue;
      SimTime at = now + (p - from_progress) * slowdown;
      cr.checkpoint_tickets.push_back(
          engine_.schedule(at, EventKind::Checkpoint, [this, id, p] { on_checkpoint(id, p); }));
    }
  }

  void on_checkpoint(const ClientId& id, double progress) {
    ClientRuntime& cr = runtime(id);
    if (!cr.training) return;
    cr.last_checkpoint_s = progress;
    checkpoint_records_.push_back({id, round_, progress, engine_.now()});
  }

  void consider_termination(const ClientId& id, ClientRuntime& cr, SimTime now) {
    TerminationDecision d = evaluate_termination(id, now, round_infos(), cfg_.policy, estimates_);
    termination_records_.push_back(
        {id, round_, now, d.slowest_finish, d.idle_s, d.terminate, d.prewarm_start_time});
    if (!d.terminate) return;
    FinalAccrual acc = market_->terminate_instance(*cr.instance, now);
    set_cover(id, Cover::Saved, acc.to);  // savings start where billing stopped
    cr.instance.reset();
    cr.instance_ready = false;
    cr.terminations += 1;
    if (round_ < cfg_.rounds) {
      SimTime at = std::max(d.prewarm_start_time, now);
      Engine::Ticket ticket =
          engine_.schedule(at, EventKind::PreWarmDue, [this, id] { fire_prewarm(id); });
      prewarm_queue_.add(id, {at, ticket});
      prewarm_records_.push_back({id, round_ + 1, at, -1.0, -1.0});
      cr.open_prewarm = prewarm_records_.size() - 1;
    }
  }

  std::map<ClientId, RoundClientInfo> round_infos() const {
    std::map<ClientId, RoundClientInfo> infos;
    for (const auto& id : round_state_.participants) {
      infos.emplace(id, clients_.at(id).info);
    }
    return infos;
  }

  void fire_prewarm(const ClientId& id) {
    SimTime now = engine_.now();
    auto entry = prewarm_queue_.take(id);
    if (!entry) throw SimError("prewarm fired without a queue entry for " + id);
    ClientRuntime& cr = runtime(id);
    if (cr.open_prewarm) prewarm_records_[*cr.open_prewarm].fired_at = now;
    if (cr.excluded) return;
    if (cr.instance) {
      warnings_.push_back("prewarm for " + id + " at t=" + std::to_string(now) +
                          " ignored: instance already live");
      return;
    }
    request_instance_for(id, now);
  }

  void on_instance_ready(const ClientId& id, InstanceId inst) {
    SimTime now = engine_.now();
    ClientRuntime& cr = runtime(id);
    if (!cr.instance || *cr.instance != inst) return;  // superseded
    cr.instance_ready = true;
    cr.pending_spin_obs.push_back(market_->instance(inst).provision_delay_s);
    if (cr.open_prewarm) {
      prewarm_records_[*cr.open_prewarm].ready_at = now;
      cr.open_prewarm.reset();
    }
    if (cr.excluded) {
      FinalAccrual acc = market_->terminate_instance(inst, now);
      set_cover(id, Cover::None, acc.to);
      cr.instance.reset();
      cr.instance_ready = false;
      return;
    }
    if (cr.in_recovery) {
      resume_epoch(id, cr, now);
      return;
    }
    if (round_state_.participants.count(id) && !cr.training && !cr.finished_this_round) {
      start_epoch(id, StartKind::Cold);
      return;
    }
    // Pre-warmed ahead of the next round; idles (billed) until dispatch.
    set_cover(id, Cover::Idle, now);
  }

  // --- preemption and recovery ---

  void on_instance_preempted(InstanceId inst_id) {
    SimTime now = engine_.now();
    const ClientId id = market_->instance(inst_id).client;
    ClientRuntime& cr = runtime(id);
    if (!cr.instance || *cr.instance != inst_id) return;

    PreemptionRecord rec;
    rec.client = id;
    rec.round = round_;
    rec.at = now;
    rec.was_training = cr.training;

    set_cover(id, Cover::None, now);
    cr.instance.reset();
    cr.instance_ready = false;

    if (!cr.training) {
      warnings_.push_back("preemption of idle instance for " + id + " at t=" + std::to_string(now));
      bool wanted = !cr.excluded && !run_over_ &&
                    (round_state_.participants.count(id) > 0 || round_ < cfg_.rounds);
      if (wanted) {
        request_instance_for(id, now);
        if (round_state_.participants.count(id) && !cr.finished_this_round) {
          cr.info.start_time = now;
          cr.info.cold_start = true;
          cr.info.finish_override.reset();
        }
      }
      preemption_records_.push_back(std::move(rec));
      return;
    }

    // Lose the work since the last checkpoint and replay the remainder on a
    // fresh instance.
    engine_.cancel(cr.epoch_ticket);
    for (auto& t : cr.checkpoint_tickets) engine_.cancel(t);
    cr.checkpoint_tickets.clear();
    cr.training = false;
    cr.exec_wall_s += now - cr.piece_started_at;
    if (cr.open_epoch) {
      epoch_records_[*cr.open_epoch].preempted = true;
      epoch_records_[*cr.open_epoch].finished_at = now;
      cr.open_epoch.reset();
    }

    double progress = cr.progress_base_s + (now - cr.piece_started_at) * cr.piece_rate;
    // A checkpoint completes at its own instant, so a preemption landing
    // exactly on a mark loses nothing even though the two events tie.
    double interval = cr.profile.checkpoint_interval_s;
    double lattice =
        std::floor((progress + 1e-9 * std::max(1.0, progress)) / interval) * interval;
    cr.resume_base_s = std::max(cr.last_checkpoint_s, lattice);
    double remaining_progress = cr.epoch_total_s - cr.resume_base_s;
    double slowdown = resume_slowdown(cr.profile, cr.epoch_kind, cfg_.policy.resume_overhead);
    cr.resume_remaining_wall_s = remaining_progress * slowdown;
    cr.in_recovery = true;

    SimTime original_slowest = estimate_slowest_finish_for_adjustment();

    request_instance_for(id, now);
    double delay = market_->instance(*cr.instance).provision_delay_s;
    SimTime recovery_finish = now + delay + cr.resume_remaining_wall_s;
    cr.info.finish_override = recovery_finish;

    rec.progress_s = progress;
    rec.lost_work_s = progress - cr.resume_base_s;
    rec.resumed_from_s = cr.resume_base_s;
    rec.recovery_finish = recovery_finish;
    rec.original_slowest_finish = original_slowest;

    // Push every queued spin-up out so the fleet stays off while the crashed
    // client recovers.
    for (auto& [qid, entry] : prewarm_queue_.entries()) {
      SimTime at = adjusted_prewarm_time(original_slowest, recovery_finish,
                                         estimates_.spin_up(qid), cfg_.policy.t_buffer_s);
      at = std::max(at, now);
      engine_.cancel(entry.ticket);
      const ClientId qid_copy = qid;
      entry.ticket =
          engine_.schedule(at, EventKind::PreWarmDue, [this, qid_copy] { fire_prewarm(qid_copy); });
      entry.spin_up_start_time = at;
      ClientRuntime& qcr = runtime(qid);
      if (qcr.open_prewarm) prewarm_records_[*qcr.open_prewarm].scheduled_for = at;
      rec.adjusted_prewarms.emplace_back(qid, at);
    }
    preemption_records_.push_back(std::move(rec));
  }

  // F_s as it stood before the crash: current estimates plus the crashed
  // client's pre-crash pipeline info.
  SimTime estimate_slowest_finish_for_adjustment() const {
    if (round_ <= 2 || round_state_.participants.empty() || !all_participants_calibrated()) {
      return 0.0;  // queue is empty during calibration; nothing to adjust
    }
    return estimate_slowest_finish_time(round_infos(), estimates_);
  }

  bool all_participants_calibrated() const {
    for (const auto& id : round_state_.participants) {
      if (!estimates_.calibrated(id)) return false;
    }
    return true;
  }

  void resume_epoch(const ClientId& id, ClientRuntime& cr, SimTime now) {
    double remaining_progress = cr.epoch_total_s - cr.resume_base_s;
    double wall = cr.resume_remaining_wall_s;
    cr.training = true;
    cr.progress_base_s = cr.resume_base_s;
    cr.piece_rate = remaining_progress / wall;
    cr.piece_planned_s = wall;
    cr.piece_started_at = now;
    cr.last_checkpoint_s = cr.resume_base_s;
    schedule_checkpoints(id, cr, now, cr.resume_base_s, cr.epoch_total_s,
                         wall / remaining_progress);
    cr.epoch_ticket = engine_.schedule(now + wall, EventKind::EpochComplete,
                                       [this, id] { on_epoch_complete(id); });
    set_cover(id, Cover::Recovery, now);
  }

  // --- barrier and teardown ---

  void on_barrier() {
    SimTime now = engine_.now();
    round_records_.back().barrier_at = now;
    if (round_ == 1) {
      for (const auto& id : round_state_.participants) {
        auto it = cold_calibration_obs_.find(id);
        if (it == cold_calibration_obs_.end()) throw SimError("missing cold calibration for " + id);
        estimates_.record_cold_calibration(id, it->second.first, it->second.second);
      }
    } else if (round_ == 2) {
      for (const auto& id : round_state_.participants) {
        auto it = warm_calibration_obs_.find(id);
        if (it == warm_calibration_obs_.end()) throw SimError("missing warm calibration for " + id);
        estimates_.record_warm_calibration(id, it->second);
      }
    }
    if (round_ >= cfg_.rounds) {
      rounds_completed_ = round_;
      shutdown(now);
      return;
    }
    engine_.schedule(now + cfg_.policy.transfer_latency_s, EventKind::RoundStart,
                     [this] { round_boundary(); });
  }

  void shutdown(SimTime now) {
    run_over_ = true;
    for (auto& [id, cr] : clients_) {
      if (auto entry = prewarm_queue_.take(id)) engine_.cancel(entry->ticket);
      if (cr.instance) {
        FinalAccrual acc = market_->terminate_instance(*cr.instance, now);
        set_cover(id, Cover::None, acc.to);
        cr.instance.reset();
        cr.instance_ready = false;
      } else {
        set_cover(id, Cover::None, now);  // closes a trailing saved span
      }
    }
    market_->cancel_pending();
  }

  Engine& engine_;
  ScenarioConfig cfg_;
  std::optional<SpotMarket> market_;
  Ledger ledger_;
  EstimateBook estimates_;
  PreWarmQueue prewarm_queue_;
  std::map<ClientId, ClientRuntime> clients_;

  bool started_ = false;
  bool run_over_ = false;
  int round_ = 0;
  SimTime round_start_ = 0.0;
  int rounds_completed_ = 0;
  RoundState round_state_;
  std::map<ClientId, std::pair<double, double>> cold_calibration_obs_;  // total, execution
  std::map<ClientId, double> warm_calibration_obs_;

  std::vector<RoundRecord> round_records_;
  std::vector<EpochRecord> epoch_records_;
  std::vector<TerminationRecord> termination_records_;
  std::vector<PrewarmRecord> prewarm_records_;
  std::vector<PreemptionRecord> preemption_records_;
  std::vector<CheckpointRecord> checkpoint_records_;
  std::vector<std::string> warnings_;
};

inline RunResult run_scenario(const ScenarioConfig& cfg,
                              std::optional<PolicyMode> policy_override = std::nullopt) {
  Engine engine;
  Orchestrator orch(engine, cfg, policy_override);
  return orch.run();
}

}  // namespace fedcost
