#include <doctest.h>

#include <cmath>
#include <map>

#include "fedcost/rng.hpp"
#include "fedcost/scheduler.hpp"

using namespace fedcost;

namespace {

EstimateBook calibrated_book(double alpha = 0.3) {
  EstimateBook book(alpha);
  book.record_cold_calibration("a", 820.0, 700.0);  // spin-up comes out as 120
  book.record_warm_calibration("a", 600.0);
  return book;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("round-1 calibration splits total time into execution and spin-up") {
  EstimateBook book(0.3);
  book.record_cold_calibration("a", 820.0, 700.0);
  CHECK_FALSE(book.calibrated("a"));  // warm still missing
  book.record_warm_calibration("a", 600.0);
  CHECK(book.calibrated("a"));
  CHECK(book.epoch_cold("a") == 700.0);
  CHECK(book.spin_up("a") == 120.0);
  CHECK(book.epoch_warm("a") == 600.0);
}

TEST_CASE("warm calibration before cold is rejected") {
  EstimateBook book(0.3);
  CHECK_THROWS_AS(book.record_warm_calibration("a", 600.0), SimError);
}

TEST_CASE("updates before calibration are rejected") {
  EstimateBook book(0.3);
  CHECK_THROWS_AS(book.update("a", 640.0, StartKind::Warm, std::nullopt), SimError);
  book.record_cold_calibration("a", 820.0, 700.0);
  CHECK_THROWS_AS(book.update("a", 640.0, StartKind::Warm, std::nullopt), SimError);
}

TEST_CASE("EMA folds observations at the configured weight") {
  EstimateBook book = calibrated_book(0.3);
  book.update("a", 640.0, StartKind::Warm, std::nullopt);
  CHECK(book.epoch_warm("a") == doctest::Approx(612.0).epsilon(1e-12));
  CHECK(book.epoch_cold("a") == 700.0);  // untouched
}

TEST_CASE("alpha of one keeps only the latest observation") {
  EstimateBook book = calibrated_book(1.0);
  book.update("a", 555.0, StartKind::Warm, std::nullopt);
  CHECK(book.epoch_warm("a") == 555.0);
}

TEST_CASE("a warm result without a fresh instance leaves the spin-up estimate alone") {
  EstimateBook book = calibrated_book();
  book.update("a", 640.0, StartKind::Warm, std::nullopt);
  CHECK(book.spin_up("a") == 120.0);
  book.update("a", 650.0, StartKind::Warm, 140.0);
  CHECK(book.spin_up("a") == doctest::Approx(0.3 * 140.0 + 0.7 * 120.0));
}

TEST_CASE("repeated constant observations contract the estimate monotonically") {
  EstimateBook book = calibrated_book(0.3);
  double target = 480.0;
  double prev_gap = std::abs(book.epoch_warm("a") - target);
  for (int i = 0; i < 60; ++i) {
    book.update("a", target, StartKind::Warm, std::nullopt);
    double gap = std::abs(book.epoch_warm("a") - target);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
  }
  CHECK(book.epoch_warm("a") == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("slowest finish mixes cold and warm pipelines") {
  EstimateBook book(0.3);
  book.record_cold_calibration("a", 820.0, 700.0);
  book.record_warm_calibration("a", 600.0);
  book.record_cold_calibration("b", 820.0, 700.0);
  book.record_warm_calibration("b", 600.0);
  std::map<ClientId, RoundClientInfo> infos;
  infos["a"] = {0.0, true, std::nullopt};   // 0 + 120 + 700 = 820
  infos["b"] = {0.0, false, std::nullopt};  // 0 + 600
  CHECK(estimate_slowest_finish_time(infos, book) == 820.0);

  infos.erase("a");
  CHECK(estimate_slowest_finish_time(infos, book) == 600.0);  // single client

  infos["a"] = {0.0, false, std::nullopt};  // identical warm pipelines
  CHECK(estimate_slowest_finish_time(infos, book) == 600.0);

  infos.clear();
  CHECK_THROWS_AS(estimate_slowest_finish_time(infos, book), SimError);
}

TEST_CASE("a recovery override replaces the estimate-based finish") {
  EstimateBook book = calibrated_book();
  std::map<ClientId, RoundClientInfo> infos;
  infos["a"] = {0.0, false, 1400.0};
  CHECK(estimate_slowest_finish_time(infos, book) == 1400.0);
}

TEST_CASE("a wide idle window triggers termination and a pre-warm slot") {
  EstimateBook book = calibrated_book();
  book.update_spin_up("a", 120.0);  // keep 120 exactly
  PolicyParams params;
  params.t_threshold_s = 60.0;
  params.t_buffer_s = 30.0;
  std::map<ClientId, RoundClientInfo> infos;
  infos["a"] = {0.0, false, 1000.0};  // pins the slowest finish at 1000
  TerminationDecision d = evaluate_termination("a", 400.0, infos, params, book);
  CHECK(d.slowest_finish == 1000.0);
  CHECK(d.idle_s == 600.0);
  CHECK(d.terminate);
  CHECK(d.prewarm_start_time == 850.0);  // 1000 - 120 - 30
}

TEST_CASE("a narrow idle window keeps the instance") {
  EstimateBook book = calibrated_book();
  PolicyParams params;
  std::map<ClientId, RoundClientInfo> infos;
  infos["a"] = {0.0, false, 1000.0};
  TerminationDecision d = evaluate_termination("a", 950.0, infos, params, book);
  CHECK(d.idle_s == 50.0);
  CHECK_FALSE(d.terminate);  // 50 - 120 is a net loss
}

TEST_CASE("the slowest client is always kept") {
  EstimateBook book = calibrated_book();
  PolicyParams params;
  params.t_threshold_s = 0.0;
  std::map<ClientId, RoundClientInfo> infos;
  infos["a"] = {0.0, false, 1000.0};
  TerminationDecision d = evaluate_termination("a", 1000.0, infos, params, book);
  CHECK(d.idle_s == 0.0);
  CHECK_FALSE(d.terminate);
}

TEST_CASE("the decision always matches the one-line predicate") {
  RandomStream rng(2024);
  PolicyParams params;
  for (int i = 0; i < 2000; ++i) {
    double spin = rng.uniform(10.0, 400.0);
    double cold = rng.uniform(100.0, 2000.0);
    double warm = rng.uniform(50.0, cold);
    EstimateBook book(0.3);
    book.record_cold_calibration("c", spin + cold, cold);
    book.record_warm_calibration("c", warm);
    params.t_threshold_s = rng.uniform(0.0, 300.0);
    params.t_buffer_s = rng.uniform(0.0, 120.0);
    double slowest = rng.uniform(500.0, 5000.0);
    double finish = rng.uniform(0.0, slowest);
    std::map<ClientId, RoundClientInfo> infos;
    infos["c"] = {0.0, false, slowest};
    TerminationDecision d = evaluate_termination("c", finish, infos, params, book);
    // Calibration derives spin-up as (total - execution), so compare against
    // the book's value rather than the raw input.
    double est_spin = book.spin_up("c");
    bool predicate = (slowest - finish) - est_spin > params.t_threshold_s;
    REQUIRE(d.terminate == predicate);
    if (d.terminate) {
      REQUIRE(d.prewarm_start_time == slowest - est_spin - params.t_buffer_s);
    }
    // The client that defines the slowest finish never terminates.
    TerminationDecision at_max = evaluate_termination("c", slowest, infos, params, book);
    REQUIRE_FALSE(at_max.terminate);
  }
}

TEST_CASE("preemption pushes queued spin-ups to the later of the two finishes") {
  CHECK(adjusted_prewarm_time(1000.0, 1400.0, 120.0, 30.0) == 1250.0);
  CHECK(adjusted_prewarm_time(1000.0, 900.0, 120.0, 30.0) == 850.0);  // max keeps the original
}

TEST_CASE("round cost estimates price the epoch plus any pending spin-up") {
  ClientEstimates est;
  est.epoch_cold_s = 700.0;
  est.epoch_warm_s = 600.0;
  est.spin_up_s = 120.0;
  CHECK(estimate_round_cost(false, false, est, 0.3951) ==
        doctest::Approx(0.065850).epsilon(1e-12));
  CHECK(estimate_round_cost(true, true, est, 0.3951) ==
        doctest::Approx((820.0 / 3600.0) * 0.3951).epsilon(1e-12));
  ClientEstimates blank;
  CHECK(estimate_round_cost(true, true, blank, 0.3951) == 0.0);
}

TEST_CASE("budget gate excludes when the estimate overshoots the remainder") {
  // warm epoch of 600 s at 0.3951/hr estimates to 0.06585
  ClientEstimates est;
  est.epoch_cold_s = 700.0;
  est.epoch_warm_s = 600.0;
  est.spin_up_s = 120.0;
  Money cost = estimate_round_cost(false, false, est, 0.3951);
  CHECK_FALSE(check_budget(Money{0.05}, 0.0, cost).participate);
  CHECK(check_budget(Money{0.10}, 0.0, cost).participate);
  CHECK(check_budget(std::nullopt, 1e9, cost).participate);  // unlimited
}

TEST_CASE("the pre-warm queue holds one cancellable entry per client") {
  PreWarmQueue q;
  q.add("a", {850.0, Engine::Ticket{3}});
  CHECK(q.contains("a"));
  CHECK_THROWS_AS(q.add("a", {900.0, Engine::Ticket{4}}), SimError);
  auto e = q.take("a");
  REQUIRE(e.has_value());
  CHECK(e->spin_up_start_time == 850.0);
  CHECK_FALSE(q.take("a").has_value());
  CHECK(q.size() == 0);
}

}  // TEST_SUITE("scheduler")
