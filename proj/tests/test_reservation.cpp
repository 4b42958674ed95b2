#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tsnr/reservation.hpp"

namespace tsnr {
namespace {

using test::make_chain;
using test::make_flow;

TEST(IdleSlopeCmi, OneFramePerClassInterval) {
  auto t = make_chain(1, 1'000'000'000);
  auto f = make_flow(*t, 0, "src", {"dst"}, 10'000, 125'000);
  EXPECT_EQ(idle_slope_cmi({&f}, 125'000), rat(80'000'000));
  EXPECT_EQ(idle_slope_cmi({}, 125'000), rat(0));
}

TEST(IdleSlopeCmi, SlowFlowStillReservesOneFramePerWindow) {
  auto t = make_chain(1, 1'000'000'000);
  auto f = make_flow(*t, 0, "src", {"dst"}, 10'000, 100'000'000);
  EXPECT_EQ(idle_slope_cmi({&f}, 125'000), rat(80'000'000));
}

TEST(IdleSlopeFlowInterval, StudyCrossTrafficFrame) {
  auto t = make_chain(1, 100'000'000);
  // 866 B cross frame plus IFG and safety byte every 100 ms.
  auto f = make_flow(*t, 0, "src", {"dst"}, (866 + 13) * 8, 100'000'000);
  EXPECT_EQ(idle_slope_flow_interval({&f}), rat(70'320));
  EXPECT_NEAR(to_double(idle_slope_flow_interval({&f})) / 1e6, 0.094, 0.03);
  EXPECT_EQ(idle_slope_flow_interval({}), rat(0));
}

TEST(IdleSlopeFlowInterval, CanSignalIsBelowOneMegabit) {
  auto t = make_chain(1, 1'000'000'000);
  auto f = make_flow(*t, 0, "src", {"dst"}, (64 + 28 + 43) * 8, 100'000'000);
  EXPECT_LT(idle_slope_flow_interval({&f}), rat(1'000'000));
}

TEST(DelayBudgetSlope, ClosedFormOnEmptyQueue) {
  std::vector<FlowLoad> f{{rat(10'000), rat(1'000'000), rat(0)}};
  Rational s = delay_budget_idle_slope(f, rat(1, 1000), rat(1, 10'000));
  EXPECT_EQ(s, rat(10'000) / rat(9, 10'000));
  EXPECT_NEAR(to_double(s) / 1e6, 11.11, 0.01);
}

TEST(DelayBudgetSlope, NeverBelowRateAndInfeasibleBelowLatency) {
  std::vector<FlowLoad> f{{rat(100), rat(50'000'000), rat(0)}};
  EXPECT_EQ(delay_budget_idle_slope(f, rat(1), rat(0)), rat(50'000'000));
  EXPECT_THROW(delay_budget_idle_slope(f, rat(1, 10'000), rat(1, 10'000)), BudgetInfeasibleError);
  EXPECT_EQ(delay_budget_idle_slope({}, rat(1, 10'000), rat(1, 10'000)), rat(0));
}

TEST(QwcQueueDelay, NoFanIn) {
  PortContext p{100'000'000, 12336, 0, rat(0)};
  EXPECT_EQ(qwc_queue_delay(TrafficClass::A, p, rat(75'000'000), 1), rat(12336, 100'000'000));
}

TEST(QwcQueueDelay, FanInAddsTwiceOneFramePerOtherInput) {
  PortContext p{100'000'000, 12336, 0, rat(0)};
  Rational id = rat(75'000'000);
  EXPECT_EQ(qwc_queue_delay(TrafficClass::A, p, id, 4), rat(12336, 100'000'000) + 2 * rat(3 * 12336) / id);
}

TEST(QwcQueueDelay, ClassBWithIdleSibling) {
  PortContext p{100'000'000, 12336, 4000, rat(0)};
  EXPECT_EQ(qwc_queue_delay(TrafficClass::B, p, rat(1'000'000), 1), rat(12336 + 4000, 100'000'000));
}

TEST(QwcQueueDelay, AggregateQueueIgnoresChainLength) {
  std::vector<Rational> seen;
  for (int m : {1, 5, 15}) {
    (void)m;
    PortContext p{100'000'000, 12336, 2344, rat(0)};
    seen.push_back(qwc_queue_delay(TrafficClass::A, p, rat(75'008'000), 5));
  }
  EXPECT_EQ(seen[0], seen[1]);
  EXPECT_EQ(seen[1], seen[2]);
}

TEST(Admission, DelayBudgetSingleHop) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, test::unit_constants(), Scheme::DelayBudget);
  s.set_budgets(test::uniform_budgets(*t, rat(1, 1000)));
  auto f = make_flow(*t, 0, "src", {"dst"}, 10'000, 10'000'000, TrafficClass::A, 5'000'000);
  auto r = admit(s, f);
  ASSERT_TRUE(r.accepted) << r.detail;
  QueueId q = t->queue_of(f.paths[0].links[1], TrafficClass::A);
  Rational latency = rat(12336, 100'000'000);
  EXPECT_EQ(s.queue(q).idle_slope, Rational(ceil_z(rat(10'000) / (rat(1, 1000) - latency))));
  ASSERT_TRUE(r.bounds.at(0).independent);
  // Static part: host link frame time + one forwarding/propagation set (zero here).
  Rational host_tx = rat(10'000, 100'000'000);
  EXPECT_EQ(*r.bounds.at(0).independent, rat(1, 1000) + host_tx);
  EXPECT_LE(r.bounds.at(0).current, *r.bounds.at(0).independent);
}

TEST(Admission, BudgetSumAboveDeadlineIsRejected) {
  auto t = make_chain(3, 100'000'000);
  NetworkState s(t, test::unit_constants(), Scheme::DelayBudget);
  s.set_budgets(test::uniform_budgets(*t, rat(1, 1000)));
  auto f = make_flow(*t, 0, "src", {"dst"}, 10'000, 10'000'000, TrafficClass::A, 2'000'000);
  NetworkState before = s;
  auto r = admit(s, f);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, RejectReason::DeadlineViolated);
  EXPECT_TRUE(s == before);
}

TEST(Admission, MissingBudgetAndInfeasibleBudget) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, test::unit_constants(), Scheme::DelayBudget);
  auto f = make_flow(*t, 0, "src", {"dst"}, 10'000, 10'000'000);
  EXPECT_EQ(reserve(s, f).reason, RejectReason::MissingBudget);
  s.set_budgets(test::uniform_budgets(*t, rat(100, 1'000'000)));
  EXPECT_EQ(reserve(s, f).reason, RejectReason::BudgetInfeasible);
}

TEST(Admission, PortCapAndNoRoute) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, NetworkConstants{}, Scheme::FlowInterval);
  auto big = make_flow(*t, 0, "src", {"dst"}, 80'000, 1'000'000);  // 80 Mbit/s > 75 % of C
  auto r = reserve(s, big);
  EXPECT_EQ(r.reason, RejectReason::PortCapExceeded);
  FlowSpec empty = big;
  empty.paths.clear();
  EXPECT_EQ(reserve(s, empty).reason, RejectReason::NoRoute);
}

TEST(Admission, MissingContract) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, NetworkConstants{}, Scheme::CMI);
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 1'000'000);
  f.contract.interval = 0;
  EXPECT_EQ(reserve(s, f).reason, RejectReason::MissingContract);
}

TEST(Admission, StateEqualityAfterAcceptAndTeardown) {
  auto t = make_chain(2, 100'000'000);
  NetworkState s(t, NetworkConstants{}, Scheme::CMI);
  NetworkState empty = s;
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 125'000);
  ASSERT_TRUE(admit(s, f).accepted);
  EXPECT_FALSE(s == empty);
  teardown(s, 0);
  EXPECT_TRUE(s == empty);
  EXPECT_THROW(teardown(s, 0), ModelError);
}

TEST(Teardown, LastFlowReturnsIdleSlopeToZero) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, NetworkConstants{}, Scheme::FlowInterval);
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 1'000'000);
  ASSERT_TRUE(admit(s, f).accepted);
  QueueId q = t->queue_of(f.paths[0].links[1], TrafficClass::A);
  EXPECT_EQ(s.queue(q).idle_slope, rat(8'000'000));
  teardown(s, 0);
  EXPECT_EQ(s.queue(q).idle_slope, rat(0));
  EXPECT_EQ(s.queue(q).max_frame, 0);
}

TEST(Teardown, FlowIntervalDropsByTheRemovedRate) {
  auto t = make_chain(1, 100'000'000, 0, 1);
  NetworkState s(t, NetworkConstants{}, Scheme::FlowInterval);
  auto f1 = make_flow(*t, 0, "src", {"dst"}, 8000, 1'000'000);
  auto f2 = make_flow(*t, 1, "h1", {"dst"}, 12'000, 3'000'000, TrafficClass::A, 0, 2);
  ASSERT_TRUE(admit(s, f1).accepted);
  ASSERT_TRUE(admit(s, f2).accepted);
  QueueId q = t->queue_of(f1.paths[0].links[1], TrafficClass::A);
  Rational before = s.queue(q).idle_slope;
  teardown(s, 1);
  EXPECT_EQ(before - s.queue(q).idle_slope, rat(12'000 * 2) * rat(1'000'000'000, 3'000'000));
}

TEST(Bounds, SingleHopBoundIsTheQueueDelay) {
  auto t = make_chain(1, 100'000'000);
  NetworkState s(t, test::unit_constants(), Scheme::DelayBudget);
  s.set_budgets(test::uniform_budgets(*t, rat(4, 10'000)));
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 1'000'000);
  std::map<QueueId, Rational> d{{t->queue_of(f.paths[0].links[1], TrafficClass::A), rat(4, 10'000)}};
  EXPECT_EQ(e2e_bound(*t, f, d, false, false), rat(4, 10'000));
}

TEST(Bounds, QwcAddsOwnTransmissionPerCbsHop) {
  auto t = make_chain(2, 100'000'000, 8'000);
  NetworkState s(t, NetworkConstants{}, Scheme::CMI);
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 125'000);
  auto r = admit(s, f);
  ASSERT_TRUE(r.accepted);
  Rational tq = rat(12336, 100'000'000);
  Rational tx = rat(8000, 100'000'000);
  // Host hop: tx + forwarding. Two CBS hops: T_q + tx each, one more forwarding.
  EXPECT_EQ(r.bounds.at(0).current, tx + 2 * rat(8, 1'000'000) + 2 * (tq + tx));
}

TEST(Compare, DelayBudgetSlopeAtLeastFlowInterval) {
  auto t = make_chain(1, 100'000'000);
  auto f = make_flow(*t, 0, "src", {"dst"}, 8000, 10'000'000, TrafficClass::A, 1'000'000);
  std::map<Scheme, Rational> slope;
  for (auto scheme : {Scheme::CMI, Scheme::FlowInterval, Scheme::DelayBudget}) {
    NetworkState s(t, NetworkConstants{}, scheme);
    s.set_budgets(test::uniform_budgets(*t, rat(5, 10'000)));
    auto r = admit(s, f);
    ASSERT_TRUE(r.accepted) << to_string(scheme) << ": " << r.detail;
    slope[scheme] = s.queue(t->queue_of(f.paths[0].links[1], TrafficClass::A)).idle_slope;
  }
  EXPECT_GE(slope[Scheme::DelayBudget], slope[Scheme::FlowInterval]);
  EXPECT_GE(slope[Scheme::CMI], slope[Scheme::FlowInterval]);
}

// Property: the closed-form idle slope, rounded up, is the bisection minimum.
TEST(DelayBudgetSlopeProperty, ClosedFormMatchesBisection) {
  std::mt19937_64 rng(0xD1CE);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    std::int64_t capacity = std::vector<std::int64_t>{100'000'000, 1'000'000'000, 10'000'000'000}[pick(0, 2)];
    int n = static_cast<int>(pick(1, 12));
    std::vector<FlowLoad> flows;
    for (int k = 0; k < n; ++k) {
      Rational frame = rat(pick(85 * 8, 1542 * 8));
      Rational rate = frame * rat(1'000'000'000, pick(125'000, 100'000'000));
      flows.push_back(FlowLoad{frame * rat(pick(1, 4)), rate, rat(pick(0, 5'000'000), 1'000'000'000)});
    }
    Rational latency = rat(12336, capacity);
    Rational budget = latency + rat(pick(1, 10'000'000), 1'000'000'000);
    Rational closed = delay_budget_idle_slope(flows, budget, latency);
    auto bisected = oracle::bisect_idle_slope(flows, budget, latency, capacity);
    if (!bisected) {
      EXPECT_GT(closed, rat(capacity)) << "case " << i;
      continue;
    }
    ++checked;
    std::int64_t rounded = ceil_i64(closed);
    EXPECT_LE(std::llabs(rounded - *bisected), 1) << "case " << i;
  }
  EXPECT_GT(checked, 500);
}

// Property: rejected admissions leave the state and its flow tables untouched.
TEST(AdmissionProperty, RejectionsAreAtomic) {
  std::mt19937_64 rng(0xA70);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  auto t = make_chain(4, 100'000'000, 8'000, 3);
  std::vector<std::string> pubs{"src", "h1", "h2", "h3"};
  int rejected = 0;
  for (auto scheme : {Scheme::CMI, Scheme::FlowInterval, Scheme::DelayBudget}) {
    NetworkState s(t, NetworkConstants{}, scheme);
    s.set_budgets(test::uniform_budgets(*t, rat(5, 10'000)));
    int id = 0;
    // Partially fill, then hammer with flows that must fail.
    for (int k = 0; k < 4; ++k) admit(s, make_flow(*t, id++, pubs[static_cast<std::size_t>(k)], {"dst"}, 8000, 1'000'000,
                                                   TrafficClass::A, 10'000'000));
    for (int k = 0; k < 334; ++k) {
      FlowSpec f;
      int mode = static_cast<int>(pick(0, 3));
      const auto& pub = pubs[static_cast<std::size_t>(pick(0, 3))];
      if (mode == 0) {
        f = make_flow(*t, id++, pub, {"dst"}, pick(60'000, 120'000), 1'000'000);  // beyond the port cap
      } else if (mode == 1) {
        f = make_flow(*t, id++, pub, {"dst"}, 8000, 1'000'000, TrafficClass::A, pick(1, 2'000'000));  // tight deadline
        if (scheme != Scheme::DelayBudget) f.contract.max_burst = 0;
      } else if (mode == 2) {
        f = make_flow(*t, id++, pub, {"dst"}, 8000, 1'000'000);
        f.contract.rate = 0;
      } else {
        f = make_flow(*t, id++, pub, {"dst"}, 8000, 1'000'000);
        f.paths.clear();
      }
      NetworkState before = s;
      auto r = admit(s, f);
      if (r.accepted) {
        ADD_FAILURE() << "expected a rejection, mode " << mode;
        continue;
      }
      ++rejected;
      EXPECT_TRUE(s == before);
      EXPECT_EQ(s.flows().count(f.id), 0u);
    }
  }
  EXPECT_GE(rejected, 1000);
}

}  // namespace
}  // namespace tsnr
