#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "tsnr/report.hpp"

namespace tsnr {
namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

RunOptions analyze_only() {
  RunOptions o;
  o.mode = RunMode::Analyze;
  return o;
}

TEST(Reports, EmptyScenarioWritesHeadersOnly) {
  auto r = run_scenario(parse_scenario("{}"), analyze_only());
  EXPECT_EQ(r.accepted, 0);
  EXPECT_EQ(r.rejected, 0);
  std::vector<RunOutcome> runs{r};
  using Writer = void (*)(std::ostream&, const std::vector<RunOutcome>&);
  for (Writer w : {&write_idle_slopes, &write_bounds, &write_e2e, &write_queues, &write_setup, &write_comparison}) {
    std::ostringstream o;
    w(o, runs);
    auto ls = lines(o.str());
    ASSERT_GE(ls.size(), 2u);
    EXPECT_EQ(ls[0].rfind("# schema=1 generated=", 0), 0u) << ls[0];
    EXPECT_EQ(ls.size(), 2u) << o.str();
  }
}

TEST(Reports, MicrosTruncate) {
  EXPECT_EQ(micros(Nanos{1'234'5678}), "12345.678");
  EXPECT_EQ(micros(rat(1, 3000)), "333.333");
}

TEST(Motivation, BoundFallsWithIdleSlope) {
  MotivationParams p;
  std::vector<std::int64_t> slopes;
  for (std::int64_t m = 1; m <= 100; ++m) slopes.push_back(m * 1'000'000);
  auto rows = motivation_sweep(p, slopes);
  ASSERT_EQ(rows.size(), 200u);
  for (bool second : {false, true}) {
    std::int64_t min = motivation_min_slope(p, second);
    std::optional<Rational> prev;
    for (const auto& r : rows) {
      if (r.second_flow != second) continue;
      EXPECT_EQ(r.bound.has_value(), r.idle_slope >= min) << r.idle_slope;
      if (!r.bound) continue;
      if (prev) EXPECT_LE(*r.bound, *prev);
      prev = r.bound;
    }
  }
  // The competing flow never helps F1.
  for (std::int64_t s : {5'000'000, 20'000'000, 100'000'000})
    EXPECT_GE(motivation_bound(p, s, true), motivation_bound(p, s, false));
  std::ostringstream o;
  write_motivation(o, rows);
  EXPECT_EQ(lines(o.str()).size(), 202u);
  EXPECT_NE(o.str().find("unbounded"), std::string::npos);
}

TEST(Motivation, SlopeForTargetIsMinimal) {
  MotivationParams p;
  auto target = rat(1, 1000);
  auto s = motivation_slope_for(p, target, true);
  EXPECT_LT(motivation_bound(p, s, true), target);
  if (s > motivation_min_slope(p, true)) EXPECT_GE(motivation_bound(p, s - 1, true), target);
  EXPECT_THROW(motivation_slope_for(p, rat(0), true), ConfigError);
}

TEST(Motivation, SimulatedF1StaysUnderItsBound) {
  MotivationParams p;
  p.second_flow = false;
  auto s = motivation_scenario(p);
  s.sim.duration = 50'000'000;
  auto r = run_scenario(s, RunOptions{});
  ASSERT_TRUE(r.sim);
  EXPECT_TRUE(r.violations.empty());
  ASSERT_FALSE(r.flows.empty());
  for (const auto& fd : r.sim->flows) {
    ASSERT_GT(fd.e2e.count, 0);
    for (const auto& f : r.flows)
      if (f.flow == fd.flow) EXPECT_LE(seconds_from_ns(fd.e2e.max), f.bounds.current);
  }
}

TEST(StudyAnalysis, CmiStageSlopeIndependentOfInputs) {
  for (int n = 2; n <= 13; ++n) {
    StudyParams p;
    p.inputs = n;
    p.scheme = Scheme::CMI;
    auto r = run_scenario(study_scenario(p), analyze_only());
    EXPECT_EQ(r.rejected, 0) << n;
    // Stage queues on the publisher paths; reverse-direction queues carry cross traffic only.
    std::set<PortId> forward;
    const auto& t = *r.topology;
    for (int i = 1; i <= n; ++i) {
      auto path = shortest_path(t, t.node_id("P" + std::to_string(i)), t.node_id("SUB"));
      for (PortId l : path)
        if (t.node(t.link(l).source).role == "stage") forward.insert(l);
    }
    int stages = 0;
    for (const auto& q : r.queues) {
      if (!forward.count(q.queue.port) || q.queue.cls != TrafficClass::A) continue;
      ++stages;
      double mbps = to_double(q.idle_slope) / 1e6;
      EXPECT_NEAR(mbps, 75.0, 0.75) << n;
    }
    EXPECT_EQ(stages, n * 5) << n;
  }
}

TEST(Compare, SingleHopAllSchemesAdmit) {
  auto s = parse_scenario(R"({
    "topology": {"nodes": [{"name": "a", "kind": "host"}, {"name": "sw", "kind": "switch"}, {"name": "b", "kind": "host"}],
                 "links": [{"a": "a", "b": "sw", "capacity_bps": 100000000, "forwarding_ns": 8000},
                           {"a": "sw", "b": "b", "capacity_bps": 100000000, "forwarding_ns": 8000}]},
    "budgets": {"default_us": 500},
    "services": [{"name": "s", "publisher": "a", "qos": {"max_payload": 900, "min_interval_us": 10000, "priority": 3,
                  "deadline_us": 1000}, "subscribers": ["b"]}],
    "sim": {"duration_ms": 50}
  })");
  auto runs = compare_schemes(s, analyze_only());
  ASSERT_EQ(runs.size(), 3u);
  for (const auto& r : runs) {
    EXPECT_EQ(r.accepted, 1);
    ASSERT_EQ(r.queues.size(), 1u);
  }
  EXPECT_EQ(runs[0].scenario.scheme, Scheme::CMI);
  EXPECT_GE(runs[2].queues[0].idle_slope, runs[1].queues[0].idle_slope);
  EXPECT_GE(runs[0].queues[0].idle_slope, runs[1].queues[0].idle_slope);
  std::ostringstream o;
  write_comparison(o, runs);
  EXPECT_GT(lines(o.str()).size(), 2u);
}

TEST(Compare, OversubscribedPortRejectsWithReason) {
  // Each frame is about 12 kbit per 100 us, above the 75% admission share of 100 Mbit/s.
  auto s = parse_scenario(R"({
    "topology": {"nodes": [{"name": "a", "kind": "host"}, {"name": "sw", "kind": "switch"}, {"name": "b", "kind": "host"}],
                 "links": [{"a": "a", "b": "sw", "capacity_bps": 100000000},
                           {"a": "sw", "b": "b", "capacity_bps": 100000000}]},
    "budgets": {"default_us": 500},
    "services": [{"name": "s", "publisher": "a", "qos": {"max_payload": 1400, "min_interval_us": 100, "priority": 3},
                  "subscribers": ["b"]}]
  })");
  auto runs = compare_schemes(s, analyze_only());
  for (const auto& r : runs) {
    EXPECT_EQ(r.accepted, 0);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].outcome, SubscriptionOutcome::RejectedByAdmission);
    EXPECT_NE(r.records[0].reason, RejectReason::None);
    std::ostringstream o;
    write_summary(o, {r});
    EXPECT_NE(o.str().find("rejected: 1"), std::string::npos);
  }
}

}  // namespace
}  // namespace tsnr
