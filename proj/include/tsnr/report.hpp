#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsnr/scenario.hpp"
#include "tsnr/sim.hpp"

namespace tsnr {

enum class RunMode : std::uint8_t { Analyze, Simulate, Both };
RunMode parse_mode(const std::string& s);

struct RunOptions {
  RunMode mode = RunMode::Both;
  std::optional<Scheme> scheme;
  std::optional<std::uint64_t> seed;
  std::ostream* trace = nullptr;
};

struct FlowReport {
  int flow = -1;
  std::string name;
  std::string family;
  TrafficClass cls = TrafficClass::A;
  Nanos deadline = 0;
  std::vector<NodeId> subscribers;
  FlowBounds bounds;
  bool contract_traffic = true;  // data plane sends what was negotiated
};

struct QueueReport {
  QueueId queue;
  Rational idle_slope;
  std::optional<Rational> budget;
  std::optional<Rational> analysis_delay;  // Q-WC d_q (cmi, fi) or current d_q (db), seconds
  int flows = 0;
};

struct RunOutcome {
  std::string label;
  Scenario scenario;
  std::shared_ptr<const Topology> topology;
  std::vector<SubscriptionRecord> records;
  std::vector<IdleSlopeStep> idle_history;
  std::vector<FlowReport> flows;
  std::vector<QueueReport> queues;
  Nanos setup_span = 0;
  std::optional<SimResult> sim;
  std::vector<std::string> violations;  // simulation invariants, bound soundness, control trace
  int accepted = 0;
  int rejected = 0;
};

// Negotiates every subscription through the control plane, evaluates bounds and, unless
// analysis only, simulates the data plane. Throws ConfigError on an invalid scenario.
RunOutcome run_scenario(const Scenario& scenario, const RunOptions& options);

// One run per scheme on the same scenario.
std::vector<RunOutcome> compare_schemes(const Scenario& scenario, const RunOptions& options);

// Bound on the F1 frame in the two-flow motivation network, per idle slope of the shared queue.
struct MotivationRow {
  std::int64_t idle_slope = 0;
  bool second_flow = false;
  std::optional<Rational> bound;  // nullopt when the idle slope is below the summed rate
};
Rational motivation_bound(const MotivationParams& p, std::int64_t idle_slope, bool second_flow);
std::int64_t motivation_min_slope(const MotivationParams& p, bool second_flow);  // ceil of the summed rate
// Smallest whole idle slope whose bound is strictly below `target_s`.
std::int64_t motivation_slope_for(const MotivationParams& p, const Rational& target_s, bool second_flow);
Rational motivation_active_rate(const MotivationParams& p, bool second_flow);
std::vector<MotivationRow> motivation_sweep(const MotivationParams& p, const std::vector<std::int64_t>& slopes);

// CSV writers. Every file starts with "# schema=1 generated=<UTC time>".
std::string report_header();
void write_idle_slopes(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_bounds(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_e2e(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_queues(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_setup(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_summary(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_comparison(std::ostream& out, const std::vector<RunOutcome>& runs);
void write_motivation(std::ostream& out, const std::vector<MotivationRow>& rows);

// Writes all per-run files into `dir` (created when missing).
void write_reports(const std::string& dir, const std::vector<RunOutcome>& runs);

// Microseconds with three decimals, truncated.
std::string micros(Nanos ns);
std::string micros(const Rational& seconds);

}  // namespace tsnr
