#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsnr/model.hpp"
#include "tsnr/netcalc.hpp"

namespace tsnr {

enum class Scheme : std::uint8_t { CMI, FlowInterval, DelayBudget };

const char* to_string(Scheme s);  // "cmi", "fi", "db"
Scheme parse_scheme(const std::string& s);

enum class RejectReason : std::uint8_t {
  None,
  PortCapExceeded,
  BudgetInfeasible,   // D_q <= T_q
  DeadlineViolated,
  Unstable,
  MissingContract,
  MissingBudget,
  NoRoute,
};

const char* to_string(RejectReason r);

struct FlowBounds {
  Rational current;                     // Q-WC (cmi, fi) or DB-WC current (db), seconds
  std::optional<Rational> independent;  // DB-WC independent, db only
};

struct AdmissionResult {
  bool accepted = false;
  RejectReason reason = RejectReason::None;
  std::string detail;
  std::map<QueueId, Rational> idle_slopes;  // new configured value for every touched queue
  std::map<int, FlowBounds> bounds;         // every flow sharing a touched queue
};

// Reservation state of the whole network. Mutated only through admit/teardown, which
// validate on a copy and commit on success.
class NetworkState {
 public:
  NetworkState(std::shared_ptr<const Topology> topology, NetworkConstants constants, Scheme scheme);

  const Topology& topology() const { return *topology_; }
  std::shared_ptr<const Topology> topology_ptr() const { return topology_; }
  const NetworkConstants& constants() const { return constants_; }
  Scheme scheme() const { return scheme_; }
  const std::map<QueueId, QueueState>& queues() const { return queues_; }
  const QueueState& queue(const QueueId& q) const;
  const std::map<int, FlowSpec>& flows() const { return flows_; }

  void set_budgets(const std::map<QueueId, Rational>& budgets);

  // Port-level inputs for T_q on `port`.
  PortContext port_context(PortId port) const;

  bool operator==(const NetworkState& other) const;

 private:
  friend struct StateAccess;
  friend void teardown(NetworkState& state, int flow_id);

  std::shared_ptr<const Topology> topology_;
  NetworkConstants constants_;
  Scheme scheme_;
  std::map<QueueId, QueueState> queues_;
  std::map<int, FlowSpec> flows_;
};

// Observation-window idle slopes.
Rational idle_slope_cmi(const std::vector<const FlowSpec*>& flows, Nanos cmi);
Rational idle_slope_flow_interval(const std::vector<const FlowSpec*>& flows);

// Smallest idle slope with d_q(idle slope) <= budget, never below the summed rate.
// Throws BudgetInfeasibleError when budget <= service latency.
class BudgetInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
Rational delay_budget_idle_slope(const std::vector<FlowLoad>& flows, const Rational& budget_s,
                                 const Rational& service_latency_s);

// Standard worst case per queue: queueing + fan-in + permanent buffer (= fan-in).
Rational qwc_queue_delay(TrafficClass cls, const PortContext& port, const Rational& idle_slope_bps,
                         int fan_in_count);

// Number of distinct ingress links feeding queue q over the given flows.
int fan_in_count(const Topology& topology, const QueueId& q, const std::vector<const FlowSpec*>& flows);

// Per-flow load at queue q, with upstream budgets taken from the state.
std::vector<FlowLoad> queue_loads(const NetworkState& state, const QueueId& q,
                                  const std::vector<const FlowSpec*>& flows);

// Propagation, switch forwarding and the first-hop transmission of the flow's own frame.
Rational static_path_delay(const Topology& topology, const FlowSpec& flow, const Path& path);

// Max over subscribers of the summed per-queue delays, optionally adding static terms and
// the own-frame transmission at every CBS hop. Throws ModelError on a missing queue entry.
Rational e2e_bound(const Topology& topology, const FlowSpec& flow,
                   const std::map<QueueId, Rational>& queue_delay, bool include_static,
                   bool own_transmission_per_hop);

// Per-flow bounds for the state as it stands.
FlowBounds flow_bounds(const NetworkState& state, const FlowSpec& flow);

// Pure admission check for a new flow, or for a flow whose subscriber set grew.
AdmissionResult reserve(const NetworkState& state, const FlowSpec& flow);

// reserve + commit on acceptance. A rejection leaves `state` untouched.
AdmissionResult admit(NetworkState& state, const FlowSpec& flow);
void commit(NetworkState& state, const FlowSpec& flow, const AdmissionResult& result);

// Removes a flow and recomputes the idle slopes it touched. Throws ModelError if unknown.
void teardown(NetworkState& state, int flow_id);

}  // namespace tsnr
