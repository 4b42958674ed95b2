#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsnr/model.hpp"

namespace tsnr {

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BudgetProvenance : std::uint8_t { Manual, Heuristic };

struct BudgetPlan {
  std::map<QueueId, Rational> budgets;  // seconds
  BudgetProvenance provenance = BudgetProvenance::Manual;
};

struct QueueBudgetOverride {
  std::string node;                  // switch owning the egress port
  std::string next;                  // node at the other end of the link
  std::optional<TrafficClass> cls;   // both classes when absent
  Nanos budget = 0;
};

struct BudgetConfig {
  bool automatic = false;
  std::map<std::string, Nanos> role_defaults;  // keyed by the switch's role
  std::vector<QueueBudgetOverride> queues;
  std::optional<Nanos> default_budget;
  Rational utilization_target = rat(3, 4);
  int iterations = 8;
};

// T_q with no sibling reservation (class B assumes a class A frame of L_max).
Rational min_service_latency(const Topology& topology, const NetworkConstants& constants, const QueueId& q);

BudgetPlan manual_budgets(const Topology& topology, const NetworkConstants& constants, const BudgetConfig& config);

Rational uniform_split(Nanos min_deadline, int max_path_length);

// Uniform split of the smallest deadline over the longest path, then a fixed number of
// relief rounds: a queue whose solved idle slope exceeds target * C grows its budget, the
// other queues of each affected path shrink so every path stays within its deadline.
BudgetPlan heuristic_budgets(const Topology& topology, const NetworkConstants& constants,
                             const std::vector<FlowSpec>& anticipated, int max_path_length,
                             const Rational& utilization_target, int iterations);

// Heuristic when `config.automatic`, with every manual entry taking precedence.
BudgetPlan plan_budgets(const Topology& topology, const NetworkConstants& constants, const BudgetConfig& config,
                        const std::vector<FlowSpec>& anticipated);

}  // namespace tsnr
