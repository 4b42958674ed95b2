#include "tsnr/budget.hpp"

#include <algorithm>
#include <set>

#include "tsnr/netcalc.hpp"
#include "tsnr/reservation.hpp"

namespace tsnr {

namespace {

std::string queue_name(const Topology& t, const QueueId& q) {
  const auto& l = t.link(q.port);
  return t.node(l.source).name + "->" + t.node(l.destination).name + "/" + to_string(q.cls);
}

}  // namespace

Rational min_service_latency(const Topology& topology, const NetworkConstants& constants, const QueueId& q) {
  PortContext ctx;
  ctx.capacity_bps = topology.link(q.port).capacity_bps;
  ctx.l_max = constants.l_max;
  ctx.class_a_max_frame = constants.l_max;
  return cbs_service_latency(q.cls, ctx);
}

BudgetPlan manual_budgets(const Topology& topology, const NetworkConstants& constants, const BudgetConfig& config) {
  BudgetPlan plan;
  plan.provenance = BudgetProvenance::Manual;
  for (const auto& q : topology.cbs_queues()) {
    const auto& link = topology.link(q.port);
    std::optional<Nanos> value;
    for (const auto& o : config.queues) {
      if (o.node != topology.node(link.source).name || o.next != topology.node(link.destination).name) continue;
      if (o.cls && *o.cls != q.cls) continue;
      value = o.budget;
    }
    if (!value) {
      auto it = config.role_defaults.find(topology.node(q.node).role);
      if (it != config.role_defaults.end()) value = it->second;
    }
    if (!value) value = config.default_budget;
    if (!value) throw BudgetError("no delay budget covers queue " + queue_name(topology, q));
    Rational d = seconds_from_ns(*value);
    if (d <= min_service_latency(topology, constants, q))
      throw BudgetError("delay budget of queue " + queue_name(topology, q) + " does not exceed its service latency");
    plan.budgets[q] = d;
  }
  return plan;
}

Rational uniform_split(Nanos min_deadline, int max_path_length) {
  if (max_path_length <= 0) throw BudgetError("path length must be positive");
  return seconds_from_ns(min_deadline) / max_path_length;
}

namespace {

struct Demand {
  Rational latency;
  std::optional<Rational> idle_slope;  // nullopt when the budget is below the latency
};

std::map<QueueId, Demand> solve_demands(const Topology& topo, const NetworkConstants& constants,
                                        const std::map<QueueId, std::vector<const FlowSpec*>>& at,
                                        const std::map<QueueId, Rational>& budgets) {
  std::map<QueueId, Demand> out;
  for (auto cls : {TrafficClass::A, TrafficClass::B}) {
    for (const auto& [q, flows] : at) {
      if (q.cls != cls) continue;
      PortContext ctx;
      ctx.capacity_bps = topo.link(q.port).capacity_bps;
      ctx.l_max = constants.l_max;
      if (cls == TrafficClass::B) {
        QueueId a{q.node, q.port, TrafficClass::A};
        auto it = out.find(a);
        if (it != out.end()) {
          if (!it->second.idle_slope) {
            out[q] = Demand{Rational(0), std::nullopt};
            continue;
          }
          ctx.class_a_idle_slope = *it->second.idle_slope;
          for (const auto* f : at.at(a)) ctx.class_a_max_frame = std::max(ctx.class_a_max_frame, f->contract.max_frame_bits);
          if (ctx.class_a_idle_slope >= rat(ctx.capacity_bps)) {
            out[q] = Demand{Rational(0), std::nullopt};
            continue;
          }
        }
      }
      Demand d;
      d.latency = cbs_service_latency(cls, ctx);
      std::vector<FlowLoad> loads;
      for (const auto* f : flows) {
        Rational up(0);
        for (const auto& u : f->upstream_prefix(topo, q)) up += budgets.at(u);
        loads.push_back(FlowLoad{rat(f->contract.max_burst), f->contract.rate, up});
      }
      if (budgets.at(q) > d.latency) d.idle_slope = delay_budget_idle_slope(loads, budgets.at(q), d.latency);
      out[q] = d;
    }
  }
  return out;
}

}  // namespace

BudgetPlan heuristic_budgets(const Topology& topology, const NetworkConstants& constants,
                             const std::vector<FlowSpec>& anticipated, int max_path_length,
                             const Rational& utilization_target, int iterations) {
  std::map<QueueId, std::vector<const FlowSpec*>> at;
  Nanos min_deadline = 0;
  int longest = 0;
  for (const auto& f : anticipated) {
    if (f.cls == TrafficClass::BestEffort) continue;
    if (f.deadline <= 0) continue;
    min_deadline = min_deadline == 0 ? f.deadline : std::min(min_deadline, f.deadline);
    for (const auto& q : f.queues(topology)) at[q].push_back(&f);
    for (const auto& p : f.paths) {
      int n = 0;
      for (PortId l : p.links) n += topology.is_cbs_port(l) ? 1 : 0;
      longest = std::max(longest, n);
    }
  }
  if (at.empty() || min_deadline == 0) throw BudgetError("no anticipated flow with a deadline and a CBS path");
  int h = max_path_length > 0 ? max_path_length : longest;
  Rational initial = uniform_split(min_deadline, h);

  BudgetPlan plan;
  plan.provenance = BudgetProvenance::Heuristic;
  for (const auto& q : topology.cbs_queues()) plan.budgets[q] = initial;
  for (const auto& [q, flows] : at)
    if (initial <= min_service_latency(topology, constants, q))
      throw BudgetError("uniform budget does not exceed the service latency of queue " + queue_name(topology, q));

  auto& budgets = plan.budgets;
  auto fit_paths = [&](const std::set<QueueId>& grown) {
    std::map<QueueId, Rational> cap;
    for (const auto& f : anticipated) {
      if (f.cls == TrafficClass::BestEffort || f.deadline <= 0) continue;
      for (const auto& p : f.paths) {
        Rational avail = seconds_from_ns(f.deadline) - static_path_delay(topology, f, p);
        std::vector<QueueId> qs;
        for (PortId l : p.links)
          if (topology.is_cbs_port(l)) qs.push_back(topology.queue_of(l, f.cls));
        Rational fixed(0), donors(0);
        for (const auto& q : qs) (grown.count(q) ? fixed : donors) += budgets.at(q);
        if (fixed + donors <= avail) continue;
        Rational donor_scale = donors > 0 && avail > fixed ? (avail - fixed) / donors : Rational(0);
        Rational all_scale = sgn(avail) > 0 ? avail / (fixed + donors) : Rational(0);
        for (const auto& q : qs) {
          Rational v = budgets.at(q) * (grown.count(q) || donor_scale == 0 ? all_scale : donor_scale);
          auto it = cap.find(q);
          if (it == cap.end() || v < it->second) cap[q] = v;
        }
      }
    }
    for (const auto& [q, v] : cap) budgets[q] = std::min(budgets[q], v);
  };

  fit_paths({});
  for (int round = 0; round < iterations; ++round) {
    auto demands = solve_demands(topology, constants, at, budgets);
    std::set<QueueId> grown;
    for (const auto& [q, d] : demands) {
      Rational target = utilization_target * rat(topology.link(q.port).capacity_bps);
      Rational& b = budgets[q];
      if (!d.idle_slope) {
        b = 2 * d.latency;
        grown.insert(q);
      } else if (*d.idle_slope > target) {
        b = d.latency + (b - d.latency) * (*d.idle_slope / target);
        grown.insert(q);
      }
    }
    if (grown.empty()) break;
    fit_paths(grown);
  }

  for (const auto& [q, flows] : at)
    if (budgets.at(q) <= min_service_latency(topology, constants, q))
      throw BudgetError("no feasible budget for queue " + queue_name(topology, q));
  return plan;
}

BudgetPlan plan_budgets(const Topology& topology, const NetworkConstants& constants, const BudgetConfig& config,
                        const std::vector<FlowSpec>& anticipated) {
  if (!config.automatic) return manual_budgets(topology, constants, config);
  BudgetPlan plan = heuristic_budgets(topology, constants, anticipated, 0, config.utilization_target, config.iterations);
  for (const auto& q : topology.cbs_queues()) {
    const auto& link = topology.link(q.port);
    std::optional<Nanos> value;
    auto it = config.role_defaults.find(topology.node(q.node).role);
    if (it != config.role_defaults.end()) value = it->second;
    for (const auto& o : config.queues) {
      if (o.node != topology.node(link.source).name || o.next != topology.node(link.destination).name) continue;
      if (o.cls && *o.cls != q.cls) continue;
      value = o.budget;
    }
    if (value) plan.budgets[q] = seconds_from_ns(*value);
  }
  return plan;
}

}  // namespace tsnr
