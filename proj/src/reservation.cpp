#include "tsnr/reservation.hpp"

#include <algorithm>
#include <set>

namespace tsnr {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::CMI: return "cmi";
    case Scheme::FlowInterval: return "fi";
    case Scheme::DelayBudget: return "db";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "cmi" || s == "CMI") return Scheme::CMI;
  if (s == "fi" || s == "FI" || s == "flow_interval") return Scheme::FlowInterval;
  if (s == "db" || s == "DB" || s == "delay_budget") return Scheme::DelayBudget;
  throw ModelError("unknown scheme '" + s + "'");
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::PortCapExceeded: return "port_cap_exceeded";
    case RejectReason::BudgetInfeasible: return "budget_infeasible";
    case RejectReason::DeadlineViolated: return "deadline_violated";
    case RejectReason::Unstable: return "unstable";
    case RejectReason::MissingContract: return "missing_contract";
    case RejectReason::MissingBudget: return "missing_budget";
    case RejectReason::NoRoute: return "no_route";
  }
  return "?";
}

NetworkState::NetworkState(std::shared_ptr<const Topology> topology, NetworkConstants constants, Scheme scheme)
    : topology_(std::move(topology)), constants_(std::move(constants)), scheme_(scheme) {
  constants_.validate();
  for (const auto& q : topology_->cbs_queues()) {
    QueueState s;
    s.id = q;
    s.class_measurement_interval = constants_.cmi(q.cls);
    queues_.emplace(q, std::move(s));
  }
}

const QueueState& NetworkState::queue(const QueueId& q) const {
  auto it = queues_.find(q);
  if (it == queues_.end()) throw ModelError("not a CBS queue");
  return it->second;
}

void NetworkState::set_budgets(const std::map<QueueId, Rational>& budgets) {
  for (auto& [id, q] : queues_) {
    auto it = budgets.find(id);
    if (it == budgets.end()) q.delay_budget.reset();
    else q.delay_budget = it->second;
  }
}

PortContext NetworkState::port_context(PortId port) const {
  PortContext ctx;
  ctx.capacity_bps = topology_->link(port).capacity_bps;
  ctx.l_max = constants_.l_max;
  const auto& a = queue(topology_->queue_of(port, TrafficClass::A));
  ctx.class_a_max_frame = a.max_frame;
  ctx.class_a_idle_slope = a.idle_slope;
  return ctx;
}

bool NetworkState::operator==(const NetworkState& o) const {
  if (topology_ != o.topology_ || scheme_ != o.scheme_) return false;
  if (queues_.size() != o.queues_.size() || flows_.size() != o.flows_.size()) return false;
  for (auto a = queues_.begin(), b = o.queues_.begin(); a != queues_.end(); ++a, ++b) {
    const auto& x = a->second;
    const auto& y = b->second;
    if (a->first != b->first || x.idle_slope != y.idle_slope || x.delay_budget != y.delay_budget ||
        x.registered_flows != y.registered_flows || x.max_frame != y.max_frame ||
        x.class_measurement_interval != y.class_measurement_interval)
      return false;
  }
  for (auto a = flows_.begin(), b = o.flows_.begin(); a != flows_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    const auto& x = a->second;
    const auto& y = b->second;
    if (x.paths.size() != y.paths.size() || x.contract.rate != y.contract.rate ||
        x.contract.max_burst != y.contract.max_burst || x.deadline != y.deadline || x.cls != y.cls)
      return false;
    for (std::size_t i = 0; i < x.paths.size(); ++i)
      if (x.paths[i].subscriber != y.paths[i].subscriber || x.paths[i].links != y.paths[i].links) return false;
  }
  return true;
}

Rational idle_slope_cmi(const std::vector<const FlowSpec*>& flows, Nanos cmi) {
  Rational sum(0);
  for (const auto* f : flows) {
    const auto& c = f->contract;
    std::int64_t windows = std::max<std::int64_t>(1, (cmi + c.interval - 1) / c.interval);
    sum += rat(c.max_frame_bits * c.frames_per_interval * windows);
  }
  return sum * rat(kNanosPerSecond, cmi);
}

Rational idle_slope_flow_interval(const std::vector<const FlowSpec*>& flows) {
  Rational sum(0);
  for (const auto* f : flows) {
    const auto& c = f->contract;
    sum += rat(c.max_frame_bits * c.frames_per_interval) * rat(kNanosPerSecond, c.interval);
  }
  return sum;
}

Rational delay_budget_idle_slope(const std::vector<FlowLoad>& flows, const Rational& budget_s,
                                 const Rational& service_latency_s) {
  if (flows.empty()) return Rational(0);
  if (budget_s <= service_latency_s)
    throw BudgetInfeasibleError("delay budget does not exceed the service latency");
  Rational slope = shifted_burst_sum(flows) / (budget_s - service_latency_s);
  return std::max(slope, rate_sum(flows));
}

Rational qwc_queue_delay(TrafficClass cls, const PortContext& port, const Rational& idle_slope_bps,
                         int fan_in_count) {
  Rational c = rat(port.capacity_bps);
  Rational queueing;
  if (cls == TrafficClass::A) {
    queueing = rat(port.l_max) / c;
  } else if (cls == TrafficClass::B) {
    if (port.class_a_idle_slope >= c) throw UnboundedDelay("class A idle slope reaches link capacity");
    queueing = rat(port.l_max + port.class_a_max_frame) / (c - port.class_a_idle_slope);
  } else {
    throw std::invalid_argument("worst case is defined for class A and B only");
  }
  if (fan_in_count <= 1 || sgn(idle_slope_bps) <= 0) return queueing;
  Rational fan_in = rat(fan_in_count - 1) * rat(port.l_max) / idle_slope_bps;
  return queueing + 2 * fan_in;
}

int fan_in_count(const Topology& topology, const QueueId& q, const std::vector<const FlowSpec*>& flows) {
  std::set<PortId> inputs;
  for (const auto* f : flows)
    for (const auto& p : f->paths)
      for (std::size_t i = 0; i < p.links.size(); ++i)
        if (p.links[i] == q.port) inputs.insert(i == 0 ? -1 : p.links[i - 1]);
  (void)topology;
  return static_cast<int>(inputs.size());
}

std::vector<FlowLoad> queue_loads(const NetworkState& state, const QueueId& q,
                                  const std::vector<const FlowSpec*>& flows) {
  std::vector<FlowLoad> out;
  out.reserve(flows.size());
  for (const auto* f : flows) {
    Rational upstream(0);
    for (const auto& u : f->upstream_prefix(state.topology(), q)) {
      const auto& b = state.queue(u).delay_budget;
      if (b) upstream += *b;
    }
    out.push_back(FlowLoad{rat(f->contract.max_burst), f->contract.rate, upstream});
  }
  return out;
}

Rational static_path_delay(const Topology& topology, const FlowSpec& flow, const Path& path) {
  Rational total(0);
  for (PortId l : path.links) {
    const auto& link = topology.link(l);
    total += seconds_from_ns(link.propagation_delay);
    if (topology.node(link.destination).kind == NodeKind::Switch) total += seconds_from_ns(link.forwarding_delay);
    if (!topology.is_cbs_port(l) || flow.cls == TrafficClass::BestEffort)
      total += rat(flow.contract.max_frame_bits, link.capacity_bps);
  }
  return total;
}

Rational e2e_bound(const Topology& topology, const FlowSpec& flow, const std::map<QueueId, Rational>& queue_delay,
                   bool include_static, bool own_transmission_per_hop) {
  if (flow.paths.empty()) throw ModelError("flow '" + flow.name + "' has no path");
  Rational worst(0);
  for (const auto& p : flow.paths) {
    Rational total = include_static ? static_path_delay(topology, flow, p) : Rational(0);
    for (PortId l : p.links) {
      if (!topology.is_cbs_port(l)) continue;
      auto it = queue_delay.find(topology.queue_of(l, flow.cls));
      if (it == queue_delay.end()) throw ModelError("no delay for a queue on the path of '" + flow.name + "'");
      total += it->second;
      if (own_transmission_per_hop) total += rat(flow.contract.max_frame_bits, topology.link(l).capacity_bps);
    }
    worst = std::max(worst, total);
  }
  return worst;
}

namespace {

std::vector<const FlowSpec*> flows_at(const NetworkState& state, const QueueState& q) {
  std::vector<const FlowSpec*> out;
  out.reserve(q.registered_flows.size());
  for (int id : q.registered_flows) out.push_back(&state.flows().at(id));
  return out;
}

}  // namespace

FlowBounds flow_bounds(const NetworkState& state, const FlowSpec& flow) {
  const auto& topo = state.topology();
  if (flow.cls == TrafficClass::BestEffort) {
    Rational worst(0);
    for (const auto& p : flow.paths) worst = std::max(worst, static_path_delay(topo, flow, p));
    return FlowBounds{worst, std::nullopt};
  }
  std::map<QueueId, Rational> current;
  std::map<QueueId, Rational> independent;
  for (const auto& q : flow.queues(topo)) {
    const auto& qs = state.queue(q);
    auto flows = flows_at(state, qs);
    auto ctx = state.port_context(q.port);
    if (state.scheme() == Scheme::DelayBudget) {
      Rational t = cbs_service_latency(q.cls, ctx);
      current[q] = cbs_queue_delay(queue_loads(state, q, flows), qs.idle_slope, t);
      if (!qs.delay_budget) throw ModelError("queue without delay budget");
      independent[q] = *qs.delay_budget;
    } else {
      current[q] = qwc_queue_delay(q.cls, ctx, qs.idle_slope, fan_in_count(topo, q, flows));
    }
  }
  FlowBounds b;
  if (state.scheme() == Scheme::DelayBudget) {
    b.current = e2e_bound(topo, flow, current, true, false);
    b.independent = e2e_bound(topo, flow, independent, true, false);
  } else {
    b.current = e2e_bound(topo, flow, current, true, true);
  }
  return b;
}

namespace {

struct Working {
  NetworkState next;
  AdmissionResult result;
};

Rational solve_idle_slope(const NetworkState& next, const QueueId& q, RejectReason& reason, std::string& detail) {
  const auto& qs = next.queue(q);
  auto flows = flows_at(next, qs);
  if (flows.empty()) return Rational(0);
  switch (next.scheme()) {
    case Scheme::CMI: return Rational(ceil_z(idle_slope_cmi(flows, qs.class_measurement_interval)));
    case Scheme::FlowInterval: return Rational(ceil_z(idle_slope_flow_interval(flows)));
    case Scheme::DelayBudget: break;
  }
  if (!qs.delay_budget) {
    reason = RejectReason::MissingBudget;
    detail = "no delay budget for a queue at " + next.topology().node(q.node).name;
    return Rational(0);
  }
  auto ctx = next.port_context(q.port);
  Rational t;
  try {
    t = cbs_service_latency(q.cls, ctx);
  } catch (const UnboundedDelay&) {
    reason = RejectReason::Unstable;
    detail = "class A idle slope reaches link capacity";
    return Rational(0);
  }
  try {
    return Rational(ceil_z(delay_budget_idle_slope(queue_loads(next, q, flows), *qs.delay_budget, t)));
  } catch (const BudgetInfeasibleError&) {
    reason = RejectReason::BudgetInfeasible;
    const auto& l = next.topology().link(q.port);
    detail = "budget " + to_decimal(*qs.delay_budget * 1'000'000, 3) + " us <= T_q " + to_decimal(t * 1'000'000, 3) +
             " us at " + next.topology().node(l.source).name + "->" + next.topology().node(l.destination).name;
    return Rational(0);
  }
}

void set_flow(NetworkState& s, std::map<QueueId, QueueState>& queues, std::map<int, FlowSpec>& flows,
              const FlowSpec& flow, std::set<QueueId>& touched) {
  const auto& topo = s.topology();
  auto old = flows.find(flow.id);
  if (old != flows.end()) {
    for (const auto& q : old->second.queues(topo)) {
      queues.at(q).registered_flows.erase(flow.id);
      touched.insert(q);
    }
  }
  flows[flow.id] = flow;
  for (const auto& q : flow.queues(topo)) {
    queues.at(q).registered_flows.insert(flow.id);
    touched.insert(q);
  }
}

}  // namespace

// Shared by reserve/admit: builds the candidate next state and its verdict.
static Working evaluate(const NetworkState& state, const FlowSpec& flow);

AdmissionResult reserve(const NetworkState& state, const FlowSpec& flow) { return evaluate(state, flow).result; }

AdmissionResult admit(NetworkState& state, const FlowSpec& flow) {
  Working w = evaluate(state, flow);
  if (w.result.accepted) state = std::move(w.next);
  return w.result;
}

void commit(NetworkState& state, const FlowSpec& flow, const AdmissionResult& result) {
  if (!result.accepted) return;
  Working w = evaluate(state, flow);
  if (!w.result.accepted) throw ModelError("state changed between reserve and commit");
  state = std::move(w.next);
}

// Friend access goes through this helper struct.
struct StateAccess {
  static std::map<QueueId, QueueState>& queues(NetworkState& s);
  static std::map<int, FlowSpec>& flows(NetworkState& s);
};

static Working evaluate(const NetworkState& state, const FlowSpec& flow) {
  Working w{state, {}};
  auto& res = w.result;
  const auto& topo = state.topology();

  if (flow.paths.empty()) {
    res.reason = RejectReason::NoRoute;
    res.detail = "flow has no path";
    return w;
  }
  if (flow.cls != TrafficClass::BestEffort) {
    try {
      flow.contract.validate();
    } catch (const ModelError& e) {
      res.reason = RejectReason::MissingContract;
      res.detail = e.what();
      return w;
    }
  }

  std::set<QueueId> touched;
  set_flow(w.next, StateAccess::queues(w.next), StateAccess::flows(w.next), flow, touched);
  auto& queues = StateAccess::queues(w.next);

  // Class B latency depends on the sibling class A reservation.
  std::set<PortId> ports;
  for (const auto& q : touched) ports.insert(q.port);
  std::vector<QueueId> order;
  for (PortId p : ports) order.push_back(topo.queue_of(p, TrafficClass::A));
  for (PortId p : ports) order.push_back(topo.queue_of(p, TrafficClass::B));

  for (const auto& q : order) {
    auto& qs = queues.at(q);
    qs.max_frame = 0;
    for (int id : qs.registered_flows)
      qs.max_frame = std::max(qs.max_frame, w.next.flows().at(id).contract.max_frame_bits);
    RejectReason reason = RejectReason::None;
    Rational slope = solve_idle_slope(w.next, q, reason, res.detail);
    if (reason != RejectReason::None) {
      res.reason = reason;
      return w;
    }
    qs.idle_slope = slope;
    res.idle_slopes[q] = slope;
  }

  Rational fraction = state.constants().admission_fraction;
  for (PortId p : ports) {
    const auto& l = topo.link(p);
    const auto& a = queues.at(topo.queue_of(p, TrafficClass::A));
    const auto& b = queues.at(topo.queue_of(p, TrafficClass::B));
    Rational c = rat(l.capacity_bps);
    std::string where = topo.node(l.source).name + "->" + topo.node(l.destination).name;
    if (a.idle_slope + b.idle_slope > fraction * c) {
      res.reason = RejectReason::PortCapExceeded;
      res.detail = "idle slopes " + to_decimal(a.idle_slope + b.idle_slope, 0) + " bit/s exceed cap at " + where;
      return w;
    }
    if (!b.registered_flows.empty() && a.idle_slope >= c) {
      res.reason = RejectReason::Unstable;
      res.detail = "class A idle slope reaches capacity at " + where;
      return w;
    }
    for (const auto* qs : {&a, &b}) {
      Rational sum(0);
      for (int id : qs->registered_flows) sum += w.next.flows().at(id).contract.rate;
      if (qs->idle_slope < sum) {
        res.reason = RejectReason::Unstable;
        res.detail = "idle slope below the long-term rate at " + where;
        return w;
      }
    }
  }

  std::set<int> affected;
  for (PortId p : ports)
    for (auto cls : {TrafficClass::A, TrafficClass::B})
      for (int id : queues.at(topo.queue_of(p, cls)).registered_flows) affected.insert(id);
  affected.insert(flow.id);
  for (int id : affected) res.bounds[id] = flow_bounds(w.next, w.next.flows().at(id));

  if (state.scheme() == Scheme::DelayBudget && flow.cls != TrafficClass::BestEffort && flow.deadline > 0) {
    const auto& b = res.bounds.at(flow.id);
    if (*b.independent > seconds_from_ns(flow.deadline)) {
      res.reason = RejectReason::DeadlineViolated;
      res.detail = "sum of budgets " + to_decimal(*b.independent * 1'000'000, 3) + " us exceeds deadline " +
                   to_decimal(seconds_from_ns(flow.deadline) * 1'000'000, 3) + " us";
      return w;
    }
  }
  res.accepted = true;
  return w;
}

std::map<QueueId, QueueState>& StateAccess::queues(NetworkState& s) { return s.queues_; }
std::map<int, FlowSpec>& StateAccess::flows(NetworkState& s) { return s.flows_; }

void teardown(NetworkState& state, int flow_id) {
  auto it = state.flows_.find(flow_id);
  if (it == state.flows_.end()) throw ModelError("unknown flow " + std::to_string(flow_id));
  const auto& topo = state.topology();
  std::set<PortId> ports;
  for (const auto& q : it->second.queues(topo)) {
    state.queues_.at(q).registered_flows.erase(flow_id);
    ports.insert(q.port);
  }
  state.flows_.erase(it);
  for (auto cls : {TrafficClass::A, TrafficClass::B})
    for (PortId p : ports) {
      QueueId q = topo.queue_of(p, cls);
      auto& qs = state.queues_.at(q);
      qs.max_frame = 0;
      for (int id : qs.registered_flows) qs.max_frame = std::max(qs.max_frame, state.flows_.at(id).contract.max_frame_bits);
      RejectReason reason = RejectReason::None;
      std::string detail;
      Rational slope = solve_idle_slope(state, q, reason, detail);
      if (reason != RejectReason::None) throw ModelError("teardown left an infeasible queue: " + detail);
      qs.idle_slope = slope;
    }
}

}  // namespace tsnr
