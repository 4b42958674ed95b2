#include "tsnr/report.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>

namespace tsnr {

RunMode parse_mode(const std::string& s) {
  if (s == "analyze") return RunMode::Analyze;
  if (s == "simulate") return RunMode::Simulate;
  if (s == "both") return RunMode::Both;
  throw ConfigError("mode must be analyze, simulate or both");
}

std::string micros(Nanos ns) {
  const char* sign = ns < 0 ? "-" : "";
  Nanos a = ns < 0 ? -ns : ns;
  return fmt::format("{}{}.{:03d}", sign, a / 1000, static_cast<int>(a % 1000));
}

std::string micros(const Rational& seconds) { return to_decimal(seconds * 1'000'000, 3); }

namespace {

std::string queue_ends(const Topology& t, const QueueId& q) {
  const auto& l = t.link(q.port);
  return t.node(l.source).name + "," + t.node(l.destination).name;
}

Rational seconds(Nanos ns) { return seconds_from_ns(ns); }

std::vector<SourceSpec> build_sources(const Scenario& s, const ControlPlane& cp, const Topology& topo) {
  std::vector<SourceSpec> out;
  const auto& flows = cp.state().flows();
  for (const auto& [id, flow] : flows) {
    const auto& svc = s.services.at(static_cast<std::size_t>(id));
    if (svc.send == SendMode::Silent) continue;
    SourceSpec src;
    src.flow = id;
    src.name = svc.name;
    src.publisher = flow.publisher;
    src.cls = svc.send_class.value_or(flow.cls);
    src.frame_bits = svc.send_wire_frame ? (*svc.send_wire_frame + kIfgBytes + kSafetyBytes) * 8 : flow.contract.max_frame_bits;
    src.frames_per_burst = flow.contract.frames_per_interval;
    src.interval = flow.contract.interval;
    src.saturating = svc.send == SendMode::Saturating;
    src.load = svc.send_load;
    src.start = s.sim.traffic_start;
    src.paths = flow.paths;
    if (!s.sim.preinstalled) {
      for (const auto& e : cp.flow_entries()) {
        if (e.flow != id) continue;
        NodeId subscriber = cp.records().at(static_cast<std::size_t>(e.subscription)).subscriber;
        for (const auto& p : flow.paths) {
          if (p.subscriber != subscriber) continue;
          for (PortId l : p.links)
            if (topo.link(l).source == e.node) src.gates[l].push_back(GateWindow{e.installed, e.removed});
        }
      }
    }
    out.push_back(std::move(src));
  }
  return out;
}

}  // namespace

RunOutcome run_scenario(const Scenario& input, const RunOptions& options) {
  RunOutcome out;
  out.scenario = input;
  Scenario& s = out.scenario;
  if (options.scheme) s.scheme = *options.scheme;
  if (options.seed) s.sim.seed = *options.seed;

  std::shared_ptr<const Topology> topo;
  try {
    topo = std::make_shared<const Topology>(build_topology(s.topology));
  } catch (const ModelError& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  out.topology = topo;

  NetworkState state(topo, s.constants, s.scheme);
  if (s.scheme == Scheme::DelayBudget && !topo->cbs_queues().empty()) {
    try {
      auto plan = plan_budgets(*topo, s.constants, s.budgets, anticipated_flows(s, *topo));
      state.set_budgets(plan.budgets);
    } catch (const BudgetError& e) {
      throw ConfigError(std::string("budgets: ") + e.what());
    } catch (const ModelError& e) {
      throw ConfigError(std::string("budgets: ") + e.what());
    }
  }

  ControlPlane cp(std::move(state), s.control, s.priority);
  std::mt19937_64 rng(s.sim.seed);
  try {
    for (const auto& svc : s.services) {
      ServiceEndpoint ep;
      ep.name = svc.name;
      ep.publisher = topo->node_id(svc.publisher);
      ep.family = svc.family;
      for (const auto& d : svc.denied) ep.denied.insert(topo->node_id(d));
      cp.add_service(ep);
    }
    for (std::size_t i = 0; i < s.services.size(); ++i) {
      const auto& svc = s.services[i];
      cp.offer(static_cast<int>(i), svc.offer_time, svc.qos);
      for (const auto& sub : svc.subscribers) {
        Nanos start = sub.start;
        if (s.sim.start_scatter > 0)
          start += std::uniform_int_distribution<Nanos>(0, s.sim.start_scatter)(rng);
        cp.subscribe(static_cast<int>(i), topo->node_id(sub.node), start, sub.deadline_us);
      }
    }
  } catch (const ModelError& e) {
    throw ConfigError(std::string("services: ") + e.what());
  } catch (const NegotiationError& e) {
    throw ConfigError(std::string("services: ") + e.what());
  }
  cp.run();

  out.records = cp.records();
  out.idle_history = cp.idle_history();
  out.setup_span = cp.setup_span();
  for (const auto& r : out.records) {
    if (r.outcome == SubscriptionOutcome::Accepted) ++out.accepted;
    else ++out.rejected;
  }
  for (auto& p : check_control_trace(cp)) out.violations.push_back("control: " + p);

  const auto& st = cp.state();
  for (const auto& [id, f] : st.flows()) {
    FlowReport fr;
    fr.flow = id;
    fr.name = f.name;
    fr.family = f.family;
    fr.cls = f.cls;
    fr.deadline = f.deadline;
    fr.subscribers = f.subscribers();
    fr.bounds = flow_bounds(st, f);
    const auto& svc = s.services.at(static_cast<std::size_t>(id));
    fr.contract_traffic = svc.send == SendMode::Contract && (!svc.send_class || *svc.send_class == f.cls) &&
                          !svc.send_wire_frame;
    out.flows.push_back(std::move(fr));
  }
  for (const auto& [q, qs] : st.queues()) {
    if (qs.registered_flows.empty()) continue;
    QueueReport r;
    r.queue = q;
    r.idle_slope = qs.idle_slope;
    r.budget = qs.delay_budget;
    r.flows = static_cast<int>(qs.registered_flows.size());
    std::vector<const FlowSpec*> fl;
    for (int id : qs.registered_flows) fl.push_back(&st.flows().at(id));
    auto ctx = st.port_context(q.port);
    try {
      if (s.scheme == Scheme::DelayBudget)
        r.analysis_delay = cbs_queue_delay(queue_loads(st, q, fl), qs.idle_slope, cbs_service_latency(q.cls, ctx));
      else
        r.analysis_delay = qwc_queue_delay(q.cls, ctx, qs.idle_slope, fan_in_count(*topo, q, fl));
    } catch (const UnboundedDelay&) {
    }
    out.queues.push_back(std::move(r));
  }

  if (options.mode == RunMode::Analyze) return out;

  std::map<QueueId, std::int64_t> slopes;
  for (const auto& [q, qs] : st.queues()) slopes[q] = to_i64(ceil_z(qs.idle_slope));
  SimConfig cfg;
  cfg.duration = s.sim.duration;
  cfg.seed = s.sim.seed;
  cfg.phase_jitter = s.sim.phase_jitter;
  cfg.be_queue_limit = s.sim.be_queue_limit;
  cfg.trace = options.trace;
  out.sim = simulate(*topo, slopes, build_sources(s, cp, *topo), cfg);

  const auto& audit = out.sim->audit;
  if (!audit.clean()) {
    out.violations.push_back(fmt::format("audit: {} credit, {} ineligible starts, {} overlaps, {} positive idle credit",
                                         audit.credit_violations, audit.ineligible_starts, audit.overlap_violations,
                                         audit.positive_idle_credit));
    for (const auto& p : audit.first_problems) out.violations.push_back("audit: " + p);
  }
  if (s.scheme == Scheme::DelayBudget) {
    std::map<int, const FlowReport*> by_id;
    for (const auto& f : out.flows) by_id[f.flow] = &f;
    for (const auto& fd : out.sim->flows) {
      auto it = by_id.find(fd.flow);
      if (it == by_id.end() || fd.e2e.count == 0) continue;
      const auto& f = *it->second;
      if (f.cls == TrafficClass::BestEffort || !f.contract_traffic) continue;
      if (seconds(fd.e2e.max) > f.bounds.current || (f.bounds.independent && f.bounds.current > *f.bounds.independent))
        out.violations.push_back(fmt::format("bound: flow {} to {} observed {} us, current {} us, independent {} us", f.name,
                                             topo->node(fd.subscriber).name, micros(fd.e2e.max), micros(f.bounds.current),
                                             f.bounds.independent ? micros(*f.bounds.independent) : "-"));
    }
  }
  return out;
}

std::vector<RunOutcome> compare_schemes(const Scenario& scenario, const RunOptions& options) {
  std::vector<RunOutcome> out;
  for (auto scheme : {Scheme::CMI, Scheme::FlowInterval, Scheme::DelayBudget}) {
    RunOptions o = options;
    o.scheme = scheme;
    out.push_back(run_scenario(scenario, o));
  }
  return out;
}

namespace {

struct MotivationSetup {
  Topology topo;
  std::vector<FlowSpec> flows;
  QueueId queue;
};

MotivationSetup motivation_setup(const MotivationParams& p, bool second_flow) {
  MotivationParams q = p;
  q.second_flow = second_flow;
  Scenario s = motivation_scenario(q);
  MotivationSetup m{build_topology(s.topology), {}, {}};
  m.flows = anticipated_flows(s, m.topo);
  PortId port = m.flows.front().paths.front().links.back();
  m.queue = m.topo.queue_of(port, TrafficClass::A);
  return m;
}

}  // namespace

Rational motivation_active_rate(const MotivationParams& p, bool second_flow) {
  auto m = motivation_setup(p, second_flow);
  Rational sum(0);
  for (const auto& f : m.flows) sum += f.contract.rate;
  return sum;
}

std::int64_t motivation_min_slope(const MotivationParams& p, bool second_flow) {
  return to_i64(ceil_z(motivation_active_rate(p, second_flow)));
}

Rational motivation_bound(const MotivationParams& p, std::int64_t idle_slope, bool second_flow) {
  auto m = motivation_setup(p, second_flow);
  std::vector<FlowLoad> loads;
  for (const auto& f : m.flows) loads.push_back(FlowLoad{rat(f.contract.max_burst), f.contract.rate, Rational(0)});
  const auto& f1 = m.flows.front();
  PortContext ctx;
  ctx.capacity_bps = m.topo.link(m.queue.port).capacity_bps;
  ctx.l_max = NetworkConstants{}.l_max;
  ctx.class_a_max_frame = f1.contract.max_frame_bits;
  ctx.class_a_idle_slope = rat(idle_slope);
  Rational t = cbs_service_latency(TrafficClass::A, ctx);
  Rational queue = cbs_frame_delay(loads, f1.contract.max_frame_bits, rat(idle_slope), t, ctx.capacity_bps);
  return queue + static_path_delay(m.topo, f1, f1.paths.front());
}

std::int64_t motivation_slope_for(const MotivationParams& p, const Rational& target_s, bool second_flow) {
  std::int64_t lo = motivation_min_slope(p, second_flow);
  std::int64_t hi = p.capacity_bps;
  if (motivation_bound(p, hi, second_flow) >= target_s) throw ConfigError("target bound unreachable at link rate");
  if (motivation_bound(p, lo, second_flow) < target_s) return lo;
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (motivation_bound(p, mid, second_flow) < target_s) hi = mid;
    else lo = mid;
  }
  return hi;
}

std::vector<MotivationRow> motivation_sweep(const MotivationParams& p, const std::vector<std::int64_t>& slopes) {
  std::vector<MotivationRow> rows;
  for (bool second : {false, true}) {
    std::int64_t min = motivation_min_slope(p, second);
    for (auto slope : slopes) {
      MotivationRow r{slope, second, std::nullopt};
      if (slope >= min && slope <= p.capacity_bps) r.bound = motivation_bound(p, slope, second);
      rows.push_back(r);
    }
  }
  return rows;
}

std::string report_header() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string("# schema=1 generated=") + buf + "\n";
}

namespace {

std::string point(const RunOutcome& r) { return r.label.empty() ? r.scenario.name : r.label; }

const FlowReport* find_flow(const RunOutcome& r, int id) {
  for (const auto& f : r.flows)
    if (f.flow == id) return &f;
  return nullptr;
}

}  // namespace

void write_idle_slopes(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header() << "point,scheme,step,time_us,subscription,node,next,class,idle_slope_bps\n";
  for (const auto& r : runs)
    for (const auto& h : r.idle_history)
      out << point(r) << ',' << to_string(r.scenario.scheme) << ',' << h.step << ',' << micros(h.time) << ','
          << h.subscription << ',' << queue_ends(*r.topology, h.queue) << ',' << to_string(h.queue.cls) << ','
          << to_decimal(h.idle_slope, 0) << '\n';
}

void write_bounds(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header()
      << "point,scheme,flow,name,family,class,subscribers,deadline_us,bound_current_us,bound_independent_us,deadline_met\n";
  for (const auto& r : runs)
    for (const auto& f : r.flows) {
      const Rational& decisive = f.bounds.independent ? *f.bounds.independent : f.bounds.current;
      bool met = f.deadline <= 0 || decisive <= seconds_from_ns(f.deadline);
      out << point(r) << ',' << to_string(r.scenario.scheme) << ',' << f.flow << ',' << f.name << ',' << f.family << ','
          << to_string(f.cls) << ',' << f.subscribers.size() << ',' << (f.deadline > 0 ? micros(f.deadline) : "") << ','
          << micros(f.bounds.current) << ',' << (f.bounds.independent ? micros(*f.bounds.independent) : "") << ','
          << (met ? "yes" : "no") << '\n';
    }
}

void write_e2e(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header()
      << "point,scheme,flow,name,family,class,subscriber,sent,received,min_us,avg_us,max_us,bound_us,deadline_us,"
         "exceeds_bound,misses_deadline\n";
  for (const auto& r : runs) {
    if (!r.sim) continue;
    for (const auto& fd : r.sim->flows) {
      const auto* f = find_flow(r, fd.flow);
      const auto& e = fd.e2e;
      bool got = e.count > 0;
      Nanos avg = got ? static_cast<Nanos>(e.sum / e.count) : 0;
      bool exceeds = got && f && f->contract_traffic && f->cls != TrafficClass::BestEffort &&
                     seconds_from_ns(e.max) > f->bounds.current;
      bool misses = got && f && f->contract_traffic && f->deadline > 0 && e.max > f->deadline;
      out << point(r) << ',' << to_string(r.scenario.scheme) << ',' << fd.flow << ',' << fd.name << ','
          << (f ? f->family : "") << ',' << (f ? to_string(f->cls) : "") << ',' << r.topology->node(fd.subscriber).name
          << ',' << fd.sent << ',' << e.count << ',' << (got ? micros(e.min) : "") << ',' << (got ? micros(avg) : "")
          << ',' << (got ? micros(e.max) : "") << ',' << (f ? micros(f->bounds.current) : "") << ','
          << (f && f->deadline > 0 ? micros(f->deadline) : "") << ',' << (exceeds ? "yes" : "no") << ','
          << (misses ? "yes" : "no") << '\n';
    }
  }
}

void write_queues(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header()
      << "point,scheme,node,next,class,idle_slope_bps,budget_us,analysis_us,flows,frames,max_wait_us,avg_wait_us,"
         "max_backlog,exceeds_analysis\n";
  for (const auto& r : runs) {
    std::map<QueueId, const QueueReport*> analysis;
    for (const auto& q : r.queues) analysis[q.queue] = &q;
    std::map<QueueId, const QueueDelay*> measured;
    if (r.sim)
      for (const auto& q : r.sim->queues) measured[q.queue] = &q;
    std::set<QueueId> all;
    for (const auto& [q, _] : analysis) all.insert(q);
    for (const auto& [q, _] : measured) all.insert(q);
    for (const auto& q : all) {
      auto a = analysis.find(q);
      auto m = measured.find(q);
      const QueueReport* ar = a == analysis.end() ? nullptr : a->second;
      const QueueDelay* mr = m == measured.end() ? nullptr : m->second;
      bool got = mr && mr->wait.count > 0;
      bool exceeds = got && ar && ar->analysis_delay && seconds_from_ns(mr->wait.max) > *ar->analysis_delay;
      out << point(r) << ',' << to_string(r.scenario.scheme) << ',' << queue_ends(*r.topology, q) << ',' << to_string(q.cls)
          << ',' << (ar ? to_decimal(ar->idle_slope, 0) : "") << ',' << (ar && ar->budget ? micros(*ar->budget) : "")
          << ',' << (ar && ar->analysis_delay ? micros(*ar->analysis_delay) : "") << ',' << (ar ? ar->flows : 0) << ','
          << (mr ? mr->wait.count : 0) << ',' << (got ? micros(mr->wait.max) : "") << ','
          << (got ? micros(static_cast<Nanos>(mr->wait.sum / mr->wait.count)) : "") << ','
          << (mr ? mr->max_backlog : 0) << ',' << (exceeds ? "yes" : "no") << '\n';
    }
  }
}

void write_setup(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header() << "point,scheme,subscription,service,subscriber,start_us,end_us,duration_us,outcome,reason,attempts\n";
  for (const auto& r : runs) {
    Nanos first = INT64_MAX, last = INT64_MIN;
    for (const auto& rec : r.records) {
      bool done = rec.end >= 0;
      if (done) {
        first = std::min(first, rec.start);
        last = std::max(last, rec.end);
      }
      out << point(r) << ',' << to_string(r.scenario.scheme) << ',' << rec.id << ','
          << r.scenario.services.at(static_cast<std::size_t>(rec.service)).name << ','
          << r.topology->node(rec.subscriber).name << ',' << micros(rec.start) << ',' << (done ? micros(rec.end) : "")
          << ',' << (done ? micros(rec.end - rec.start) : "") << ',' << to_string(rec.outcome) << ','
          << (rec.reason == RejectReason::None ? "" : to_string(rec.reason)) << ',' << rec.attempts << '\n';
    }
    if (first != INT64_MAX)
      out << point(r) << ',' << to_string(r.scenario.scheme) << ",total,,," << micros(first) << ',' << micros(last) << ','
          << micros(r.setup_span) << ",,," << r.records.size() << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header();
  for (const auto& r : runs) {
    out << "== " << point(r) << " scheme=" << to_string(r.scenario.scheme) << '\n';
    out << "subscriptions: " << r.records.size() << " accepted: " << r.accepted << " rejected: " << r.rejected << '\n';
    std::map<std::string, int> reasons;
    for (const auto& rec : r.records)
      if (rec.outcome != SubscriptionOutcome::Accepted)
        ++reasons[std::string(to_string(rec.outcome)) + "/" + to_string(rec.reason)];
    for (const auto& [k, n] : reasons) out << "  " << k << ": " << n << '\n';
    int shown = 0;
    for (const auto& rec : r.records) {
      if (rec.outcome == SubscriptionOutcome::Accepted || rec.detail.empty() || shown >= 20) continue;
      ++shown;
      out << "  rejected " << r.scenario.services.at(static_cast<std::size_t>(rec.service)).name << " -> "
          << r.topology->node(rec.subscriber).name << ": " << rec.detail << '\n';
    }
    out << "setup span: " << micros(r.setup_span) << " us\n";
    int misses = 0;
    for (const auto& f : r.flows) {
      const Rational& b = f.bounds.independent ? *f.bounds.independent : f.bounds.current;
      if (f.deadline > 0 && f.cls != TrafficClass::BestEffort && b > seconds_from_ns(f.deadline)) ++misses;
    }
    out << "flows: " << r.flows.size() << " analytical deadline misses: " << misses << '\n';
    if (r.sim) {
      const auto& s = *r.sim;
      out << "simulation: released " << s.frames_released << " delivered " << s.frames_delivered << " ingress drops "
          << s.dropped_ingress << " tail drops " << s.dropped_tail << " events " << s.events << '\n';
      out << "credit audit: " << (s.audit.clean() ? "clean" : "VIOLATED") << " segments " << s.audit.segments << '\n';
    }
    out << "violations: " << r.violations.size() << '\n';
    for (const auto& v : r.violations) out << "  " << v << '\n';
  }
}

void write_comparison(std::ostream& out, const std::vector<RunOutcome>& runs) {
  out << report_header()
      << "kind,point,scheme,item,class,idle_slope_bps,bound_us,sim_max_us,deadline_us,analysis_deadline_miss,"
         "sim_deadline_miss\n";
  for (const auto& r : runs) {
    for (const auto& q : r.queues)
      out << "queue," << point(r) << ',' << to_string(r.scenario.scheme) << ','
          << r.topology->node(r.topology->link(q.queue.port).source).name << "->"
          << r.topology->node(r.topology->link(q.queue.port).destination).name << ',' << to_string(q.queue.cls) << ','
          << to_decimal(q.idle_slope, 0) << ",,,,,\n";
    for (const auto& f : r.flows) {
      Nanos sim_max = -1;
      if (r.sim)
        for (const auto& fd : r.sim->flows)
          if (fd.flow == f.flow && fd.e2e.count > 0 && f.contract_traffic) sim_max = std::max(sim_max, fd.e2e.max);
      const Rational& b = f.bounds.independent ? *f.bounds.independent : f.bounds.current;
      bool amiss = f.deadline > 0 && b > seconds_from_ns(f.deadline);
      bool smiss = f.deadline > 0 && sim_max > f.deadline;
      out << "flow," << point(r) << ',' << to_string(r.scenario.scheme) << ',' << f.name << ',' << to_string(f.cls) << ",,"
          << micros(b) << ',' << (sim_max >= 0 ? micros(sim_max) : "") << ','
          << (f.deadline > 0 ? micros(f.deadline) : "") << ',' << (amiss ? "yes" : "no") << ',' << (smiss ? "yes" : "no")
          << '\n';
    }
  }
}

void write_motivation(std::ostream& out, const std::vector<MotivationRow>& rows) {
  out << report_header() << "idle_slope_bps,second_flow,f1_bound_us\n";
  for (const auto& r : rows)
    out << r.idle_slope << ',' << (r.second_flow ? "active" : "inactive") << ','
        << (r.bound ? micros(*r.bound) : "unbounded") << '\n';
}

void write_reports(const std::string& dir, const std::vector<RunOutcome>& runs) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw ConfigError(std::string("cannot write ") + name);
    return f;
  };
  {
    auto f = open("idle_slopes.csv");
    write_idle_slopes(f, runs);
  }
  {
    auto f = open("bounds.csv");
    write_bounds(f, runs);
  }
  {
    auto f = open("e2e.csv");
    write_e2e(f, runs);
  }
  {
    auto f = open("queues.csv");
    write_queues(f, runs);
  }
  {
    auto f = open("setup.csv");
    write_setup(f, runs);
  }
  {
    auto f = open("summary.txt");
    write_summary(f, runs);
  }
}

}  // namespace tsnr
