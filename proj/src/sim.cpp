#include "tsnr/sim.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace tsnr {

void DelayStats::add(Nanos v) {
  ++count;
  min = std::min(min, v);
  max = std::max(max, v);
  sum += v;
}

double DelayStats::average() const {
  return count == 0 ? 0.0 : static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(count));
}

int CreditAuditor::add_queue(std::int64_t idle_slope_bps, std::int64_t capacity_bps) {
  Track t;
  t.idle = idle_slope_bps;
  t.capacity = capacity_bps;
  tracks_.push_back(t);
  return static_cast<int>(tracks_.size()) - 1;
}

void CreditAuditor::problem(std::int64_t& counter, std::string text) {
  ++counter;
  if (report_.first_problems.size() < 10) report_.first_problems.push_back(std::move(text));
}

void CreditAuditor::observe(int queue, const Observation& o) {
  auto& t = tracks_.at(static_cast<std::size_t>(queue));
  ++report_.segments;
  if (!t.seen) {
    t.seen = true;
    t.last = o;
    return;
  }
  Nanos dt = o.time - t.last.time;
  if (dt < 0) problem(report_.credit_violations, "observation out of order");
  __int128 expected = t.last.credit;
  if (t.last.transmitting) {
    expected += static_cast<__int128>(t.idle - t.capacity) * dt;
  } else if (t.last.backlogged) {
    expected += static_cast<__int128>(t.idle) * dt;
  } else if (expected < 0) {
    expected += static_cast<__int128>(t.idle) * dt;
    if (expected > 0) expected = 0;
  } else {
    expected = 0;
  }
  bool idle_now = !o.backlogged && !o.transmitting;
  if (idle_now && expected > 0) expected = 0;
  if (expected != o.credit)
    problem(report_.credit_violations, "credit mismatch on queue " + std::to_string(queue) + " at " + std::to_string(o.time));
  if (idle_now && o.credit > 0)
    problem(report_.positive_idle_credit, "positive credit on empty queue " + std::to_string(queue));
  t.last = o;
}

void CreditAuditor::transmission_start(int queue, Nanos time, __int128 credit) {
  if (credit < 0)
    problem(report_.ineligible_starts,
            "queue " + std::to_string(queue) + " started with negative credit at " + std::to_string(time));
}

void CreditAuditor::link_busy(int port, Nanos start, Nanos end) {
  if (static_cast<std::size_t>(port) >= busy_until_.size()) busy_until_.resize(static_cast<std::size_t>(port) + 1, 0);
  auto& until = busy_until_[static_cast<std::size_t>(port)];
  if (start < until) problem(report_.overlap_violations, "overlapping transmissions on port " + std::to_string(port));
  until = end;
}

int cbs_transmit_select(bool shaped, const bool backlogged[3], const __int128 credit[2]) {
  for (int c = 0; c < 2; ++c)
    if (backlogged[c] && (!shaped || credit[c] >= 0)) return c;
  return backlogged[2] ? 2 : -1;
}

SourceSpec cross_traffic_generator(int flow, const std::string& name, NodeId from, NodeId to,
                                   const std::vector<PortId>& links, Bits frame_bits, Nanos interval,
                                   TrafficClass cls, bool saturating) {
  if (links.empty()) throw SimulationError("cross traffic '" + name + "' has no target link");
  SourceSpec s;
  s.flow = flow;
  s.name = name;
  s.publisher = from;
  s.cls = cls;
  s.frame_bits = frame_bits;
  s.interval = interval;
  s.saturating = saturating;
  s.paths.push_back(Path{to, links});
  return s;
}

namespace {

enum EventKind : std::uint32_t { SourceFire, TxEnd, Arrival, Wake };

struct Frame {
  int source = -1;
  Nanos released = 0;
  Nanos enqueued = 0;
  Bits tx_bits = 0;
  std::uint8_t cls = 0;
  PortId link = -1;
};

struct Port {
  std::int64_t capacity = 0;
  bool shaped = false;
  std::deque<int> fifo[3];
  CbsQueueRuntime cbs[2];
  int audit[2] = {-1, -1};
  bool busy = false;
  std::int64_t wake_generation = 0;
  QueueDelay stats[3];
  bool used[3] = {false, false, false};
  bool warned = false;
};

struct SourceRuntime {
  const SourceSpec* spec = nullptr;
  Nanos period = 0;
  Bits tx_bits = 0;
  Nanos mean_gap = 0;  // extra idle time after each frame of a partially loaded source
  std::mt19937_64 rng;
  std::unordered_map<PortId, std::vector<PortId>> next;  // incoming link -> out links
  std::unordered_map<NodeId, std::size_t> path_of;        // subscriber -> result index
};

Nanos tx_time(Bits bits, std::int64_t capacity) {
  return static_cast<Nanos>((static_cast<__int128>(bits) * kNanosPerSecond + capacity - 1) / capacity);
}

class Engine {
 public:
  Engine(const Topology& topo, const std::map<QueueId, std::int64_t>& slopes, const std::vector<SourceSpec>& sources,
         const SimConfig& cfg)
      : topo_(topo), cfg_(cfg) {
    ports_.resize(topo.links().size());
    for (const auto& l : topo.links()) {
      auto& p = ports_[static_cast<std::size_t>(l.id)];
      p.capacity = l.capacity_bps;
      p.shaped = topo.is_cbs_port(l.id);
      for (int c = 0; c < 3; ++c) p.stats[c].queue = QueueId{l.source, l.id, static_cast<TrafficClass>(c)};
      if (!p.shaped) continue;
      for (int c = 0; c < 2; ++c) {
        auto it = slopes.find(topo.queue_of(l.id, static_cast<TrafficClass>(c)));
        std::int64_t idle = it == slopes.end() ? 0 : it->second;
        if (idle < 0 || idle > p.capacity) throw SimulationError("idle slope outside [0, C]");
        p.cbs[c].idle_slope = idle;
        p.cbs[c].send_slope = idle - p.capacity;
        p.audit[c] = auditor_.add_queue(idle, p.capacity);
      }
    }
    std::mt19937_64 rng(cfg.seed);
    for (const auto& s : sources) {
      SourceRuntime r;
      r.spec = &s;
      if (s.paths.empty()) throw SimulationError("source '" + s.name + "' has no path");
      PortId first = s.paths.front().links.at(0);
      for (const auto& p : s.paths) {
        if (p.links.empty() || p.links.front() != first) throw SimulationError("paths of '" + s.name + "' diverge at the host");
        for (std::size_t i = 0; i + 1 < p.links.size(); ++i) {
          auto& outs = r.next[p.links[i]];
          if (std::find(outs.begin(), outs.end(), p.links[i + 1]) == outs.end()) outs.push_back(p.links[i + 1]);
        }
        r.path_of.emplace(p.subscriber, results_.size());
        FlowDelay fd;
        fd.flow = s.flow;
        fd.name = s.name;
        fd.subscriber = p.subscriber;
        results_.push_back(fd);
      }
      if (s.frame_bits <= 8) throw SimulationError("source '" + s.name + "' frame too small");
      r.tx_bits = s.frame_bits - 8 * kSafetyBytes;
      r.period = s.saturating ? tx_time(r.tx_bits, topo.link(first).capacity_bps) : s.interval;
      if (r.period <= 0) throw SimulationError("source '" + s.name + "' has no interval");
      if (s.saturating && s.load < 1.0) {
        if (!(s.load > 0.0)) throw SimulationError("source '" + s.name + "' load must be in (0, 1]");
        r.mean_gap = static_cast<Nanos>(static_cast<double>(r.period) * (1.0 / s.load - 1.0));
        r.rng.seed(cfg.seed * 0x9E3779B97F4A7C15ull + runtimes_.size());
      }
      Nanos jitter = 0;
      if (cfg.phase_jitter > 0) jitter = static_cast<Nanos>(rng() % static_cast<std::uint64_t>(cfg.phase_jitter + 1));
      Nanos begin = s.start + jitter;
      int idx = static_cast<int>(runtimes_.size());
      runtimes_.push_back(std::move(r));
      if (begin <= cfg.duration && begin < s.stop) events_.push(begin, SourceFire, idx);
    }
  }

  SimResult run() {
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        hash ^= (v >> (8 * i)) & 0xff;
        hash *= 1099511628211ull;
      }
    };
    while (!events_.empty() && events_.next_time() <= cfg_.duration) {
      Event e = events_.pop();
      mix(static_cast<std::uint64_t>(e.time));
      mix(e.kind);
      mix(static_cast<std::uint64_t>(e.a));
      mix(static_cast<std::uint64_t>(e.b));
      switch (e.kind) {
        case SourceFire: fire(e.a, e.time); break;
        case TxEnd: tx_end(e.a, static_cast<int>(e.b), e.time); break;
        case Arrival: arrive(e.a, static_cast<int>(e.b), e.time); break;
        case Wake:
          if (ports_[static_cast<std::size_t>(e.a)].wake_generation == e.b) try_start(e.a, e.time);
          break;
        default: throw SimulationError("unknown event");
      }
    }
    SimResult out;
    out.flows = std::move(results_);
    for (std::size_t i = 0; i < ports_.size(); ++i)
      for (int c = 0; c < 3; ++c)
        if (ports_[i].used[c]) out.queues.push_back(ports_[i].stats[c]);
    out.frames_released = released_;
    out.frames_delivered = delivered_;
    out.dropped_ingress = dropped_ingress_;
    out.dropped_tail = dropped_tail_;
    out.growth_warnings = warnings_;
    out.events = events_.processed();
    out.trace_hash = hash;
    out.audit = auditor_.report();
    return out;
  }

 private:
  int alloc(const Frame& f) {
    if (!free_.empty()) {
      int i = free_.back();
      free_.pop_back();
      frames_[static_cast<std::size_t>(i)] = f;
      return i;
    }
    frames_.push_back(f);
    return static_cast<int>(frames_.size()) - 1;
  }
  void release(int i) { free_.push_back(i); }

  void advance(Port& p, int c, Nanos t) {
    auto& q = p.cbs[c];
    Nanos dt = t - q.updated;
    q.updated = t;
    if (dt <= 0) return;
    if (q.transmitting) {
      q.credit += static_cast<__int128>(q.send_slope) * dt;
    } else if (!p.fifo[c].empty()) {
      q.credit += static_cast<__int128>(q.idle_slope) * dt;
    } else if (q.credit < 0) {
      q.credit += static_cast<__int128>(q.idle_slope) * dt;
      if (q.credit > 0) q.credit = 0;
    } else {
      q.credit = 0;
    }
  }

  void observe(Port& p, int c, Nanos t) {
    auto& q = p.cbs[c];
    auditor_.observe(p.audit[c], CreditAuditor::Observation{t, q.credit, !p.fifo[c].empty(), q.transmitting});
  }

  void enqueue(PortId port, int frame, Nanos t) {
    auto& p = ports_[static_cast<std::size_t>(port)];
    auto& f = frames_[static_cast<std::size_t>(frame)];
    int c = f.cls;
    if (c == 2 && static_cast<int>(p.fifo[2].size()) >= cfg_.be_queue_limit) {
      ++dropped_tail_;
      release(frame);
      return;
    }
    f.link = port;
    f.enqueued = t;
    bool shaped = p.shaped && c < 2;
    if (shaped) advance(p, c, t);
    p.fifo[c].push_back(frame);
    p.used[c] = true;
    auto backlog = static_cast<std::int64_t>(p.fifo[c].size());
    p.stats[c].max_backlog = std::max(p.stats[c].max_backlog, backlog);
    if (backlog > cfg_.backlog_warning && !p.warned) {
      p.warned = true;
      ++warnings_;
      spdlog::warn("backlog of {} frames on port {} class {}", backlog, port, c);
    }
    if (shaped) observe(p, c, t);
    try_start(port, t);
  }

  void try_start(PortId port, Nanos t) {
    auto& p = ports_[static_cast<std::size_t>(port)];
    if (p.busy) return;
    bool backlogged[3] = {!p.fifo[0].empty(), !p.fifo[1].empty(), !p.fifo[2].empty()};
    __int128 credit[2] = {0, 0};
    if (p.shaped) {
      for (int c = 0; c < 2; ++c) {
        advance(p, c, t);
        credit[c] = p.cbs[c].credit;
      }
    }
    int c = cbs_transmit_select(p.shaped, backlogged, credit);
    if (c < 0) {
      if (!p.shaped) return;
      Nanos wake = INT64_MAX;
      for (int k = 0; k < 2; ++k) {
        if (!backlogged[k] || credit[k] >= 0 || p.cbs[k].idle_slope == 0) continue;
        __int128 need = -credit[k];
        Nanos dt = static_cast<Nanos>((need + p.cbs[k].idle_slope - 1) / p.cbs[k].idle_slope);
        wake = std::min(wake, t + dt);
      }
      if (wake != INT64_MAX) events_.push(wake, Wake, port, ++p.wake_generation);
      return;
    }
    int frame = p.fifo[c].front();
    p.fifo[c].pop_front();
    auto& f = frames_[static_cast<std::size_t>(frame)];
    p.stats[c].wait.add(t - f.enqueued);
    if (p.shaped && c < 2) {
      auditor_.transmission_start(p.audit[c], t, p.cbs[c].credit);
      p.cbs[c].transmitting = true;
      observe(p, c, t);
    }
    p.busy = true;
    Nanos end = t + tx_time(f.tx_bits, p.capacity);
    auditor_.link_busy(port, t, end);
    if (cfg_.trace)
      *cfg_.trace << t << ",tx_start," << port << ',' << runtimes_[static_cast<std::size_t>(f.source)].spec->flow << ','
                  << frame << ',' << c << '\n';
    events_.push(end, TxEnd, port, frame);
  }

  void tx_end(PortId port, int frame, Nanos t) {
    auto& p = ports_[static_cast<std::size_t>(port)];
    auto& f = frames_[static_cast<std::size_t>(frame)];
    int c = f.cls;
    p.busy = false;
    if (p.shaped && c < 2) {
      advance(p, c, t);
      auto& q = p.cbs[c];
      q.transmitting = false;
      if (p.fifo[c].empty() && q.credit > 0) q.credit = 0;
      observe(p, c, t);
    }
    const auto& link = topo_.link(port);
    Nanos arrival = t + link.propagation_delay;
    if (topo_.node(link.destination).kind == NodeKind::Host) {
      deliver(frame, link.destination, arrival);
    } else {
      events_.push(arrival + link.forwarding_delay, Arrival, port, frame);
    }
    try_start(port, t);
  }

  void deliver(int frame, NodeId host, Nanos t) {
    const auto& f = frames_[static_cast<std::size_t>(frame)];
    const auto& r = runtimes_[static_cast<std::size_t>(f.source)];
    auto it = r.path_of.find(host);
    if (it != r.path_of.end()) {
      results_[it->second].e2e.add(t - f.released);
      ++delivered_;
    }
    if (cfg_.trace) *cfg_.trace << t << ",deliver," << f.link << ',' << r.spec->flow << ',' << frame << ',' << int(f.cls) << '\n';
    release(frame);
  }

  static bool open(const SourceSpec& s, PortId port, Nanos t) {
    if (s.gates.empty()) return true;
    auto it = s.gates.find(port);
    if (it == s.gates.end()) return false;
    for (const auto& w : it->second)
      if (w.from <= t && t < w.until) return true;
    return false;
  }

  void arrive(PortId in, int frame, Nanos t) {
    const auto& r = runtimes_[static_cast<std::size_t>(frames_[static_cast<std::size_t>(frame)].source)];
    auto it = r.next.find(in);
    if (it == r.next.end()) {
      release(frame);
      return;
    }
    bool reused = false;
    for (PortId out : it->second) {
      if (!open(*r.spec, out, t)) {
        ++dropped_ingress_;
        if (cfg_.trace) *cfg_.trace << t << ",blocked," << out << ',' << r.spec->flow << ',' << frame << ",\n";
        continue;
      }
      int copy = frame;
      if (reused) copy = alloc(frames_[static_cast<std::size_t>(frame)]);
      reused = true;
      enqueue(out, copy, t);
    }
    if (!reused) release(frame);
  }

  void fire(int source, Nanos t) {
    auto& r = runtimes_[static_cast<std::size_t>(source)];
    const auto& s = *r.spec;
    PortId first = s.paths.front().links.front();
    std::int64_t n = s.saturating ? 1 : s.frames_per_burst;
    for (std::int64_t i = 0; i < n; ++i) {
      Frame f;
      f.source = source;
      f.released = t;
      f.tx_bits = r.tx_bits;
      f.cls = static_cast<std::uint8_t>(s.cls);
      ++released_;
      enqueue(first, alloc(f), t);
    }
    for (auto& kv : r.path_of) results_[kv.second].sent += n;
    Nanos next = t + r.period;
    if (r.mean_gap > 0)
      next += static_cast<Nanos>(std::exponential_distribution<double>(1.0 / static_cast<double>(r.mean_gap))(r.rng));
    if (next <= cfg_.duration && next < s.stop) events_.push(next, SourceFire, source);
  }

  const Topology& topo_;
  const SimConfig& cfg_;
  EventQueue events_;
  CreditAuditor auditor_;
  std::vector<Port> ports_;
  std::vector<SourceRuntime> runtimes_;
  std::vector<Frame> frames_;
  std::vector<int> free_;
  std::vector<FlowDelay> results_;
  std::int64_t released_ = 0, delivered_ = 0, dropped_ingress_ = 0, dropped_tail_ = 0, warnings_ = 0;
};

}  // namespace

SimResult simulate(const Topology& topology, const std::map<QueueId, std::int64_t>& idle_slopes,
                   const std::vector<SourceSpec>& sources, const SimConfig& config) {
  if (config.duration < 0) throw SimulationError("negative duration");
  Engine engine(topology, idle_slopes, sources, config);
  return engine.run();
}

}  // namespace tsnr
