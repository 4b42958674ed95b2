#include "tsnr/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace tsnr {

namespace {

constexpr std::int64_t kStudyCapacity = 100'000'000;
constexpr Nanos kSwitchForwarding = 8'000;
constexpr std::int64_t kFullWireFrame = 1542 - kIfgBytes - kSafetyBytes;  // 1529 B

void node(Scenario& s, const std::string& name, NodeKind kind, const std::string& role = {}) {
  s.topology.nodes.push_back(NodeDescription{name, kind, role});
}

void link(Scenario& s, const std::string& a, const std::string& b, std::int64_t bps) {
  s.topology.links.push_back(LinkDescription{a, b, bps, 0, kSwitchForwarding, true});
}

QosOptions framed(std::int64_t wire, std::int64_t interval_us, int pcp, std::optional<std::int64_t> deadline_us) {
  QosOptions q;
  q.wire_frame = wire;
  q.max_payload = wire;
  q.max_burst = wire;
  q.min_interval_us = interval_us;
  q.priority = pcp;
  q.deadline_us = deadline_us;
  return q;
}

std::string idx(int i, int j) { return std::to_string(i) + "_" + std::to_string(j); }

}  // namespace

std::int64_t study_publisher_frame(int inputs) { return 1171 / inputs - 12; }

std::int64_t study_cross_frame(int inputs) { return 1159 - (1171 + inputs - 1) / inputs; }

Scenario study_scenario(const StudyParams& p) {
  if (p.inputs < 2 || p.inputs > 13) throw ConfigError("study inputs N must be in 2..13");
  if (p.stages < 1 || p.stages > 15) throw ConfigError("study stages M must be in 1..15");
  const int n = p.inputs;
  const int m = p.stages;
  Scenario s;
  s.name = "study_N" + std::to_string(n) + "_M" + std::to_string(m) + (p.ct_mode == CtMode::BECT ? "_bect" : "_pct");
  s.scheme = p.scheme;
  s.constants.admission_fraction = Rational(1);
  s.budgets.role_defaults = {{"stage", p.stage_budget}, {"aggregate", p.aggregate_budget}};
  s.sim.duration = 1'000'000'000;
  s.sim.traffic_start = 2'000'000;
  GeneratorSpec g;
  g.type = "study";
  g.study = p;
  s.generator = g;

  node(s, "SUB", NodeKind::Host);
  node(s, "AG", NodeKind::Switch, "aggregate");
  node(s, "CT0", NodeKind::Host);
  for (int i = 1; i <= n; ++i) {
    node(s, "P" + std::to_string(i), NodeKind::Host);
    for (int j = 1; j <= m; ++j) {
      node(s, "S" + idx(i, j), NodeKind::Switch, "stage");
      node(s, "CT" + idx(i, j), NodeKind::Host);
    }
  }
  link(s, "AG", "SUB", kStudyCapacity);
  link(s, "CT0", "AG", kStudyCapacity);
  for (int i = 1; i <= n; ++i) {
    link(s, "P" + std::to_string(i), "S" + idx(i, 1), kStudyCapacity);
    for (int j = 1; j <= m; ++j) {
      link(s, "CT" + idx(i, j), "S" + idx(i, j), kStudyCapacity);
      link(s, "S" + idx(i, j), j < m ? "S" + idx(i, j + 1) : "AG", kStudyCapacity);
    }
  }

  const std::int64_t deadline_us = p.deadline / 1000;
  const std::int64_t pub_frame = study_publisher_frame(n);
  const std::int64_t ct_frame = study_cross_frame(n);
  for (int i = 1; i <= n; ++i) {
    ServiceConfig pub;
    pub.name = "pub" + std::to_string(i);
    pub.publisher = "P" + std::to_string(i);
    pub.family = "publisher";
    pub.qos = framed(pub_frame, 125, 3, deadline_us);
    pub.subscribers.push_back(SubscriberConfig{"SUB", std::nullopt, 0});
    s.services.push_back(pub);
  }
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      ServiceConfig ct;
      ct.name = "ct" + idx(i, j);
      ct.publisher = "CT" + idx(i, j);
      ct.family = "cross";
      ct.qos = framed(ct_frame, 100'000, 3, deadline_us);
      std::string next = j < m ? "CT" + idx(i, j + 1) : "CT" + idx(i % n + 1, 1);
      ct.subscribers.push_back(SubscriberConfig{next, std::nullopt, 0});
      if (p.ct_mode == CtMode::BECT) {
        ct.send = SendMode::Saturating;
        ct.send_class = TrafficClass::BestEffort;
        ct.send_wire_frame = kFullWireFrame;
        ct.send_load = p.bect_load;
      }
      s.services.push_back(ct);
    }
  }
  ServiceConfig tail;
  tail.name = "ct0";
  tail.publisher = "CT0";
  tail.family = "cross";
  tail.qos = framed(kFullWireFrame, 124, 0, std::nullopt);
  tail.subscribers.push_back(SubscriberConfig{"SUB", std::nullopt, 0});
  tail.send = SendMode::Saturating;
  s.services.push_back(tail);
  return s;
}

Scenario ivn_like_scenario(const IvnParams& p) {
  if (p.cameras < 0 || p.can_services < 0 || p.ecus_per_zone < 1 || p.be_flows < 0)
    throw ConfigError("IVN counts must be non-negative");
  Scenario s;
  s.name = "ivn_like";
  s.scheme = p.scheme;
  s.budgets.automatic = true;
  s.sim.duration = 1'100'000'000;
  s.sim.traffic_start = 20'000'000;
  GeneratorSpec g;
  g.type = "ivn";
  g.ivn = p;
  s.generator = g;
  if (p.cameras == 0 && p.can_services == 0 && p.be_flows == 0) return s;

  constexpr std::int64_t k1G = 1'000'000'000;
  constexpr std::int64_t k10G = 10'000'000'000;
  node(s, "center", NodeKind::Switch, "center");
  node(s, "adas", NodeKind::Host);
  link(s, "center", "adas", k10G);
  std::vector<std::string> ecus;
  for (int z = 1; z <= 4; ++z) {
    std::string zone = "zone" + std::to_string(z);
    node(s, zone, NodeKind::Switch, "zone");
    link(s, zone, "center", k10G);
    node(s, "gw" + std::to_string(z), NodeKind::Host);
    link(s, "gw" + std::to_string(z), zone, k1G);
    for (int e = 1; e <= p.ecus_per_zone; ++e) {
      std::string ecu = "ecu" + idx(z, e);
      node(s, ecu, NodeKind::Host);
      link(s, ecu, zone, k1G);
      ecus.push_back(ecu);
    }
  }

  std::mt19937_64 rng(p.seed);
  auto uniform = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  auto scatter = [&]() { return p.start_scatter > 0 ? uniform(0, p.start_scatter) : Nanos{0}; };
  const std::int64_t deadline_us = p.deadline / 1000;
  const Bits max_frame_bits = 1542 * 8;

  for (int c = 1; c <= p.cameras; ++c) {
    std::string host = "cam" + std::to_string(c);
    node(s, host, NodeKind::Host);
    link(s, host, "zone" + std::to_string((c - 1) % 4 + 1), k1G);
    std::int64_t interval_us = uniform(65, 150);
    std::int64_t bits = (p.camera_total_bps / p.cameras) * interval_us / 1'000'000;
    std::int64_t frames = std::max<std::int64_t>(1, (bits + max_frame_bits - 1) / max_frame_bits);
    std::int64_t wire = (bits / frames + 7) / 8;  // bytes per frame including IFG and safety
    std::int64_t payload = std::clamp<std::int64_t>(wire - (kMacVlanBytes + kUdpHeaderBytes + kFcsBytes + kPreambleBytes +
                                                            kIfgBytes + kSafetyBytes),
                                                    1, max_payload(Transport::UDP));
    ServiceConfig svc;
    svc.name = host + "_stream";
    svc.publisher = host;
    svc.family = "camera";
    QosOptions q;
    q.max_payload = payload;
    q.max_burst = payload * frames;
    q.min_interval_us = interval_us;
    q.priority = 3;
    q.deadline_us = deadline_us;
    svc.qos = q;
    svc.subscribers.push_back(SubscriberConfig{"adas", std::nullopt, scatter()});
    s.services.push_back(svc);
  }

  // Fan-out 1..4 with mean about 2.1, then nudged so the total hits 450 subscriptions.
  std::vector<int> fanout(static_cast<std::size_t>(p.can_services));
  for (auto& f : fanout) {
    std::int64_t u = uniform(0, 99);
    f = u < 35 ? 1 : u < 70 ? 2 : u < 85 ? 3 : 4;
  }
  const int target = 450 - p.cameras;
  int total = std::accumulate(fanout.begin(), fanout.end(), 0);
  const int candidates = static_cast<int>(ecus.size()) + 1;
  const int cap = std::min(4, candidates);
  for (int guard = 0; p.can_services > 0 && total != target && guard < 100000; ++guard) {
    auto& f = fanout[static_cast<std::size_t>(uniform(0, p.can_services - 1))];
    if (total < target && f < cap) ++f, ++total;
    else if (total > target && f > 1) --f, --total;
  }
  std::vector<std::string> sinks = ecus;
  sinks.push_back("adas");
  static constexpr std::int64_t kCanIntervalsUs[] = {10'000, 100'000, 1'000'000};
  for (int k = 0; k < p.can_services; ++k) {
    ServiceConfig svc;
    int zone = k % 4 + 1;
    svc.name = "can" + std::to_string(k);
    svc.publisher = "gw" + std::to_string(zone);
    svc.family = "can";
    QosOptions q;
    q.max_payload = uniform(8, 64);
    q.max_burst = q.max_payload;
    q.min_interval_us = kCanIntervalsUs[uniform(0, 2)];
    q.priority = 2;
    q.deadline_us = deadline_us;
    svc.qos = q;
    std::vector<std::string> pick = sinks;
    std::shuffle(pick.begin(), pick.end(), rng);
    for (int f = 0; f < fanout[static_cast<std::size_t>(k)]; ++f)
      svc.subscribers.push_back(SubscriberConfig{pick[static_cast<std::size_t>(f)], std::nullopt, scatter()});
    s.services.push_back(svc);
  }

  for (int b = 1; b <= p.be_flows; ++b) {
    std::string host = "be" + std::to_string(b);
    node(s, host, NodeKind::Host);
    link(s, host, "zone" + std::to_string((b - 1) % 4 + 1), k1G);
    ServiceConfig svc;
    svc.name = host + "_bulk";
    svc.publisher = host;
    svc.family = "best_effort";
    svc.qos = framed(kFullWireFrame, 13, 0, std::nullopt);
    svc.subscribers.push_back(SubscriberConfig{"adas", std::nullopt, scatter()});
    svc.send = SendMode::Saturating;
    s.services.push_back(svc);
  }
  return s;
}

Scenario motivation_scenario(const MotivationParams& p) {
  Scenario s;
  s.name = "motivation";
  s.scheme = Scheme::DelayBudget;
  s.budgets.default_budget = 800'000;
  s.sim.duration = 1'000'000'000;
  s.sim.traffic_start = 2'000'000;
  GeneratorSpec g;
  g.type = "motivation";
  g.motivation = p;
  s.generator = g;
  node(s, "h1", NodeKind::Host);
  node(s, "h2", NodeKind::Host);
  node(s, "sink", NodeKind::Host);
  node(s, "sw", NodeKind::Switch, "edge");
  link(s, "h1", "sw", p.capacity_bps);
  link(s, "h2", "sw", p.capacity_bps);
  link(s, "sw", "sink", p.capacity_bps);
  for (int f = 1; f <= (p.second_flow ? 2 : 1); ++f) {
    ServiceConfig svc;
    svc.name = "F" + std::to_string(f);
    svc.publisher = "h" + std::to_string(f);
    svc.family = "motivation";
    svc.qos = framed(kFullWireFrame, p.interval / 1000, 3, 1000);
    svc.subscribers.push_back(SubscriberConfig{"sink", std::nullopt, 0});
    s.services.push_back(svc);
  }
  return s;
}

Scenario generate(const GeneratorSpec& g) {
  if (g.type == "study") return study_scenario(g.study);
  if (g.type == "ivn") return ivn_like_scenario(g.ivn);
  if (g.type == "motivation") return motivation_scenario(g.motivation);
  throw ConfigError("unknown generator '" + g.type + "'");
}

std::vector<FlowSpec> anticipated_flows(const Scenario& s, const Topology& topology) {
  std::vector<FlowSpec> out;
  for (std::size_t i = 0; i < s.services.size(); ++i) {
    const auto& svc = s.services[i];
    if (!svc.qos || svc.subscribers.empty()) continue;
    FlowSpec f;
    f.id = static_cast<int>(i);
    f.name = svc.name;
    f.family = svc.family;
    f.publisher = topology.node_id(svc.publisher);
    QosOptions q = *svc.qos;
    std::optional<std::int64_t> deadline = q.deadline_us;
    for (const auto& sub : svc.subscribers)
      if (sub.deadline_us) deadline = deadline ? std::min(*deadline, *sub.deadline_us) : *sub.deadline_us;
    if (!q.deadline_us) q.deadline_us = deadline;
    try {
      f.cls = assign_priority(q, s.priority);
      f.contract = q.contract();
    } catch (const std::exception&) {
      continue;
    }
    f.deadline = deadline ? *deadline * 1000 : 0;
    for (const auto& sub : svc.subscribers) {
      NodeId to = topology.node_id(sub.node);
      auto links = shortest_path(topology, f.publisher, to);
      if (!links.empty()) f.paths.push_back(Path{to, links});
    }
    if (!f.paths.empty()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::string> expand_axis(const std::string& spec) {
  std::vector<std::string> out;
  auto dots = spec.find("..");
  if (dots != std::string::npos) {
    std::int64_t a = 0, b = 0;
    try {
      a = std::stoll(spec.substr(0, dots));
      b = std::stoll(spec.substr(dots + 2));
    } catch (const std::exception&) {
      throw ConfigError("malformed range '" + spec + "'");
    }
    if (b < a) throw ConfigError("empty range '" + spec + "'");
    for (std::int64_t v = a; v <= b; ++v) out.push_back(std::to_string(v));
    return out;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.empty()) throw ConfigError("empty value in '" + spec + "'");
    out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace tsnr
