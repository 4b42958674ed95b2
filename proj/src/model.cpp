#include "tsnr/model.hpp"

#include <algorithm>
#include <deque>

namespace tsnr {

const char* to_string(TrafficClass c) {
  switch (c) {
    case TrafficClass::A: return "A";
    case TrafficClass::B: return "B";
    case TrafficClass::BestEffort: return "BE";
  }
  return "?";
}

TrafficClass parse_class(const std::string& s) {
  if (s == "A" || s == "a") return TrafficClass::A;
  if (s == "B" || s == "b") return TrafficClass::B;
  if (s == "BE" || s == "be") return TrafficClass::BestEffort;
  throw ModelError("unknown traffic class '" + s + "'");
}

NodeId Topology::add_node(const std::string& name, NodeKind kind, const std::string& role) {
  if (name.empty()) throw ModelError("node name must not be empty");
  if (by_name_.count(name)) throw ModelError("duplicate node '" + name + "'");
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{id, name, kind, role});
  out_.emplace_back();
  by_name_[name] = id;
  return id;
}

PortId Topology::add_link(NodeId source, NodeId destination, std::int64_t capacity_bps,
                          Nanos propagation, Nanos forwarding) {
  auto n = static_cast<NodeId>(nodes_.size());
  if (source < 0 || source >= n || destination < 0 || destination >= n)
    throw ModelError("link endpoint does not exist");
  if (source == destination) throw ModelError("self loop on '" + node(source).name + "'");
  if (capacity_bps <= 0)
    throw ModelError("zero-capacity link " + node(source).name + "->" + node(destination).name);
  if (propagation < 0 || forwarding < 0) throw ModelError("negative link delay");
  if (find_link(source, destination))
    throw ModelError("duplicate link " + node(source).name + "->" + node(destination).name);
  PortId id = static_cast<PortId>(links_.size());
  auto& outs = out_[static_cast<std::size_t>(source)];
  links_.push_back(Link{id, source, destination, static_cast<int>(outs.size()), capacity_bps,
                        propagation, forwarding});
  outs.push_back(id);
  return id;
}

std::optional<NodeId> Topology::find_node(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId Topology::node_id(const std::string& name) const {
  auto id = find_node(name);
  if (!id) throw ModelError("unknown node '" + name + "'");
  return *id;
}

std::optional<PortId> Topology::find_link(NodeId source, NodeId destination) const {
  for (PortId p : out_.at(static_cast<std::size_t>(source)))
    if (link(p).destination == destination) return p;
  return std::nullopt;
}

bool Topology::is_cbs_port(PortId port) const { return node(link(port).source).kind == NodeKind::Switch; }

std::vector<QueueId> Topology::cbs_queues() const {
  std::vector<QueueId> out;
  for (const auto& l : links_) {
    if (!is_cbs_port(l.id)) continue;
    out.push_back(QueueId{l.source, l.id, TrafficClass::A});
    out.push_back(QueueId{l.source, l.id, TrafficClass::B});
  }
  return out;
}

QueueId Topology::queue_of(PortId port, TrafficClass cls) const { return QueueId{link(port).source, port, cls}; }

NodeId Topology::attachment_switch(NodeId host) const {
  const auto& outs = out_ports(host);
  if (outs.empty()) throw ModelError("host '" + node(host).name + "' has no link");
  return link(outs.front()).destination;
}

Topology build_topology(const TopologyDescription& description) {
  Topology t;
  for (const auto& n : description.nodes) t.add_node(n.name, n.kind, n.role);
  for (const auto& l : description.links) {
    auto a = t.find_node(l.a);
    auto b = t.find_node(l.b);
    if (!a || !b) throw ModelError("link references unknown node '" + (a ? l.b : l.a) + "'");
    t.add_link(*a, *b, l.capacity_bps, l.propagation_delay, l.forwarding_delay);
    if (l.duplex) t.add_link(*b, *a, l.capacity_bps, l.propagation_delay, l.forwarding_delay);
  }
  return t;
}

std::vector<PortId> shortest_path(const Topology& topology, NodeId from, NodeId to) {
  auto n = topology.nodes().size();
  if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= n || static_cast<std::size_t>(to) >= n)
    throw ModelError("path endpoint does not exist");
  if (from == to) return {};
  std::vector<PortId> parent(n, -1);
  std::vector<bool> seen(n, false);
  std::deque<NodeId> frontier{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop_front();
    if (u != from && topology.node(u).kind == NodeKind::Host) continue;
    for (PortId p : topology.out_ports(u)) {
      NodeId v = topology.link(p).destination;
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = true;
      parent[static_cast<std::size_t>(v)] = p;
      if (v == to) {
        std::vector<PortId> path;
        for (NodeId x = to; x != from; x = topology.link(parent[static_cast<std::size_t>(x)]).source)
          path.push_back(parent[static_cast<std::size_t>(x)]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(v);
    }
  }
  throw ModelError("no route from '" + topology.node(from).name + "' to '" + topology.node(to).name + "'");
}

std::int64_t max_payload(Transport transport) {
  return kMtuBytes - (transport == Transport::UDP ? kUdpHeaderBytes : kTcpHeaderBytes);
}

std::int64_t effective_frame_overhead(std::int64_t payload_bytes, Transport transport) {
  if (payload_bytes < 0) throw ModelError("negative payload");
  if (payload_bytes > max_payload(transport))
    throw ModelError("payload of " + std::to_string(payload_bytes) + " B exceeds the MTU");
  std::int64_t l3 = payload_bytes + (transport == Transport::UDP ? kUdpHeaderBytes : kTcpHeaderBytes);
  std::int64_t mac = std::max<std::int64_t>(kMinMacFrameBytes, kMacVlanBytes + l3 + kFcsBytes);
  return mac + kPreambleBytes + kIfgBytes + kSafetyBytes;
}

TrafficContract TrafficContract::periodic(Bits frame_bits, std::int64_t frames_per_interval, Nanos interval) {
  TrafficContract c;
  c.max_frame_bits = frame_bits;
  c.frames_per_interval = frames_per_interval;
  c.interval = interval;
  c.max_burst = frame_bits * frames_per_interval;
  if (interval <= 0) throw ModelError("traffic contract fields must be positive");
  c.rate = rat(frame_bits * frames_per_interval) * rat(kNanosPerSecond, interval);
  c.validate();
  return c;
}

void TrafficContract::validate() const {
  if (max_frame_bits <= 0 || frames_per_interval <= 0 || interval <= 0)
    throw ModelError("traffic contract fields must be positive");
  if (max_burst < max_frame_bits) throw ModelError("burst smaller than one frame");
  if (sgn(rate) <= 0) throw ModelError("traffic contract rate must be positive");
}

std::vector<NodeId> FlowSpec::subscribers() const {
  std::vector<NodeId> out;
  for (const auto& p : paths) out.push_back(p.subscriber);
  return out;
}

std::vector<QueueId> FlowSpec::queues(const Topology& topology) const {
  std::vector<QueueId> out;
  if (cls == TrafficClass::BestEffort) return out;
  for (const auto& p : paths)
    for (PortId l : p.links) {
      if (!topology.is_cbs_port(l)) continue;
      QueueId q = topology.queue_of(l, cls);
      if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
    }
  return out;
}

std::vector<QueueId> FlowSpec::upstream_prefix(const Topology& topology, const QueueId& q) const {
  std::vector<QueueId> best;
  bool found = false;
  for (const auto& p : paths) {
    std::vector<QueueId> prefix;
    for (PortId l : p.links) {
      if (!topology.is_cbs_port(l)) continue;
      QueueId cur = topology.queue_of(l, cls);
      if (cur == q) {
        if (!found || prefix.size() > best.size()) best = prefix;
        found = true;
        break;
      }
      prefix.push_back(cur);
    }
  }
  if (!found) throw ModelError("flow '" + name + "' does not use the queried queue");
  return best;
}

bool FlowSpec::uses_queue(const Topology& topology, const QueueId& q) const {
  if (q.cls != cls) return false;
  for (const auto& p : paths)
    for (PortId l : p.links)
      if (l == q.port) return topology.is_cbs_port(l);
  return false;
}

void NetworkConstants::validate() const {
  if (l_min <= 0 || l_max <= 0 || l_min > l_max) throw ModelError("invalid L_min/L_max");
  if (sgn(admission_fraction) <= 0 || admission_fraction > 1) throw ModelError("admission fraction must be in (0, 1]");
  if (cmi_a <= 0 || cmi_b <= 0) throw ModelError("class measurement interval must be positive");
}

}  // namespace tsnr
