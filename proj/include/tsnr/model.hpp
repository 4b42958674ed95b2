#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsnr/rational.hpp"

namespace tsnr {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrafficClass : std::uint8_t { A = 0, B = 1, BestEffort = 2 };
enum class NodeKind : std::uint8_t { Host, Switch };
enum class Transport : std::uint8_t { UDP, TCP };

const char* to_string(TrafficClass c);
TrafficClass parse_class(const std::string& s);

using NodeId = int;
using PortId = int;  // index of a directed link; the egress port at the link's source

struct QueueId {
  NodeId node = -1;
  PortId port = -1;
  TrafficClass cls = TrafficClass::A;
  auto operator<=>(const QueueId&) const = default;
};

struct Node {
  NodeId id = -1;
  std::string name;
  NodeKind kind = NodeKind::Host;
  std::string role;  // free label, used for budget defaults ("stage", "aggregate", ...)
};

struct Link {
  PortId id = -1;
  NodeId source = -1;
  NodeId destination = -1;
  int local_port = 0;               // index among the source node's egress ports
  std::int64_t capacity_bps = 0;    // C
  Nanos propagation_delay = 0;
  Nanos forwarding_delay = 0;       // applied when a frame enters a switch over this link
};

struct NodeDescription {
  std::string name;
  NodeKind kind = NodeKind::Host;
  std::string role;
};

struct LinkDescription {
  std::string a;
  std::string b;
  std::int64_t capacity_bps = 0;
  Nanos propagation_delay = 0;
  Nanos forwarding_delay = 0;
  bool duplex = true;
};

struct TopologyDescription {
  std::vector<NodeDescription> nodes;
  std::vector<LinkDescription> links;
};

class Topology {
 public:
  NodeId add_node(const std::string& name, NodeKind kind, const std::string& role = {});
  PortId add_link(NodeId source, NodeId destination, std::int64_t capacity_bps, Nanos propagation,
                  Nanos forwarding);

  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const Link& link(PortId id) const { return links_.at(static_cast<std::size_t>(id)); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<PortId>& out_ports(NodeId id) const { return out_.at(static_cast<std::size_t>(id)); }

  std::optional<NodeId> find_node(const std::string& name) const;
  NodeId node_id(const std::string& name) const;  // throws ModelError
  std::optional<PortId> find_link(NodeId source, NodeId destination) const;

  // Only switch egress ports carry CBS queues.
  bool is_cbs_port(PortId port) const;
  std::vector<QueueId> cbs_queues() const;
  QueueId queue_of(PortId port, TrafficClass cls) const;

  // Switch a host is attached to (its first egress link).
  NodeId attachment_switch(NodeId host) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<PortId>> out_;
  std::map<std::string, NodeId> by_name_;
};

Topology build_topology(const TopologyDescription& description);

// Minimal-hop route as a list of links. Hosts are never transit nodes. Among equal-hop
// routes the one with the lexicographically smallest sequence of local port indices wins.
std::vector<PortId> shortest_path(const Topology& topology, NodeId from, NodeId to);

// Wire bytes per frame: payload, transport headers, preamble/SFD, MAC/VLAN header, FCS,
// inter-frame gap and one safety byte. MAC frames shorter than 64 bytes are padded.
inline constexpr int kUdpHeaderBytes = 28;
inline constexpr int kTcpHeaderBytes = 40;
inline constexpr int kPreambleBytes = 8;
inline constexpr int kFcsBytes = 4;
inline constexpr int kMacVlanBytes = 18;
inline constexpr int kIfgBytes = 12;
inline constexpr int kSafetyBytes = 1;
inline constexpr int kMinMacFrameBytes = 64;
inline constexpr int kMtuBytes = 1500;

std::int64_t effective_frame_overhead(std::int64_t payload_bytes, Transport transport);
std::int64_t max_payload(Transport transport);

struct TrafficContract {
  Bits max_frame_bits = 0;              // MFS, on the wire including IFG and safety byte
  std::int64_t frames_per_interval = 1; // MIF
  Nanos interval = 0;                   // FSI
  Bits max_burst = 0;                   // b
  Rational rate;                        // r, bits per second

  // r = MFS*MIF/FSI, b = MFS*MIF (at least one frame).
  static TrafficContract periodic(Bits frame_bits, std::int64_t frames_per_interval, Nanos interval);
  void validate() const;
};

struct Path {
  NodeId subscriber = -1;
  std::vector<PortId> links;
};

struct FlowSpec {
  int id = -1;
  std::string name;
  NodeId publisher = -1;
  std::vector<Path> paths;  // one per subscriber
  TrafficContract contract;
  Nanos deadline = 0;
  int pcp = 0;
  TrafficClass cls = TrafficClass::A;
  std::string family;       // free label used in reports ("can", "camera", "publisher", ...)

  std::vector<NodeId> subscribers() const;
  // CBS queues touched by any path, deduplicated, in first-seen order.
  std::vector<QueueId> queues(const Topology& topology) const;
  // CBS queues strictly before q on the paths that contain q (identical for every such path
  // of a tree-shaped flow; the longest prefix is returned otherwise).
  std::vector<QueueId> upstream_prefix(const Topology& topology, const QueueId& q) const;
  bool uses_queue(const Topology& topology, const QueueId& q) const;
};

struct QueueState {
  QueueId id;
  Rational idle_slope;                   // bits per second
  std::optional<Rational> delay_budget;  // seconds, delay-budget scheme only
  std::set<int> registered_flows;
  Bits max_frame = 0;                    // largest MFS among registered flows
  Nanos class_measurement_interval = 0;
};

struct NetworkConstants {
  Bits l_max = 1542 * 8;
  Bits l_min = 85 * 8;
  Rational admission_fraction = rat(3, 4);
  Nanos cmi_a = 125'000;
  Nanos cmi_b = 250'000;

  void validate() const;
  Nanos cmi(TrafficClass c) const { return c == TrafficClass::A ? cmi_a : cmi_b; }
};

}  // namespace tsnr
