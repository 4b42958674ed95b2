#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tsnr/model.hpp"
#include "tsnr/reservation.hpp"

namespace tsnr::test {

// src -> sw1 -> ... -> swK -> dst, full duplex. Extra hosts hang off sw1 as "h<i>".
inline std::shared_ptr<Topology> make_chain(int switches, std::int64_t capacity, Nanos forwarding = 0,
                                            int extra_hosts = 0, Nanos propagation = 0) {
  TopologyDescription d;
  d.nodes.push_back({"src", NodeKind::Host, ""});
  d.nodes.push_back({"dst", NodeKind::Host, ""});
  for (int i = 1; i <= switches; ++i) d.nodes.push_back({"sw" + std::to_string(i), NodeKind::Switch, "stage"});
  for (int i = 1; i <= extra_hosts; ++i) d.nodes.push_back({"h" + std::to_string(i), NodeKind::Host, ""});
  d.links.push_back({"src", "sw1", capacity, propagation, forwarding, true});
  for (int i = 1; i < switches; ++i)
    d.links.push_back({"sw" + std::to_string(i), "sw" + std::to_string(i + 1), capacity, propagation, forwarding, true});
  d.links.push_back({"sw" + std::to_string(switches), "dst", capacity, propagation, forwarding, true});
  for (int i = 1; i <= extra_hosts; ++i) d.links.push_back({"h" + std::to_string(i), "sw1", capacity, propagation, forwarding, true});
  return std::make_shared<Topology>(build_topology(d));
}

inline FlowSpec make_flow(const Topology& t, int id, const std::string& publisher, const std::vector<std::string>& subscribers,
                          Bits frame_bits, Nanos interval, TrafficClass cls = TrafficClass::A, Nanos deadline = 0,
                          std::int64_t frames = 1) {
  FlowSpec f;
  f.id = id;
  f.name = "f" + std::to_string(id);
  f.publisher = t.node_id(publisher);
  f.cls = cls;
  f.deadline = deadline;
  f.contract = TrafficContract::periodic(frame_bits, frames, interval);
  for (const auto& s : subscribers) {
    NodeId n = t.node_id(s);
    f.paths.push_back(Path{n, shortest_path(t, f.publisher, n)});
  }
  return f;
}

inline NetworkConstants unit_constants() {
  NetworkConstants c;
  c.admission_fraction = Rational(1);
  return c;
}

inline std::map<QueueId, Rational> uniform_budgets(const Topology& t, const Rational& seconds) {
  std::map<QueueId, Rational> out;
  for (const auto& q : t.cbs_queues()) out[q] = seconds;
  return out;
}

}  // namespace tsnr::test
