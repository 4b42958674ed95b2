#include "tsnr/negotiation.hpp"

#include <algorithm>
#include <charconv>

namespace tsnr {

namespace {

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw NegotiationError("malformed option " + key + "=" + v);
  return out;
}

}  // namespace

void QosOptions::validate() const {
  if (max_payload <= 0 || min_interval_us <= 0 || max_burst <= 0)
    throw NegotiationError("payload, interval and burst must be positive");
  if (max_burst < max_payload) throw NegotiationError("max burst below max payload");
  if (deadline_us && *deadline_us <= 0) throw NegotiationError("deadline must be positive");
  if (priority && (*priority < 0 || *priority > 7)) throw NegotiationError("priority outside PCP 0-7");
  if (wire_frame && *wire_frame <= 0) throw NegotiationError("wire frame must be positive");
  if (!wire_frame && max_payload > tsnr::max_payload(transport)) throw NegotiationError("payload exceeds the MTU");
}

OptionList QosOptions::encode() const {
  OptionList out{{"max_payload", std::to_string(max_payload)},
                 {"min_interval_us", std::to_string(min_interval_us)},
                 {"max_burst", std::to_string(max_burst)},
                 {"transport", transport == Transport::UDP ? "udp" : "tcp"}};
  if (deadline_us) out.emplace_back("deadline_us", std::to_string(*deadline_us));
  if (priority) out.emplace_back("priority", std::to_string(*priority));
  if (wire_frame) out.emplace_back("wire_frame", std::to_string(*wire_frame));
  return out;
}

QosOptions QosOptions::decode(const OptionList& options) {
  QosOptions q;
  for (const auto& [k, v] : options) {
    if (k == "max_payload") q.max_payload = parse_int(k, v);
    else if (k == "min_interval_us") q.min_interval_us = parse_int(k, v);
    else if (k == "max_burst") q.max_burst = parse_int(k, v);
    else if (k == "deadline_us") q.deadline_us = parse_int(k, v);
    else if (k == "priority") q.priority = static_cast<int>(parse_int(k, v));
    else if (k == "wire_frame") q.wire_frame = parse_int(k, v);
    else if (k == "transport") {
      if (v == "udp") q.transport = Transport::UDP;
      else if (v == "tcp") q.transport = Transport::TCP;
      else throw NegotiationError("malformed option transport=" + v);
    }
  }
  return q;
}

Bits QosOptions::frame_bits() const {
  if (wire_frame) return (*wire_frame + kIfgBytes + kSafetyBytes) * 8;
  return effective_frame_overhead(max_payload, transport) * 8;
}

std::int64_t QosOptions::frames_per_interval() const { return (max_burst + max_payload - 1) / max_payload; }

TrafficContract QosOptions::contract() const {
  validate();
  return TrafficContract::periodic(frame_bits(), frames_per_interval(), min_interval_us * 1000);
}

TrafficClass assign_priority(const QosOptions& qos, const PriorityConfig& config) {
  if (qos.priority) {
    auto it = config.pcp_map.find(*qos.priority);
    return it == config.pcp_map.end() ? TrafficClass::BestEffort : it->second;
  }
  if (!qos.deadline_us) throw NegotiationError("neither priority nor deadline given");
  return *qos.deadline_us * 1000 <= config.class_a_cutoff ? TrafficClass::A : TrafficClass::B;
}

int default_pcp(TrafficClass cls) {
  switch (cls) {
    case TrafficClass::A: return 3;
    case TrafficClass::B: return 2;
    case TrafficClass::BestEffort: return 0;
  }
  return 0;
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Offer: return "offer";
    case MessageKind::Find: return "find";
    case MessageKind::Subscribe: return "subscribe";
    case MessageKind::SubscribeAck: return "subscribe_ack";
    case MessageKind::SubscribeNack: return "subscribe_nack";
    case MessageKind::Unsubscribe: return "unsubscribe";
    case MessageKind::StopOffer: return "stop_offer";
    case MessageKind::PacketIn: return "packet_in";
    case MessageKind::PacketOut: return "packet_out";
    case MessageKind::FlowMod: return "flow_mod";
  }
  return "?";
}

const char* to_string(SubscriptionOutcome o) {
  switch (o) {
    case SubscriptionOutcome::Pending: return "pending";
    case SubscriptionOutcome::Accepted: return "accepted";
    case SubscriptionOutcome::RejectedByPublisher: return "rejected_by_publisher";
    case SubscriptionOutcome::RejectedByAdmission: return "rejected_by_admission";
    case SubscriptionOutcome::TimedOut: return "timed_out";
  }
  return "?";
}

ControlPlane::ControlPlane(NetworkState initial, ControlTiming timing, PriorityConfig priority)
    : state_(std::move(initial)), timing_(timing), priority_(std::move(priority)) {
  if (timing_.control_link_bps <= 0 || timing_.message_bytes <= 0)
    throw NegotiationError("control link rate and message size must be positive");
}

int ControlPlane::add_service(ServiceEndpoint service) {
  if (state_.topology().node(service.publisher).kind != NodeKind::Host)
    throw NegotiationError("publisher of '" + service.name + "' is not a host");
  services_.push_back(std::move(service));
  return static_cast<int>(services_.size()) - 1;
}

int ControlPlane::store(ControlMessage msg, NodeId from, NodeId to) {
  messages_.push_back(Pending{std::move(msg), from, to});
  return static_cast<int>(messages_.size()) - 1;
}

Nanos ControlPlane::control_link_tx() const {
  return (timing_.message_bytes * 8 * kNanosPerSecond + timing_.control_link_bps - 1) / timing_.control_link_bps +
         timing_.control_link_propagation;
}

Nanos ControlPlane::uplink_latency(NodeId endpoint) const {
  const auto& topo = state_.topology();
  const auto& l = topo.link(topo.out_ports(endpoint).at(0));
  Nanos tx = (timing_.message_bytes * 8 * kNanosPerSecond + l.capacity_bps - 1) / l.capacity_bps;
  return tx + l.propagation_delay + timing_.switch_forwarding + timing_.switch_processing + control_link_tx();
}

Nanos ControlPlane::downlink_latency(NodeId endpoint) const {
  const auto& topo = state_.topology();
  auto sw = topo.attachment_switch(endpoint);
  auto port = topo.find_link(sw, endpoint);
  if (!port) throw NegotiationError("no link from the attachment switch to " + topo.node(endpoint).name);
  const auto& l = topo.link(*port);
  Nanos tx = (timing_.message_bytes * 8 * kNanosPerSecond + l.capacity_bps - 1) / l.capacity_bps;
  return control_link_tx() + timing_.switch_processing + timing_.switch_forwarding + tx + l.propagation_delay;
}

void ControlPlane::offer(int service, Nanos at, std::optional<QosOptions> qos) {
  ControlMessage m;
  m.kind = MessageKind::Offer;
  m.service = service;
  m.endpoint = services_.at(static_cast<std::size_t>(service)).publisher;
  if (qos) m.options = qos->encode();
  send_from_endpoint(m.endpoint, std::move(m), at);
}

int ControlPlane::subscribe(int service, NodeId subscriber, Nanos at, std::optional<std::int64_t> deadline_us) {
  if (service < 0 || service >= static_cast<int>(services_.size())) throw NegotiationError("unknown service");
  if (state_.topology().node(subscriber).kind != NodeKind::Host) throw NegotiationError("subscriber is not a host");
  SubscriptionRecord r;
  r.id = static_cast<int>(records_.size());
  r.service = service;
  r.subscriber = subscriber;
  r.deadline_us = deadline_us;
  r.start = at;
  records_.push_back(r);
  subs_.emplace_back();
  events_.push(at, Start, r.id);
  return r.id;
}

void ControlPlane::unsubscribe(int subscription, Nanos at) {
  const auto& r = records_.at(static_cast<std::size_t>(subscription));
  ControlMessage m;
  m.kind = MessageKind::Unsubscribe;
  m.service = r.service;
  m.subscription = subscription;
  m.endpoint = r.subscriber;
  send_from_endpoint(r.subscriber, std::move(m), at);
}

void ControlPlane::stop_offer(int service, Nanos at) {
  ControlMessage m;
  m.kind = MessageKind::StopOffer;
  m.service = service;
  m.endpoint = services_.at(static_cast<std::size_t>(service)).publisher;
  send_from_endpoint(m.endpoint, std::move(m), at);
}

void ControlPlane::send_from_endpoint(NodeId from, ControlMessage msg, Nanos at) {
  int id = store(std::move(msg), from, -1);
  events_.push(std::max(at, events_.now()), Send, id);
}

void ControlPlane::send_to_endpoint(NodeId to, ControlMessage msg) {
  int id = store(std::move(msg), -1, to);
  events_.push(events_.now() + downlink_latency(to), Deliver, id);
}

void ControlPlane::run(Nanos until) {
  while (!events_.empty() && events_.next_time() <= until) {
    Event e = events_.pop();
    switch (e.kind) {
      case Start: start(e.a); break;
      case Send: {
        const auto& p = messages_.at(static_cast<std::size_t>(e.a));
        trace_.push_back({e.time, p.msg.kind, p.msg.kind, p.from, p.msg.service, p.msg.subscription});
        events_.push(e.time + uplink_latency(p.from) + timing_.controller_processing, Deliver, e.a);
        break;
      }
      case Deliver: handle(messages_.at(static_cast<std::size_t>(e.a))); break;
      case Timer: on_timer(e.a, e.b); break;
      case Install: {
        const auto& fe = entries_.at(static_cast<std::size_t>(e.a));
        trace_.push_back({e.time, MessageKind::FlowMod, MessageKind::SubscribeAck, fe.node, fe.flow, fe.subscription});
        break;
      }
      case Remove: break;  // advances control time to the entry removal
      default: throw std::logic_error("unknown control event");
    }
  }
}

void ControlPlane::start(int subscription) {
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  s.stage = known_.count({r.subscriber, r.service}) ? Stage::Subscribing : Stage::Finding;
  s.attempt = 1;
  send_stage_message(subscription);
}

void ControlPlane::send_stage_message(int subscription) {
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  ControlMessage m;
  m.kind = s.stage == Stage::Finding ? MessageKind::Find : MessageKind::Subscribe;
  m.service = r.service;
  m.subscription = subscription;
  m.endpoint = r.subscriber;
  if (m.kind == MessageKind::Subscribe && r.deadline_us) m.options.emplace_back("deadline_us", std::to_string(*r.deadline_us));
  ++r.attempts;
  send_from_endpoint(r.subscriber, std::move(m), events_.now());
  arm_timer(subscription);
}

void ControlPlane::arm_timer(int subscription) {
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  ++s.timer_generation;
  events_.push(events_.now() + timing_.retry_interval, Timer, subscription, s.timer_generation);
}

void ControlPlane::on_timer(int subscription, std::int64_t generation) {
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  if (s.stage == Stage::Done || s.timer_generation != generation) return;
  if (s.attempt > timing_.retries) {
    finish(subscription, SubscriptionOutcome::TimedOut, RejectReason::None,
           "no answer after " + std::to_string(s.attempt) + " attempts");
    return;
  }
  ++s.attempt;
  send_stage_message(subscription);
}

void ControlPlane::finish(int subscription, SubscriptionOutcome outcome, RejectReason reason, std::string detail) {
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  if (s.stage == Stage::Done) return;
  s.stage = Stage::Done;
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  r.end = events_.now();
  r.outcome = outcome;
  if (reason != RejectReason::None) r.reason = reason;
  if (!detail.empty()) r.detail = std::move(detail);
}

void ControlPlane::handle(const Pending& p) {
  if (p.to < 0) {
    trace_.push_back({events_.now(), MessageKind::PacketIn, p.msg.kind, -1, p.msg.service, p.msg.subscription});
    handle_controller(p.msg);
  } else {
    trace_.push_back({events_.now(), MessageKind::PacketOut, p.msg.kind, p.to, p.msg.service, p.msg.subscription});
    handle_endpoint(p.to, p.msg);
  }
}

void ControlPlane::handle_controller(const ControlMessage& m) {
  switch (m.kind) {
    case MessageKind::Offer: {
      RegistryEntry e;
      e.publisher = m.endpoint;
      e.raw = m.options;
      if (!m.options.empty()) {
        try {
          auto q = QosOptions::decode(m.options);
          q.validate();
          e.qos = q;
        } catch (const NegotiationError&) {
          e.qos.reset();
        }
      }
      registry_[m.service] = std::move(e);
      auto it = pending_finds_.find(m.service);
      if (it != pending_finds_.end()) {
        for (NodeId finder : it->second) {
          ControlMessage out;
          out.kind = MessageKind::Offer;
          out.service = m.service;
          out.endpoint = finder;
          out.options = registry_[m.service].raw;
          send_to_endpoint(finder, std::move(out));
        }
        pending_finds_.erase(it);
      }
      break;
    }
    case MessageKind::Find: {
      auto it = registry_.find(m.service);
      if (it == registry_.end()) {
        pending_finds_[m.service].insert(m.endpoint);
        break;
      }
      ControlMessage out;
      out.kind = MessageKind::Offer;
      out.service = m.service;
      out.endpoint = m.endpoint;
      out.options = it->second.raw;
      send_to_endpoint(m.endpoint, std::move(out));
      break;
    }
    case MessageKind::Subscribe: {
      auto& s = subs_.at(static_cast<std::size_t>(m.subscription));
      if (s.active) {
        ControlMessage ack{MessageKind::SubscribeAck, m.service, 0, m.subscription, m.endpoint, {}};
        send_to_endpoint(m.endpoint, std::move(ack));
        break;
      }
      if (s.controller_busy || s.stage == Stage::Done) break;
      auto it = registry_.find(m.service);
      if (it == registry_.end()) {
        reject_at_controller(m.subscription, RejectReason::MissingContract, "service not offered");
        break;
      }
      s.controller_busy = true;
      ControlMessage fwd = m;
      send_to_endpoint(it->second.publisher, std::move(fwd));
      break;
    }
    case MessageKind::SubscribeAck: {
      auto& s = subs_.at(static_cast<std::size_t>(m.subscription));
      if (!s.controller_busy) break;
      s.controller_busy = false;
      admit_subscription(m.subscription);
      break;
    }
    case MessageKind::SubscribeNack: {
      auto& s = subs_.at(static_cast<std::size_t>(m.subscription));
      if (!s.controller_busy) break;
      s.controller_busy = false;
      const auto& r = records_.at(static_cast<std::size_t>(m.subscription));
      ControlMessage out{MessageKind::SubscribeNack, m.service, 0, m.subscription, r.subscriber, {{"cause", "publisher"}}};
      send_to_endpoint(r.subscriber, std::move(out));
      break;
    }
    case MessageKind::Unsubscribe: {
      if (m.subscription < 0 || !subs_.at(static_cast<std::size_t>(m.subscription)).active) break;
      remove_subscription(m.subscription);
      const auto& r = records_.at(static_cast<std::size_t>(m.subscription));
      ControlMessage out{MessageKind::Unsubscribe, m.service, 0, m.subscription, r.subscriber, {}};
      send_to_endpoint(services_.at(static_cast<std::size_t>(m.service)).publisher, std::move(out));
      break;
    }
    case MessageKind::StopOffer: {
      if (state_.flows().count(m.service)) teardown(m.service, TeardownCause::StopOffer);
      registry_.erase(m.service);
      break;
    }
    default: throw NegotiationError(std::string("controller cannot handle ") + to_string(m.kind));
  }
}

void ControlPlane::handle_endpoint(NodeId at, const ControlMessage& m) {
  switch (m.kind) {
    case MessageKind::Offer: {
      known_.insert({at, m.service});
      for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].subscriber != at || records_[i].service != m.service) continue;
        auto& s = subs_[i];
        if (s.stage != Stage::Finding) continue;
        s.stage = Stage::Subscribing;
        s.attempt = 1;
        send_stage_message(static_cast<int>(i));
      }
      break;
    }
    case MessageKind::Subscribe: {
      // Publisher-side access control.
      const auto& svc = services_.at(static_cast<std::size_t>(m.service));
      ControlMessage out = m;
      out.kind = svc.denied.count(m.endpoint) ? MessageKind::SubscribeNack : MessageKind::SubscribeAck;
      out.options.clear();
      send_from_endpoint(at, std::move(out), events_.now());
      break;
    }
    case MessageKind::SubscribeAck:
      finish(m.subscription, SubscriptionOutcome::Accepted, RejectReason::None, {});
      break;
    case MessageKind::SubscribeNack: {
      bool by_publisher = std::find(m.options.begin(), m.options.end(), std::pair<std::string, std::string>{"cause", "publisher"}) !=
                          m.options.end();
      finish(m.subscription, by_publisher ? SubscriptionOutcome::RejectedByPublisher : SubscriptionOutcome::RejectedByAdmission,
             RejectReason::None, by_publisher ? "publisher denied access" : std::string());
      break;
    }
    case MessageKind::Unsubscribe:
      break;  // cancellation at the publisher; it keeps no per-subscriber data-plane state
    default: throw NegotiationError(std::string("endpoint cannot handle ") + to_string(m.kind));
  }
}

void ControlPlane::reject_at_controller(int subscription, RejectReason reason, std::string detail) {
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  r.reason = reason;
  r.detail = std::move(detail);
  ControlMessage cancel{MessageKind::Unsubscribe, r.service, 0, subscription, r.subscriber, {}};
  send_to_endpoint(services_.at(static_cast<std::size_t>(r.service)).publisher, std::move(cancel));
  ControlMessage nack{MessageKind::SubscribeNack, r.service, 0, subscription, r.subscriber, {{"cause", "admission"}}};
  send_to_endpoint(r.subscriber, std::move(nack));
}

std::map<QueueId, Rational> ControlPlane::idle_slopes() const {
  std::map<QueueId, Rational> out;
  for (const auto& [q, s] : state_.queues()) out.emplace(q, s.idle_slope);
  return out;
}

void ControlPlane::record_changes(const std::map<QueueId, Rational>& before, int subscription) {
  int step = steps_++;
  for (const auto& [q, s] : state_.queues()) {
    const auto& old = before.at(q);
    if (old != s.idle_slope) history_.push_back({step, events_.now(), subscription, q, s.idle_slope});
  }
  if (subscription >= 0) records_.at(static_cast<std::size_t>(subscription)).admission_step = step;
}

Nanos ControlPlane::effective_deadline(int flow_id) const {
  Nanos best = 0;
  auto reg = registry_.find(flow_id);
  auto it = flow_subscriptions_.find(flow_id);
  if (it == flow_subscriptions_.end()) return 0;
  for (int sub : it->second) {
    const auto& r = records_.at(static_cast<std::size_t>(sub));
    std::optional<std::int64_t> d = r.deadline_us;
    if (!d && reg != registry_.end() && reg->second.qos) d = reg->second.qos->deadline_us;
    if (d) best = best == 0 ? *d * 1000 : std::min(best, *d * 1000);
  }
  return best;
}

void ControlPlane::admit_subscription(int subscription) {
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  const auto& topo = state_.topology();
  const auto& svc = services_.at(static_cast<std::size_t>(r.service));
  auto reg = registry_.find(r.service);
  if (reg == registry_.end() || !reg->second.qos) {
    reject_at_controller(subscription, RejectReason::MissingContract, "service offered without QoS options");
    return;
  }
  QosOptions q = *reg->second.qos;
  if (r.deadline_us) q.deadline_us = r.deadline_us;

  FlowSpec flow;
  auto existing = state_.flows().find(r.service);
  if (existing != state_.flows().end()) {
    flow = existing->second;
  } else {
    try {
      flow.cls = assign_priority(q, priority_);
      flow.contract = q.contract();
    } catch (const std::exception& e) {
      reject_at_controller(subscription, RejectReason::MissingContract, e.what());
      return;
    }
    flow.id = r.service;
    flow.name = svc.name;
    flow.publisher = svc.publisher;
    flow.pcp = q.priority.value_or(default_pcp(flow.cls));
    flow.family = svc.family;
  }

  Path path{r.subscriber, shortest_path(topo, svc.publisher, r.subscriber)};
  if (path.links.empty()) {
    reject_at_controller(subscription, RejectReason::NoRoute, "no route to " + topo.node(r.subscriber).name);
    return;
  }
  flow.paths.erase(std::remove_if(flow.paths.begin(), flow.paths.end(),
                                  [&](const Path& p) { return p.subscriber == r.subscriber; }),
                   flow.paths.end());
  flow.paths.push_back(path);

  flow_subscriptions_[r.service].insert(subscription);
  flow.deadline = effective_deadline(r.service);

  auto before = idle_slopes();
  AdmissionResult res = admit(state_, flow);
  if (!res.accepted) {
    flow_subscriptions_[r.service].erase(subscription);
    if (flow_subscriptions_[r.service].empty()) flow_subscriptions_.erase(r.service);
    reject_at_controller(subscription, res.reason, res.detail);
    return;
  }
  record_changes(before, subscription);
  subs_.at(static_cast<std::size_t>(subscription)).active = true;

  Nanos installed = events_.now() + control_link_tx() + timing_.switch_processing;
  for (PortId l : path.links) {
    NodeId sw = topo.link(l).destination;
    if (topo.node(sw).kind != NodeKind::Switch) continue;
    entries_.push_back(FlowEntry{r.service, subscription, sw, installed, INT64_MAX});
    events_.push(installed, Install, static_cast<std::int32_t>(entries_.size() - 1));
  }
  ControlMessage ack{MessageKind::SubscribeAck, r.service, 0, subscription, r.subscriber, {}};
  send_to_endpoint(r.subscriber, std::move(ack));
}

void ControlPlane::remove_entries(int subscription, Nanos at) {
  for (auto& e : entries_)
    if (e.subscription == subscription && e.removed == INT64_MAX) {
      e.removed = std::max(at, e.installed);
      events_.push(e.removed, Remove, 0);
    }
}

void ControlPlane::remove_subscription(int subscription) {
  auto& r = records_.at(static_cast<std::size_t>(subscription));
  auto& s = subs_.at(static_cast<std::size_t>(subscription));
  if (!s.active) return;
  FlowSpec flow = state_.flows().at(r.service);
  flow.paths.erase(std::remove_if(flow.paths.begin(), flow.paths.end(),
                                  [&](const Path& p) { return p.subscriber == r.subscriber; }),
                   flow.paths.end());
  flow_subscriptions_[r.service].erase(subscription);
  auto before = idle_slopes();
  if (flow.paths.empty()) {
    tsnr::teardown(state_, r.service);
    flow_subscriptions_.erase(r.service);
  } else {
    flow.deadline = effective_deadline(r.service);
    NetworkState next = state_;
    tsnr::teardown(next, r.service);
    auto res = admit(next, flow);
    if (!res.accepted) throw NegotiationError("shrinking flow '" + flow.name + "' was rejected: " + res.detail);
    state_ = std::move(next);
  }
  record_changes(before, -1);
  s.active = false;
  r.removed = events_.now();
  remove_entries(subscription, events_.now() + control_link_tx() + timing_.switch_processing);
}

void ControlPlane::teardown(int flow_id, TeardownCause cause) {
  (void)cause;
  if (!state_.flows().count(flow_id)) throw NegotiationError("unknown flow " + std::to_string(flow_id));
  auto before = idle_slopes();
  tsnr::teardown(state_, flow_id);
  record_changes(before, -1);
  Nanos removal = events_.now() + control_link_tx() + timing_.switch_processing;
  auto it = flow_subscriptions_.find(flow_id);
  if (it != flow_subscriptions_.end()) {
    for (int sub : it->second) {
      subs_.at(static_cast<std::size_t>(sub)).active = false;
      records_.at(static_cast<std::size_t>(sub)).removed = events_.now();
      remove_entries(sub, removal);
    }
    flow_subscriptions_.erase(it);
  }
}

std::map<NodeId, std::set<int>> ControlPlane::flow_tables() const {
  std::map<NodeId, std::set<int>> out;
  Nanos t = events_.now();
  for (const auto& e : entries_)
    if (e.installed <= t && t < e.removed) out[e.node].insert(e.flow);
  return out;
}

Nanos ControlPlane::setup_span() const {
  Nanos first = INT64_MAX, last = INT64_MIN;
  for (const auto& r : records_) {
    if (r.outcome == SubscriptionOutcome::Pending) continue;
    first = std::min(first, r.start);
    last = std::max(last, r.end);
  }
  return first == INT64_MAX ? 0 : last - first;
}

std::vector<std::string> check_control_trace(const ControlPlane& plane) {
  std::vector<std::string> problems;
  std::map<int, std::size_t> ack_seen;  // subscription -> trace index of the publisher's ack at the controller
  std::map<int, int> handshakes;
  const auto& trace = plane.trace();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    if (t.kind == MessageKind::PacketIn && t.inner == MessageKind::SubscribeAck) {
      ack_seen.emplace(t.subscription, i);
      ++handshakes[t.subscription];
    }
    if (t.kind == MessageKind::FlowMod && !ack_seen.count(t.subscription))
      problems.push_back("flow installed for subscription " + std::to_string(t.subscription) +
                         " before the publisher acknowledged it");
  }
  for (const auto& [sub, n] : handshakes)
    if (n > 1) problems.push_back("subscription " + std::to_string(sub) + " was acknowledged more than once");
  for (const auto& e : plane.flow_entries()) {
    const auto& r = plane.records().at(static_cast<std::size_t>(e.subscription));
    if (r.admission_step < 0) problems.push_back("flow entry for a subscription that was never admitted");
    auto it = ack_seen.find(e.subscription);
    if (it == ack_seen.end() || trace[it->second].time > e.installed)
      problems.push_back("flow entry installed before the publisher's acknowledgement");
  }
  return problems;
}

}  // namespace tsnr
