#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsnr/event_queue.hpp"
#include "tsnr/model.hpp"
#include "tsnr/reservation.hpp"

namespace tsnr {

using OptionList = std::vector<std::pair<std::string, std::string>>;

class NegotiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Service QoS as advertised by a publisher or requested by a subscriber.
struct QosOptions {
  std::int64_t max_payload = 0;            // bytes
  std::int64_t min_interval_us = 0;
  std::int64_t max_burst = 0;              // bytes
  std::optional<std::int64_t> deadline_us;
  std::optional<int> priority;             // PCP 0-7
  Transport transport = Transport::UDP;
  // Frame size on the wire without IFG and safety byte; overrides the size derived from
  // max_payload when set.
  std::optional<std::int64_t> wire_frame;

  void validate() const;  // throws NegotiationError
  OptionList encode() const;
  // Unknown keys are ignored. Throws NegotiationError on a malformed known key.
  static QosOptions decode(const OptionList& options);

  Bits frame_bits() const;
  std::int64_t frames_per_interval() const;  // ceil(max_burst / max_payload)
  TrafficContract contract() const;

  bool operator==(const QosOptions&) const = default;
};

struct PriorityConfig {
  std::map<int, TrafficClass> pcp_map{{3, TrafficClass::A}, {2, TrafficClass::B}, {0, TrafficClass::BestEffort}};
  Nanos class_a_cutoff = 1'000'000;  // deadline <= cutoff selects class A
};

// Explicit PCP through the map (unmapped PCPs are best effort), otherwise the deadline threshold.
TrafficClass assign_priority(const QosOptions& qos, const PriorityConfig& config);
int default_pcp(TrafficClass cls);

enum class MessageKind : std::uint8_t {
  Offer,
  Find,
  Subscribe,
  SubscribeAck,
  SubscribeNack,
  Unsubscribe,
  StopOffer,
  PacketIn,
  PacketOut,
  FlowMod,
};

const char* to_string(MessageKind k);

struct ControlMessage {
  MessageKind kind = MessageKind::Offer;
  int service = -1;
  int instance = 0;
  int subscription = -1;
  NodeId endpoint = -1;  // originating endpoint, or the addressed one for controller output
  OptionList options;
};

// Latencies of the simulated control plane.
struct ControlTiming {
  Nanos switch_forwarding = 8'000;
  Nanos switch_processing = 100'000;   // PacketIn generation, PacketOut and FlowMod handling
  Nanos controller_processing = 100'000;
  std::int64_t control_link_bps = 1'000'000'000;
  Nanos control_link_propagation = 0;
  std::int64_t message_bytes = 100;
  Nanos retry_interval = 50'000'000;
  int retries = 2;
};

enum class SubscriptionOutcome : std::uint8_t {
  Pending,
  Accepted,
  RejectedByPublisher,
  RejectedByAdmission,
  TimedOut,
};

const char* to_string(SubscriptionOutcome o);

struct SubscriptionRecord {
  int id = -1;
  int service = -1;
  NodeId subscriber = -1;
  std::optional<std::int64_t> deadline_us;
  Nanos start = 0;
  Nanos end = -1;  // subscriber received the final Ack/Nack, or gave up
  SubscriptionOutcome outcome = SubscriptionOutcome::Pending;
  RejectReason reason = RejectReason::None;
  std::string detail;
  int attempts = 0;
  int admission_step = -1;
  Nanos removed = -1;  // controller removed the admitted reservation
};

// One control-plane observation, in processing order.
struct TraceEntry {
  Nanos time = 0;
  MessageKind kind = MessageKind::Offer;   // transport kind (PacketIn, PacketOut, FlowMod) or endpoint kind
  MessageKind inner = MessageKind::Offer;  // endpoint message carried
  NodeId at = -1;                          // -1 for the controller
  int service = -1;
  int subscription = -1;
};

// Forwarding entry for one subscription's path at one switch.
struct FlowEntry {
  int flow = -1;
  int subscription = -1;
  NodeId node = -1;  // switch
  Nanos installed = 0;
  Nanos removed = INT64_MAX;
};

struct IdleSlopeStep {
  int step = 0;
  Nanos time = 0;
  int subscription = -1;
  QueueId queue;
  Rational idle_slope;
};

enum class TeardownCause : std::uint8_t { Unsubscribe, StopOffer, Timeout };

struct ServiceEndpoint {
  std::string name;
  NodeId publisher = -1;
  std::set<NodeId> denied;  // publisher-side access control
  std::string family;
};

struct RegistryEntry {
  NodeId publisher = -1;
  std::optional<QosOptions> qos;
  OptionList raw;  // last advertised option list
};

// Controller as rendezvous point plus the endpoint state machines, driven by one event queue.
// Admission runs serially at controller handling instants; message transport overlaps.
class ControlPlane {
 public:
  ControlPlane(NetworkState initial, ControlTiming timing, PriorityConfig priority);

  int add_service(ServiceEndpoint service);

  void offer(int service, Nanos at, std::optional<QosOptions> qos);
  // Issues a Find first when the subscriber has not yet seen an Offer.
  int subscribe(int service, NodeId subscriber, Nanos at, std::optional<std::int64_t> deadline_us = {});
  void unsubscribe(int subscription, Nanos at);
  void stop_offer(int service, Nanos at);

  // Processes control events up to and including `until`.
  void run(Nanos until = INT64_MAX);

  // Immediate controller-side removal of a flow and all its subscriptions.
  void teardown(int flow_id, TeardownCause cause);

  const NetworkState& state() const { return state_; }
  const std::vector<SubscriptionRecord>& records() const { return records_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const std::vector<FlowEntry>& flow_entries() const { return entries_; }
  const std::vector<IdleSlopeStep>& idle_history() const { return history_; }
  const std::map<int, RegistryEntry>& registry() const { return registry_; }
  const std::vector<ServiceEndpoint>& services() const { return services_; }
  // Active flow entries per switch at the current control time.
  std::map<NodeId, std::set<int>> flow_tables() const;
  Nanos now() const { return events_.now(); }

  // Earliest start to latest completion over finished subscriptions; 0 when none.
  Nanos setup_span() const;

 private:
  enum Kind : std::uint32_t { Start, Send, Deliver, Timer, Install, Remove };
  enum class Stage : std::uint8_t { Idle, Finding, Subscribing, Done };

  struct Subscription {
    Stage stage = Stage::Idle;
    int attempt = 0;
    std::int64_t timer_generation = 0;
    bool controller_busy = false;  // controller has seen the Subscribe and not yet answered
    bool active = false;
  };

  struct Pending {
    ControlMessage msg;
    NodeId from = -1;  // -1 for the controller
    NodeId to = -1;    // -1 for the controller
  };

  int store(ControlMessage msg, NodeId from, NodeId to);
  Nanos uplink_latency(NodeId endpoint) const;
  Nanos downlink_latency(NodeId endpoint) const;
  Nanos control_link_tx() const;

  void send_from_endpoint(NodeId from, ControlMessage msg, Nanos at);
  void send_to_endpoint(NodeId to, ControlMessage msg);
  void handle(const Pending& p);
  void handle_controller(const ControlMessage& m);
  void handle_endpoint(NodeId at, const ControlMessage& m);
  void on_timer(int subscription, std::int64_t generation);
  void finish(int subscription, SubscriptionOutcome outcome, RejectReason reason, std::string detail);

  void admit_subscription(int subscription);
  void remove_subscription(int subscription);
  void start(int subscription);
  void arm_timer(int subscription);
  void send_stage_message(int subscription);
  void reject_at_controller(int subscription, RejectReason reason, std::string detail);
  void remove_entries(int subscription, Nanos at);
  void record_changes(const std::map<QueueId, Rational>& before, int subscription);
  std::map<QueueId, Rational> idle_slopes() const;
  Nanos effective_deadline(int flow_id) const;  // ns, 0 when no subscriber states one

  NetworkState state_;
  ControlTiming timing_;
  PriorityConfig priority_;
  EventQueue events_;

  std::vector<ServiceEndpoint> services_;
  std::vector<SubscriptionRecord> records_;
  std::vector<Subscription> subs_;
  std::vector<Pending> messages_;
  std::vector<TraceEntry> trace_;
  std::vector<FlowEntry> entries_;
  std::vector<IdleSlopeStep> history_;
  std::map<int, RegistryEntry> registry_;
  std::map<int, std::set<NodeId>> pending_finds_;
  std::set<std::pair<NodeId, int>> known_;            // (subscriber, service) that saw an Offer
  std::map<int, std::set<int>> flow_subscriptions_;  // flow -> admitted subscriptions
  int steps_ = 0;
};

// Control-plane invariants over a finished trace. Empty when all hold.
std::vector<std::string> check_control_trace(const ControlPlane& plane);

}  // namespace tsnr
