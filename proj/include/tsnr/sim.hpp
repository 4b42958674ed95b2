#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsnr/event_queue.hpp"
#include "tsnr/model.hpp"

namespace tsnr {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Forwarding entry lifetime for one out port of a switch.
struct GateWindow {
  Nanos from = 0;
  Nanos until = INT64_MAX;
};

struct SourceSpec {
  int flow = -1;
  std::string name;
  NodeId publisher = -1;
  TrafficClass cls = TrafficClass::A;  // class used on the wire
  Bits frame_bits = 0;                  // MFS including IFG and safety byte
  std::int64_t frames_per_burst = 1;
  Nanos interval = 0;                   // ignored when saturating
  Nanos start = 0;
  Nanos stop = INT64_MAX;
  bool saturating = false;              // back to back at the first link's rate
  // Saturating sources only: below 1, gaps between frames are exponential with the mean
  // that gives this share of the first link.
  double load = 1.0;
  std::vector<Path> paths;
  // Forwarding entries keyed by switch egress port. Empty means pre-installed (all open);
  // otherwise a port without an entry is closed.
  std::map<PortId, std::vector<GateWindow>> gates;
};

struct SimConfig {
  Nanos duration = 1'000'000'000;
  std::uint64_t seed = 1;
  Nanos phase_jitter = 0;   // each source start shifted by U[0, phase_jitter]
  int be_queue_limit = 100;
  std::int64_t backlog_warning = 100'000;
  std::ostream* trace = nullptr;  // per-frame CSV log
};

struct DelayStats {
  std::int64_t count = 0;
  Nanos min = INT64_MAX;
  Nanos max = 0;
  __int128 sum = 0;

  void add(Nanos v);
  double average() const;
  bool operator==(const DelayStats&) const = default;
};

struct FlowDelay {
  int flow = -1;
  std::string name;
  NodeId subscriber = -1;
  DelayStats e2e;
  std::int64_t sent = 0;
};

struct QueueDelay {
  QueueId queue;  // host ports use the host's node id
  DelayStats wait;
  std::int64_t max_backlog = 0;
};

struct AuditReport {
  std::int64_t segments = 0;
  std::int64_t credit_violations = 0;
  std::int64_t ineligible_starts = 0;
  std::int64_t overlap_violations = 0;
  std::int64_t positive_idle_credit = 0;
  std::vector<std::string> first_problems;

  bool clean() const {
    return credit_violations == 0 && ineligible_starts == 0 && overlap_violations == 0 && positive_idle_credit == 0;
  }
};

struct SimResult {
  std::vector<FlowDelay> flows;    // per (flow, subscriber)
  std::vector<QueueDelay> queues;  // every port and class that carried a frame
  std::int64_t frames_released = 0;
  std::int64_t frames_delivered = 0;
  std::int64_t dropped_ingress = 0;
  std::int64_t dropped_tail = 0;
  std::int64_t growth_warnings = 0;
  std::uint64_t events = 0;
  std::uint64_t trace_hash = 0;  // FNV-1a over every processed event
  AuditReport audit;
};

// Independent replay of credit observations. Each observation carries the queue state that
// holds until the next observation of the same queue.
class CreditAuditor {
 public:
  struct Observation {
    Nanos time = 0;
    __int128 credit = 0;  // nano-bits
    bool backlogged = false;
    bool transmitting = false;
  };

  // Registers a CBS queue; returns its handle.
  int add_queue(std::int64_t idle_slope_bps, std::int64_t capacity_bps);
  void observe(int queue, const Observation& o);
  void transmission_start(int queue, Nanos time, __int128 credit);
  void link_busy(int port, Nanos start, Nanos end);
  const AuditReport& report() const { return report_; }

 private:
  struct Track {
    std::int64_t idle = 0;
    std::int64_t capacity = 0;
    bool seen = false;
    Observation last;
  };
  void problem(std::int64_t& counter, std::string text);

  std::vector<Track> tracks_;
  std::vector<Nanos> busy_until_;
  AuditReport report_;
};

// Port with two CBS classes over best effort, or a plain strict-priority host port.
struct CbsQueueRuntime {
  std::int64_t idle_slope = 0;  // bits per second
  std::int64_t send_slope = 0;  // idle_slope - C
  __int128 credit = 0;          // nano-bits (bits * 1e9)
  Nanos updated = 0;
  bool transmitting = false;
};

// Frame choice given backlogs and credits: class A, then class B, then best effort.
// -1 when nothing is eligible. Shaped classes need non-negative credit.
int cbs_transmit_select(bool shaped, const bool backlogged[3], const __int128 credit[2]);

// Sources for a cross-traffic chain: one per target link, each sending to the next node.
SourceSpec cross_traffic_generator(int flow, const std::string& name, NodeId from, NodeId to,
                                   const std::vector<PortId>& links, Bits frame_bits, Nanos interval,
                                   TrafficClass cls, bool saturating);

// Runs one simulation. Idle slopes are whole bits per second per CBS queue.
SimResult simulate(const Topology& topology, const std::map<QueueId, std::int64_t>& idle_slopes,
                   const std::vector<SourceSpec>& sources, const SimConfig& config);

}  // namespace tsnr
