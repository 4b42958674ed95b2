#pragma once

#include <stdexcept>
#include <vector>

#include "tsnr/model.hpp"
#include "tsnr/rational.hpp"

namespace tsnr {

class UnboundedDelay : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Piece starting at `start` (seconds) with value `value` (bits) and slope `slope` (bit/s).
struct Segment {
  Rational start;
  Rational value;
  Rational slope;
};

// Non-decreasing piecewise-linear function on [0, inf). Right-continuous; a jump is
// allowed at a breakpoint (the token-bucket burst at t = 0).
class Curve {
 public:
  Curve();  // zero curve
  explicit Curve(std::vector<Segment> segments);

  Rational operator()(const Rational& t) const;
  const std::vector<Segment>& segments() const { return segs_; }
  const Rational& final_slope() const { return segs_.back().slope; }
  bool is_zero() const;
  bool is_concave() const;
  bool is_convex() const;

  // inf{ s : f(s) >= y } and inf{ s : f(s) > y }; +inf is reported as nullopt.
  std::optional<Rational> lower_inverse(const Rational& y) const;
  std::optional<Rational> upper_inverse(const Rational& y) const;

 private:
  std::size_t index_at(const Rational& t) const;
  std::vector<Segment> segs_;
};

Curve token_bucket(const Rational& burst_bits, const Rational& rate_bps);
Curve rate_latency(const Rational& rate_bps, const Rational& latency_s);

// Largest horizontal gap between an arrival curve and a service curve, in seconds.
// Throws UnboundedDelay when the arrival rate exceeds the service rate.
Rational horizontal_deviation(const Curve& alpha, const Curve& beta);
Rational horizontal_deviation_token_bucket(const Rational& burst_bits, const Rational& rate_bps,
                                           const Rational& service_rate_bps, const Rational& latency_s);

// alpha*(t) = alpha(t + delay).
Curve propagate_arrival(const Curve& alpha, const Rational& delay_s);

struct PortContext {
  std::int64_t capacity_bps = 0;
  Bits l_max = 0;                // largest frame of any class on the port
  Bits class_a_max_frame = 0;    // largest class A frame on the port
  Rational class_a_idle_slope;   // bits per second
};

// Latency of the CBS rate-latency service curve for class A or class B.
Rational cbs_service_latency(TrafficClass cls, const PortContext& port);

// Per-flow contribution to a queue: own burst, rate and the sum of upstream budgets.
struct FlowLoad {
  Rational burst_bits;
  Rational rate_bps;
  Rational upstream_budget_s;
};

Rational shifted_burst_sum(const std::vector<FlowLoad>& flows);
Rational rate_sum(const std::vector<FlowLoad>& flows);

// d_q(idle slope) = sum(b + r * upstream) / idle_slope + T_q.
Rational cbs_queue_delay(const std::vector<FlowLoad>& flows, const Rational& idle_slope_bps,
                         const Rational& service_latency_s);

// Completion bound for one frame of `own_frame_bits` in the same queue: bits ahead of it
// are drained at the idle slope, the frame itself leaves at link rate once started.
Rational cbs_frame_delay(const std::vector<FlowLoad>& flows, Bits own_frame_bits,
                         const Rational& idle_slope_bps, const Rational& service_latency_s,
                         std::int64_t capacity_bps);

}  // namespace tsnr
