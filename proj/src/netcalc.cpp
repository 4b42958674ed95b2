#include "tsnr/netcalc.hpp"

#include <algorithm>

namespace tsnr {

Curve::Curve() : segs_{Segment{Rational(0), Rational(0), Rational(0)}} {}

Curve::Curve(std::vector<Segment> segments) : segs_(std::move(segments)) {
  if (segs_.empty()) throw std::invalid_argument("curve needs at least one segment");
  if (segs_.front().start != 0) throw std::invalid_argument("curve must start at t = 0");
  if (sgn(segs_.front().value) < 0) throw std::invalid_argument("curve must be non-negative");
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    if (sgn(segs_[i].slope) < 0) throw std::invalid_argument("curve must be non-decreasing");
    if (i == 0) continue;
    const auto& p = segs_[i - 1];
    if (segs_[i].start <= p.start) throw std::invalid_argument("breakpoints must increase");
    Rational left = p.value + p.slope * (segs_[i].start - p.start);
    if (segs_[i].value < left) throw std::invalid_argument("curve must be non-decreasing");
  }
}

std::size_t Curve::index_at(const Rational& t) const {
  std::size_t i = 0;
  while (i + 1 < segs_.size() && segs_[i + 1].start <= t) ++i;
  return i;
}

Rational Curve::operator()(const Rational& t) const {
  if (sgn(t) < 0) return Rational(0);
  const auto& s = segs_[index_at(t)];
  return s.value + s.slope * (t - s.start);
}

bool Curve::is_zero() const {
  return std::all_of(segs_.begin(), segs_.end(), [](const Segment& s) { return s.value == 0 && s.slope == 0; });
}

bool Curve::is_concave() const {
  for (std::size_t i = 1; i < segs_.size(); ++i) {
    const auto& p = segs_[i - 1];
    Rational left = p.value + p.slope * (segs_[i].start - p.start);
    if (segs_[i].value != left || segs_[i].slope > p.slope) return false;
  }
  return true;
}

bool Curve::is_convex() const {
  if (segs_.front().value != 0) return false;
  for (std::size_t i = 1; i < segs_.size(); ++i) {
    const auto& p = segs_[i - 1];
    Rational left = p.value + p.slope * (segs_[i].start - p.start);
    if (segs_[i].value != left || segs_[i].slope < p.slope) return false;
  }
  return true;
}

std::optional<Rational> Curve::lower_inverse(const Rational& y) const {
  if (segs_.front().value >= y) return Rational(0);
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const auto& s = segs_[i];
    if (s.value >= y) return s.start;
    Rational end_value;
    bool last = i + 1 == segs_.size();
    if (!last) {
      end_value = s.value + s.slope * (segs_[i + 1].start - s.start);
      if (end_value >= y && sgn(s.slope) > 0) return s.start + (y - s.value) / s.slope;
    } else if (sgn(s.slope) > 0) {
      return s.start + (y - s.value) / s.slope;
    }
  }
  return std::nullopt;
}

std::optional<Rational> Curve::upper_inverse(const Rational& y) const {
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const auto& s = segs_[i];
    if (s.value > y) return s.start;
    bool last = i + 1 == segs_.size();
    if (sgn(s.slope) == 0) continue;
    Rational t = s.start + (y - s.value) / s.slope;
    if (last || t < segs_[i + 1].start) return t;
  }
  return std::nullopt;
}

Curve token_bucket(const Rational& burst_bits, const Rational& rate_bps) {
  if (sgn(burst_bits) < 0 || sgn(rate_bps) < 0) throw std::invalid_argument("token bucket parameters must be >= 0");
  return Curve({Segment{Rational(0), burst_bits, rate_bps}});
}

Curve rate_latency(const Rational& rate_bps, const Rational& latency_s) {
  if (sgn(rate_bps) <= 0) throw std::invalid_argument("service rate must be positive");
  if (sgn(latency_s) < 0) throw std::invalid_argument("latency must be >= 0");
  if (latency_s == 0) return Curve({Segment{Rational(0), Rational(0), rate_bps}});
  return Curve({Segment{Rational(0), Rational(0), Rational(0)}, Segment{latency_s, Rational(0), rate_bps}});
}

Rational horizontal_deviation(const Curve& alpha, const Curve& beta) {
  if (alpha.is_zero()) return Rational(0);
  if (alpha.final_slope() > beta.final_slope() || sgn(beta.final_slope()) == 0)
    throw UnboundedDelay("arrival rate exceeds service rate");

  // The gap beta^-1(alpha(t)) - t is linear between these candidates.
  std::vector<Rational> candidates;
  for (const auto& s : alpha.segments()) candidates.push_back(s.start);
  for (const auto& s : beta.segments()) {
    for (const Rational& y : {s.value}) {
      if (auto t = alpha.lower_inverse(y)) candidates.push_back(*t);
      if (auto t = alpha.upper_inverse(y)) candidates.push_back(*t);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  Rational best(0);
  const auto& segs = alpha.segments();
  for (const auto& t : candidates) {
    Rational y = alpha(t);
    auto inv = beta.lower_inverse(y);
    if (!inv) throw UnboundedDelay("service curve never reaches arrival");
    best = std::max<Rational>(best, *inv - t);
    // Right limit: alpha rises just after t, so the gap tends to the end of any plateau of beta at y.
    std::size_t i = 0;
    while (i + 1 < segs.size() && segs[i + 1].start <= t) ++i;
    if (sgn(segs[i].slope) > 0) {
      auto up = beta.upper_inverse(y);
      if (!up) throw UnboundedDelay("service curve never exceeds arrival");
      best = std::max<Rational>(best, *up - t);
    }
  }
  return best;
}

Rational horizontal_deviation_token_bucket(const Rational& burst_bits, const Rational& rate_bps,
                                           const Rational& service_rate_bps, const Rational& latency_s) {
  if (sgn(burst_bits) < 0 || sgn(rate_bps) < 0) throw std::invalid_argument("token bucket parameters must be >= 0");
  if (sgn(service_rate_bps) <= 0 || sgn(latency_s) < 0) throw std::invalid_argument("invalid service curve");
  if (burst_bits == 0 && rate_bps == 0) return Rational(0);
  if (rate_bps > service_rate_bps) throw UnboundedDelay("arrival rate exceeds service rate");
  return latency_s + burst_bits / service_rate_bps;
}

Curve propagate_arrival(const Curve& alpha, const Rational& delay_s) {
  if (sgn(delay_s) < 0) throw std::invalid_argument("delay must be >= 0");
  if (delay_s == 0) return alpha;
  std::vector<Segment> out;
  out.push_back(Segment{Rational(0), alpha(delay_s), alpha.segments()[0].slope});
  for (const auto& s : alpha.segments()) {
    if (s.start <= delay_s) {
      out.back().slope = s.slope;
      continue;
    }
    out.push_back(Segment{s.start - delay_s, s.value, s.slope});
  }
  return Curve(std::move(out));
}

Rational cbs_service_latency(TrafficClass cls, const PortContext& port) {
  if (port.capacity_bps <= 0) throw std::invalid_argument("link capacity must be positive");
  Rational c = rat(port.capacity_bps);
  if (cls == TrafficClass::A) return rat(port.l_max) / c;
  if (cls != TrafficClass::B) throw std::invalid_argument("service latency is defined for class A and B only");
  if (port.class_a_idle_slope >= c) throw UnboundedDelay("class A idle slope reaches link capacity");
  return rat(port.l_max + port.class_a_max_frame) / c +
         port.class_a_idle_slope / (c - port.class_a_idle_slope) * rat(port.l_max) / c;
}

Rational shifted_burst_sum(const std::vector<FlowLoad>& flows) {
  Rational sum(0);
  for (const auto& f : flows) sum += f.burst_bits + f.rate_bps * f.upstream_budget_s;
  return sum;
}

Rational rate_sum(const std::vector<FlowLoad>& flows) {
  Rational sum(0);
  for (const auto& f : flows) sum += f.rate_bps;
  return sum;
}

Rational cbs_queue_delay(const std::vector<FlowLoad>& flows, const Rational& idle_slope_bps,
                         const Rational& service_latency_s) {
  Rational num = shifted_burst_sum(flows);
  if (num == 0 && rate_sum(flows) == 0) return service_latency_s;
  if (sgn(idle_slope_bps) <= 0 || idle_slope_bps < rate_sum(flows))
    throw UnboundedDelay("idle slope below the long-term arrival rate");
  return num / idle_slope_bps + service_latency_s;
}

Rational cbs_frame_delay(const std::vector<FlowLoad>& flows, Bits own_frame_bits,
                         const Rational& idle_slope_bps, const Rational& service_latency_s,
                         std::int64_t capacity_bps) {
  Rational num = shifted_burst_sum(flows);
  if (rat(own_frame_bits) > num) throw std::invalid_argument("own frame exceeds the queue's burst");
  if (sgn(idle_slope_bps) <= 0 || idle_slope_bps < rate_sum(flows))
    throw UnboundedDelay("idle slope below the long-term arrival rate");
  return service_latency_s + (num - rat(own_frame_bits)) / idle_slope_bps + rat(own_frame_bits, capacity_bps);
}

}  // namespace tsnr
