#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "tsnr/rational.hpp"

namespace tsnr {

// Processed in (time, sequence) order; sequence numbers are assigned at push.
struct Event {
  Nanos time = 0;
  std::uint64_t seq = 0;
  std::uint32_t kind = 0;
  std::int32_t a = 0;
  std::int64_t b = 0;
};

class EventQueue {
 public:
  explicit EventQueue(std::uint64_t max_pending = 50'000'000) : max_pending_(max_pending) {}

  void push(Nanos time, std::uint32_t kind, std::int32_t a = 0, std::int64_t b = 0) {
    if (time < now_) throw std::logic_error("event scheduled in the past");
    if (heap_.size() >= max_pending_) throw std::runtime_error("event queue overflow");
    heap_.push(Event{time, next_seq_++, kind, a, b});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  Nanos now() const { return now_; }
  Nanos next_time() const { return heap_.top().time; }
  std::uint64_t processed() const { return processed_; }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    ++processed_;
    return e;
  }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t max_pending_;
  Nanos now_ = 0;
};

}  // namespace tsnr
