#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "wsnho/error.hpp"

namespace wsnho {

// Simulation time in seconds. Finite and non-negative.
struct SimTime {
  double seconds = 0.0;

  constexpr auto operator<=>(const SimTime&) const = default;

  friend constexpr SimTime operator+(SimTime t, double dt) { return SimTime{t.seconds + dt}; }
  friend constexpr double operator-(SimTime a, SimTime b) { return a.seconds - b.seconds; }
};

inline std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.seconds << "s"; }

struct NodeId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

template <typename Payload>
struct Event {
  SimTime fire_time;
  std::uint64_t seq = 0;
  NodeId target;
  Payload payload;
};

// Pending events ordered lexicographically by (fire_time, seq).
template <typename Payload>
class EventQueue {
 public:
  using EventType = Event<Payload>;

  // Assigns the next sequence number and returns it.
  std::uint64_t schedule(SimTime clock, SimTime fire_time, NodeId target, Payload payload) {
    if (!std::isfinite(fire_time.seconds)) {
      throw Error(Errc::PastTime, "fire time is not finite");
    }
    if (fire_time < clock) {
      throw Error(Errc::PastTime, "fire time " + std::to_string(fire_time.seconds) +
                                      " precedes clock " + std::to_string(clock.seconds));
    }
    const std::uint64_t seq = ++last_seq_;
    heap_.push(EventType{fire_time, seq, target, std::move(payload)});
    return seq;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const EventType& top() const { return heap_.top(); }

  EventType pop() {
    EventType ev = std::move(const_cast<EventType&>(heap_.top()));
    heap_.pop();
    return ev;
  }

  std::uint64_t last_seq() const { return last_seq_; }

 private:
  struct Later {
    bool operator()(const EventType& a, const EventType& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<EventType, std::vector<EventType>, Later> heap_;
  std::uint64_t last_seq_ = 0;
};

// Clock plus event queue. Handlers may schedule further work while run_until
// is executing; anything at or before t_end is processed in the same call.
template <typename Payload>
class Scheduler {
 public:
  using EventType = Event<Payload>;

  SimTime now() const { return clock_; }

  std::uint64_t schedule(SimTime fire_time, NodeId target, Payload payload) {
    return queue_.schedule(clock_, fire_time, target, std::move(payload));
  }

  std::uint64_t schedule_in(double delay, NodeId target, Payload payload) {
    return schedule(clock_ + delay, target, std::move(payload));
  }

  std::size_t pending() const { return queue_.size(); }

  template <typename Dispatch>
  std::size_t run_until(SimTime t_end, Dispatch&& dispatch) {
    if (t_end < clock_) {
      throw Error(Errc::PastTime, "run_until target precedes clock");
    }
    std::size_t processed = 0;
    while (!queue_.empty() && queue_.top().fire_time <= t_end) {
      EventType ev = queue_.pop();
      clock_ = ev.fire_time;
      dispatch(static_cast<const EventType&>(ev));
      ++processed;
    }
    clock_ = t_end;
    return processed;
  }

 private:
  SimTime clock_{};
  EventQueue<Payload> queue_;
};

// SplitMix64 (Steele, Lea, Flood 2014). The state advances by the golden
// gamma 0x9E3779B97F4A7C15 per draw and the output is mixed by
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// Uniform reals take the top 53 bits scaled by 2^-53.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Real in [0, 1).
  double draw() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * draw(); }

  // Integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(draw() * static_cast<double>(n)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

// 64-bit FNV-1a over a byte stream; used for dispatch-log digests.
class Fnv1a64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001B3ULL;
    }
  }

  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace wsnho

template <>
struct std::hash<wsnho::NodeId> {
  std::size_t operator()(wsnho::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
