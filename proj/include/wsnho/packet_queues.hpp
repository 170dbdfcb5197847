#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <optional>

#include "wsnho/sim_engine.hpp"

namespace wsnho {

inline constexpr int kPriorityClasses = 3;
inline constexpr int kControlClass = 0;
inline constexpr int kPayloadClass = 1;

struct Packet {
  std::uint64_t id = 0;
  NodeId src;
  NodeId dst;
  int priority_class = kPayloadClass;
  std::uint32_t size = 0;

  bool operator==(const Packet&) const = default;
};

enum class EnqueueResult { Accepted, Dropped };

struct QueueCounters {
  std::uint64_t queued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t dropped = 0;
  std::uint64_t peak_size = 0;
};

// Tail-drop FIFO bounded by packet count.
// Conservation: queued == dequeued + dropped + size() at all times, where
// `queued` counts every offered packet.
class FifoQueue {
 public:
  explicit FifoQueue(std::size_t capacity = 50) : capacity_(capacity) {}

  EnqueueResult enqueue(const Packet& p) {
    ++counters_.queued;
    if (contents_.size() >= capacity_) {
      ++counters_.dropped;
      return EnqueueResult::Dropped;
    }
    contents_.push_back(p);
    counters_.peak_size = std::max<std::uint64_t>(counters_.peak_size, contents_.size());
    return EnqueueResult::Accepted;
  }

  std::optional<Packet> dequeue() {
    if (contents_.empty()) return std::nullopt;
    Packet p = contents_.front();
    contents_.pop_front();
    ++counters_.dequeued;
    return p;
  }

  // Discards resident packets, counting them as drops.
  void flush() {
    counters_.dropped += contents_.size();
    contents_.clear();
  }

  std::size_t size() const { return contents_.size(); }
  bool empty() const { return contents_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const QueueCounters& counters() const { return counters_; }
  const std::deque<Packet>& contents() const { return contents_; }

 private:
  std::size_t capacity_;
  std::deque<Packet> contents_;
  QueueCounters counters_;
};

// Three FIFO classes served in strict order, class 0 first.
class StrictPriorityQueue {
 public:
  explicit StrictPriorityQueue(std::size_t capacity_per_class = 50)
      : classes_{FifoQueue(capacity_per_class), FifoQueue(capacity_per_class), FifoQueue(capacity_per_class)} {}

  EnqueueResult enqueue(const Packet& p) {
    if (p.priority_class < 0 || p.priority_class >= kPriorityClasses) {
      throw Error(Errc::ValidationError, "priority class out of range");
    }
    const auto cls = static_cast<std::size_t>(p.priority_class);
    ++counters_.queued;
    const EnqueueResult r = classes_[cls].enqueue(p);
    if (r == EnqueueResult::Dropped) {
      ++counters_.dropped;
    } else {
      counters_.peak_size = std::max<std::uint64_t>(counters_.peak_size, size());
    }
    return r;
  }

  std::optional<Packet> dequeue() {
    for (auto& q : classes_) {
      if (auto p = q.dequeue()) {
        ++counters_.dequeued;
        return p;
      }
    }
    return std::nullopt;
  }

  void flush() {
    for (auto& q : classes_) {
      counters_.dropped += q.size();
      q.flush();
    }
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& q : classes_) n += q.size();
    return n;
  }

  bool empty() const { return size() == 0; }
  const QueueCounters& counters() const { return counters_; }
  const FifoQueue& class_queue(int cls) const { return classes_.at(static_cast<std::size_t>(cls)); }

 private:
  std::array<FifoQueue, kPriorityClasses> classes_;
  QueueCounters counters_;
};

}  // namespace wsnho
