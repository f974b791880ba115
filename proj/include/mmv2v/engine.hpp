#pragma once

// Discrete-event core: integer-nanosecond virtual time, an insertion-ordered
// event queue with cancellation, and label-addressed random streams.

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mmv2v {

/// Raised for invalid parameters anywhere in the simulator.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Virtual time stored as integer nanoseconds.
class SimTime {
public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us * 1000); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1'000'000); }

  static SimTime from_seconds(double s) {
    if (!std::isfinite(s))
      throw ConfigError("time value must be finite");
    return SimTime(static_cast<std::int64_t>(std::llround(s * 1e9)));
  }

  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }
  constexpr double milliseconds() const { return static_cast<double>(ns_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime(ns_ * k); }

private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

class EventHandle {
public:
  constexpr EventHandle() = default;
  constexpr explicit EventHandle(std::uint64_t id) : id_(id) {}
  constexpr std::uint64_t id() const { return id_; }
  constexpr bool valid() const { return id_ != 0; }
  constexpr bool operator==(const EventHandle&) const = default;

private:
  std::uint64_t id_ = 0;
};

/// Single-threaded event scheduler. Events fire in (time, insertion order).
class Simulator {
public:
  using Action = std::function<void()>;
  /// Observer invoked just before each event fires; receives (time, sequence number).
  using TraceHook = std::function<void(SimTime, std::uint64_t)>;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime delay, Action action) {
    if (finished_)
      throw ConfigError("cannot schedule on a finished simulation");
    if (delay < SimTime())
      throw ConfigError("event delay must be nonnegative");
    return push(now_ + delay, std::move(action));
  }

  EventHandle schedule_seconds(double delay_s, Action action) {
    if (!std::isfinite(delay_s) || delay_s < 0.0)
      throw ConfigError("event delay must be finite and nonnegative");
    return schedule(SimTime::from_seconds(delay_s), std::move(action));
  }

  EventHandle schedule_at(SimTime when, Action action) {
    if (when < now_)
      throw ConfigError("cannot schedule an event in the past");
    return schedule(when - now_, std::move(action));
  }

  /// Cancelling an already-fired or unknown handle is a no-op.
  void cancel(EventHandle h) {
    if (h.valid() && pending_.count(h.id()))
      cancelled_.insert(h.id());
  }

  bool is_pending(EventHandle h) const {
    return h.valid() && pending_.count(h.id()) && !cancelled_.count(h.id());
  }

  /// Fires every event with time <= t_end, then parks the clock at t_end.
  std::size_t run_until(SimTime t_end) {
    if (t_end < now_)
      throw ConfigError("run_until target precedes current time");
    std::size_t fired = 0;
    while (!queue_.empty() && queue_.top().when <= t_end) {
      Entry e = queue_.top();
      queue_.pop();
      pending_.erase(e.seq);
      if (cancelled_.erase(e.seq))
        continue;
      now_ = e.when;
      if (trace_)
        trace_(now_, e.seq);
      ++fired;
      e.action();
    }
    now_ = t_end;
    return fired;
  }

  void finish() { finished_ = true; }
  bool finished() const { return finished_; }

  std::size_t pending_count() const { return pending_.size() - cancelled_.size(); }

  void set_trace(TraceHook hook) { trace_ = std::move(hook); }

private:
  struct Entry {
    SimTime when;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.when != b.when)
        return a.when > b.when;
      return a.seq > b.seq;
    }
  };

  EventHandle push(SimTime when, Action action) {
    const std::uint64_t seq = ++next_seq_;
    queue_.push(Entry{when, seq, std::move(action)});
    pending_.insert(seq);
    return EventHandle(seq);
  }

  SimTime now_;
  std::uint64_t next_seq_ = 0;
  bool finished_ = false;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_set<std::uint64_t> pending_;
  std::unordered_set<std::uint64_t> cancelled_;
  TraceHook trace_;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace detail

/// Seed of the substream named `label` under `master_seed`. Streams are keyed
/// by hash so that adding a label never shifts the draws of another.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view label) {
  return detail::splitmix64(detail::splitmix64(master_seed) ^ detail::fnv1a(label));
}

class RngStream {
public:
  RngStream(std::uint64_t master_seed, std::string label)
      : master_seed_(master_seed), label_(std::move(label)),
        engine_(derive_stream_seed(master_seed, label_)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  const std::string& label() const { return label_; }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return mean + stddev * standard_normal_(engine_);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::uint64_t master_seed_;
  std::string label_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> standard_normal_{0.0, 1.0};
};

/// Owns every stream of one run; repeated lookups return the same stream object.
class RngFactory {
public:
  explicit RngFactory(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const { return master_seed_; }

  RngStream& stream(const std::string& label) {
    auto it = streams_.find(label);
    if (it == streams_.end())
      it = streams_.emplace(label, RngStream(master_seed_, label)).first;
    return it->second;
  }

private:
  std::uint64_t master_seed_;
  std::map<std::string, RngStream> streams_;
};

} // namespace mmv2v
