#pragma once

// Upper stack: application traffic patterns, IP/UDP/PDCP header accounting,
// and RLC unacknowledged mode (segmentation/concatenation on transmit,
// reordering window with t-Reordering and reassembly on receive).

#include "mmv2v/engine.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace mmv2v {

using PacketId = std::uint64_t;

struct HeaderSizes {
  int udp = 8;
  int ipv4 = 20;
  int pdcp = 3;
  int rlc = 2;
  int rlc_per_extra_segment = 1;

  /// Bytes handed to RLC for one application payload.
  int sdu_bytes(int payload) const { return payload + udp + ipv4 + pdcp; }
};

/// Bytes on air for a payload carried alone in a single-segment PDU.
inline int add_headers(int payload_bytes, const HeaderSizes& h = {}) {
  return h.sdu_bytes(payload_bytes) + h.rlc;
}

struct AppPacket {
  PacketId id = 0;
  int payload_bytes = 0;
  SimTime created_at;
  std::optional<SimTime> delivered_at;
};

struct TrafficSource {
  enum class Kind { Cbr, OnOff };
  Kind kind = Kind::Cbr;
  double rate_bps = 800e3;
  int packet_bytes = 100;
  SimTime on_duration = SimTime::from_ms(100);
  SimTime off_mean = SimTime::from_ms(100);

  static TrafficSource cbr(double rate_bps, int packet_bytes) {
    return {Kind::Cbr, rate_bps, packet_bytes, {}, {}};
  }
  static TrafficSource on_off(double rate_bps, int packet_bytes, SimTime on = SimTime::from_ms(100),
                              SimTime off_mean = SimTime::from_ms(100)) {
    return {Kind::OnOff, rate_bps, packet_bytes, on, off_mean};
  }

  void validate() const {
    if (!(rate_bps > 0.0) || !std::isfinite(rate_bps))
      throw ConfigError("app.rate_bps must be positive");
    if (packet_bytes <= 0)
      throw ConfigError("app.packet_bytes must be positive");
    if (kind == Kind::OnOff && (on_duration <= SimTime() || off_mean <= SimTime()))
      throw ConfigError("on/off durations must be positive");
  }

  double packet_interval_s() const { return packet_bytes * 8.0 / rate_bps; }
};

/// Creation times of a source's packets, produced lazily. CBR emits at
/// start + k * interval. ON-OFF starts with an exponential OFF period, then
/// alternates fixed ON periods (CBR inside) with exponential OFF periods.
class TrafficPattern {
public:
  TrafficPattern(TrafficSource source, RngStream& rng, SimTime start = {})
      : src_(source), rng_(&rng), start_(start) {
    src_.validate();
    interval_s_ = src_.packet_interval_s();
    if (src_.kind == TrafficSource::Kind::OnOff) {
      phase_start_ = start_ + draw_off();
      phase_end_ = phase_start_ + src_.on_duration;
    } else {
      phase_start_ = start_;
      phase_end_ = SimTime::max();
    }
  }

  SimTime next() {
    for (;;) {
      const SimTime t = phase_start_ + SimTime::from_seconds(static_cast<double>(k_) * interval_s_);
      if (t < phase_end_) {
        ++k_;
        return t;
      }
      // ON period exhausted: idle, then begin the next ON period.
      phase_start_ = phase_end_ + draw_off();
      phase_end_ = phase_start_ + src_.on_duration;
      k_ = 0;
    }
  }

  const TrafficSource& source() const { return src_; }

private:
  SimTime draw_off() { return SimTime::from_seconds(rng_->exponential(src_.off_mean.seconds())); }

  TrafficSource src_;
  RngStream* rng_;
  SimTime start_;
  double interval_s_ = 0.0;
  SimTime phase_start_;
  SimTime phase_end_;
  std::int64_t k_ = 0;
};

struct RlcSegment {
  PacketId packet_id = 0;
  int offset = 0;
  int length = 0;
  int sdu_bytes = 0;

  bool is_last() const { return offset + length == sdu_bytes; }
  bool operator==(const RlcSegment&) const = default;
};

struct RlcPdu {
  std::uint32_t sn = 0;
  std::vector<RlcSegment> segments;
  int header_bytes = 0;

  int size_bytes() const {
    int n = header_bytes;
    for (const auto& s : segments)
      n += s.length;
    return n;
  }
};

struct RlcSdu {
  PacketId packet_id = 0;
  int bytes = 0;
};

/// Transmit side: FIFO of SDUs with tail drop, filled into one PDU per grant.
class RlcTxEntity {
public:
  explicit RlcTxEntity(std::size_t buffer_bytes = 512 * 1024, HeaderSizes headers = {}, int sn_bits = 10)
      : capacity_(buffer_bytes), headers_(headers), sn_modulus_(1u << sn_bits) {
    if (sn_bits < 2 || sn_bits > 16)
      throw ConfigError("rlc.sn_bits must lie in [2, 16]");
  }

  /// False when the SDU would overflow the buffer (dropped whole).
  bool enqueue(RlcSdu sdu) {
    if (buffered_ + static_cast<std::size_t>(sdu.bytes) > capacity_)
      return false;
    queue_.push_back({sdu, 0});
    buffered_ += static_cast<std::size_t>(sdu.bytes);
    return true;
  }

  bool empty() const { return queue_.empty(); }
  std::size_t buffered_bytes() const { return buffered_; }
  std::uint32_t next_sn() const { return next_sn_; }

  /// Builds at most one PDU fitting `capacity_bits`: the head SDU (or what is
  /// left of it) followed by as many further SDUs as fit, the last one possibly
  /// segmented. Nothing is emitted when the grant cannot hold a header plus one byte.
  std::vector<RlcPdu> fill(std::int64_t capacity_bits) {
    const std::int64_t cap = capacity_bits / 8;
    if (queue_.empty() || cap < headers_.rlc + 1)
      return {};
    RlcPdu pdu;
    pdu.sn = next_sn_;
    pdu.header_bytes = headers_.rlc;
    std::int64_t room = cap - headers_.rlc;
    while (!queue_.empty()) {
      if (!pdu.segments.empty()) {
        if (room < headers_.rlc_per_extra_segment + 1)
          break;
        room -= headers_.rlc_per_extra_segment;
        pdu.header_bytes += headers_.rlc_per_extra_segment;
      }
      Pending& head = queue_.front();
      const int left = head.sdu.bytes - head.sent;
      const int take = static_cast<int>(std::min<std::int64_t>(room, left));
      pdu.segments.push_back({head.sdu.packet_id, head.sent, take, head.sdu.bytes});
      head.sent += take;
      room -= take;
      buffered_ -= static_cast<std::size_t>(take);
      if (head.sent == head.sdu.bytes)
        queue_.pop_front();
      if (room <= 0)
        break;
    }
    next_sn_ = (next_sn_ + 1) % sn_modulus_;
    return {std::move(pdu)};
  }

private:
  struct Pending {
    RlcSdu sdu;
    int sent;
  };
  std::size_t capacity_;
  HeaderSizes headers_;
  std::uint32_t sn_modulus_;
  std::uint32_t next_sn_ = 0;
  std::size_t buffered_ = 0;
  std::deque<Pending> queue_;
};

struct DeliveredSdu {
  PacketId packet_id = 0;
  int bytes = 0;
  SimTime at;
  bool operator==(const DeliveredSdu&) const = default;
};

/// Receive side of RLC UM. State variables follow the usual naming:
/// rx_next_reassembly (first SN still awaited), rx_next_highest (highest
/// received SN + 1) and the SN that armed t-Reordering. Whole SDUs are handed
/// up in SN order; SDUs touching a missing SN are discarded once the window
/// moves past it.
class RlcRxEntity {
public:
  explicit RlcRxEntity(SimTime t_reordering, int sn_bits = 10)
      : t_reordering_(t_reordering), modulus_(1u << sn_bits), window_(modulus_ / 2),
        buffer_(modulus_) {
    if (sn_bits < 2 || sn_bits > 16)
      throw ConfigError("rlc.sn_bits must lie in [2, 16]");
    if (t_reordering < SimTime())
      throw ConfigError("rlc.t_reordering_ms must be nonnegative");
  }

  std::vector<DeliveredSdu> receive(const RlcPdu& pdu, SimTime now) {
    std::vector<DeliveredSdu> out;
    const std::uint32_t x = pdu.sn % modulus_;
    const bool ahead = rel(x) >= window_;
    if (!ahead && (rel(x) < rel(ur_) || buffer_[x])) {
      ++anomalies_;
      return out;
    }
    buffer_[x] = pdu;

    if (ahead) {
      uh_ = (x + 1) % modulus_;
      const std::uint32_t lower = (uh_ + modulus_ - window_) % modulus_;
      const std::uint32_t behind = (lower + modulus_ - ur_) % modulus_;
      if (behind > 0 && behind < window_) {
        reassemble_until(lower, now, out);
        ur_ = lower;
        advance_ur_over_received();
        reassemble_until(ur_, now, out);
      }
    }
    if (x == ur_) {
      advance_ur_over_received();
      reassemble_until(ur_, now, out);
    }
    if (deadline_) {
      const bool ux_outside = rel(ux_) >= window_ && ux_ != uh_;
      if (rel(ux_) <= rel(ur_) || ux_outside)
        deadline_.reset();
    }
    if (!deadline_ && ur_ != uh_) {
      ux_ = uh_;
      deadline_ = now + t_reordering_;
    }
    return out;
  }

  /// Timer expiry: give up on every missing SN below the trigger SN.
  std::vector<DeliveredSdu> expire(SimTime now) {
    std::vector<DeliveredSdu> out;
    if (!deadline_)
      return out;
    deadline_.reset();
    std::uint32_t sn = ux_;
    while (sn != uh_ && buffer_[sn])
      sn = (sn + 1) % modulus_;
    ur_ = sn;
    reassemble_until(ur_, now, out);
    if (ur_ != uh_) {
      ux_ = uh_;
      deadline_ = now + t_reordering_;
    }
    return out;
  }

  std::optional<SimTime> timer_deadline() const { return deadline_; }
  std::uint64_t anomalies() const { return anomalies_; }
  std::uint32_t rx_next_reassembly() const { return ur_; }
  std::uint32_t rx_next_highest() const { return uh_; }
  SimTime t_reordering() const { return t_reordering_; }

private:
  /// Position of `sn` relative to the lower window edge (rx_next_highest - window).
  std::uint32_t rel(std::uint32_t sn) const {
    const std::uint32_t lower = (uh_ + modulus_ - window_) % modulus_;
    return (sn + modulus_ - lower) % modulus_;
  }

  void advance_ur_over_received() {
    while (ur_ != uh_ && buffer_[ur_])
      ur_ = (ur_ + 1) % modulus_;
  }

  void reassemble_until(std::uint32_t target, SimTime now, std::vector<DeliveredSdu>& out) {
    while (reassembly_next_ != target) {
      auto& slot = buffer_[reassembly_next_];
      if (slot) {
        for (const RlcSegment& s : slot->segments)
          feed(s, now, out);
        slot.reset();
      } else {
        partial_.reset();
      }
      reassembly_next_ = (reassembly_next_ + 1) % modulus_;
    }
  }

  void feed(const RlcSegment& s, SimTime now, std::vector<DeliveredSdu>& out) {
    if (s.offset == 0) {
      partial_ = Partial{s.packet_id, s.length};
    } else if (partial_ && partial_->packet_id == s.packet_id && partial_->received == s.offset) {
      partial_->received += s.length;
    } else {
      partial_.reset();
      return;
    }
    if (s.is_last()) {
      out.push_back({s.packet_id, s.sdu_bytes, now});
      partial_.reset();
    }
  }

  struct Partial {
    PacketId packet_id;
    int received;
  };

  SimTime t_reordering_;
  std::uint32_t modulus_;
  std::uint32_t window_;
  std::uint32_t ur_ = 0;
  std::uint32_t uh_ = 0;
  std::uint32_t ux_ = 0;
  std::uint32_t reassembly_next_ = 0;
  std::vector<std::optional<RlcPdu>> buffer_;
  std::optional<Partial> partial_;
  std::optional<SimTime> deadline_;
  std::uint64_t anomalies_ = 0;
};

} // namespace mmv2v
