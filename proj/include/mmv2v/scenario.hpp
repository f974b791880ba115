#pragma once

// Scenario construction (single pair, two interfering pairs), the per-run
// slot-level simulation that ties channel, PHY/MAC and stack together, and
// run-level metrics with confidence-interval aggregation.

#include "mmv2v/channel.hpp"
#include "mmv2v/engine.hpp"
#include "mmv2v/phy_mac.hpp"
#include "mmv2v/stack.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace mmv2v {

enum class ScenarioKind { A, B };
enum class McsMode { Fixed, Adaptive };

/// How the channel condition of a pair that is not a serving link is chosen.
enum class InterfererCondition { Geometric, Los, Nlosv, Serving };

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::A;
  double duration_s = 10.0;
  double warmup_s = 0.5;
  double drain_s = 0.1;
  PropagationScenario propagation = PropagationScenario::Highway;
  ConditionMode condition = ConditionMode::fixed_to(ChannelCondition::Los);
  double speed_mps = 20.0;
  int antenna_rows = 4;
  int antenna_cols = 4;
  // Scenario A
  double distance_m = 100.0;
  // Scenario B
  double intra_group_distance_m = 40.0;
  double inter_group_distance_m = 40.0;
  double lane_offset_m = 4.0;
  InterfererCondition interferer_condition = InterfererCondition::Los;
  double vehicle_length_m = 4.5;
  double vehicle_width_m = 1.8;
};

struct PhyConfig {
  int numerology = 3;
  double guard_fraction = 0.05;
  int control_symbols = 2;
  McsMode mcs_mode = McsMode::Fixed;
  int mcs = 0;
  ScheduleMode schedule = ScheduleMode::Shared;
  double bler_slope = 2.0;
  double bler_gap_db = 3.0;
  double target_bler = 0.1;
  std::optional<double> bler_override;
  std::string mcs_table_path;

  int data_symbols() const { return 14 - control_symbols; }

  McsTable load_table() const {
    return mcs_table_path.empty() ? McsTable::nr_64qam(bler_slope, bler_gap_db)
                                  : McsTable::from_csv_file(mcs_table_path, bler_slope, bler_gap_db);
  }
};

struct RlcConfig {
  double t_reordering_ms = 10.0;
  std::size_t buffer_bytes = 512 * 1024;
  int sn_bits = 10;
};

struct SimulationConfig {
  ScenarioParams scenario;
  ChannelParams channel;
  PhyConfig phy;
  RlcConfig rlc;
  TrafficSource app = TrafficSource::cbr(800e3, 100);
  HeaderSizes headers;
};

struct Vehicle {
  NodeId id = 0;
  Vec3 position;
  double speed_mps = 0.0;
  AntennaArray antenna;
};

struct LinkSpec {
  LinkId id = 0;
  NodeId tx = 0;
  NodeId rx = 0;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  double prr = std::numeric_limits<double>::quiet_NaN();
  double mean_delay_s = std::numeric_limits<double>::quiet_NaN();
  double mean_sinr_db = std::numeric_limits<double>::quiet_NaN();
  double throughput_bps = 0.0;
  double offered_bps = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t phy_lost = 0;
  std::uint64_t buffer_dropped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t tbs_sent = 0;
  std::uint64_t tbs_lost = 0;
  std::uint64_t interfered_tbs = 0;
  std::uint64_t rlc_anomalies = 0;
};

/// One transmitted transport block, as reported to an observer.
struct TxRecord {
  LinkId link = 0;
  std::int64_t slot_index = 0;
  int slot_in_subframe = 0;
  SimTime slot_start;
  int mcs = 0;
  std::int64_t tbs_bits = 0;
  std::int64_t used_bits = 0;
  double sinr_db = 0.0;
  double interference_dbm = -std::numeric_limits<double>::infinity();
  bool lost = false;
};

/// Per-packet outcome, as reported to an observer after a run.
struct PacketRecord {
  LinkId link = 0;
  PacketId id = 0;
  int payload_bytes = 0;
  SimTime created_at;
  std::optional<SimTime> delivered_at;
  bool phy_lost = false;
  bool buffer_dropped = false;
};

struct RunObserver {
  std::function<void(const TxRecord&)> on_tx;
  std::function<void(const PacketRecord&)> on_packet;
};

namespace detail {

/// Does segment a-b cross the axis-aligned footprint centred at c (2D, x/y)?
inline bool segment_hits_box(Vec3 a, Vec3 b, Vec3 c, double half_len, double half_wid) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - (c.x - half_len), (c.x + half_len) - a.x, a.y - (c.y - half_wid),
                       (c.y + half_wid) - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0)
        return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1)
      return false;
  }
  return true;
}

} // namespace detail

/// A configured scenario; `run(seed)` executes one independent replication.
class SidelinkSimulation {
public:
  SidelinkSimulation(SimulationConfig cfg, std::vector<Vehicle> vehicles, std::vector<LinkSpec> links)
      : cfg_(std::move(cfg)), vehicles_(std::move(vehicles)), links_(std::move(links)),
        frame_(make_frame_config(cfg_.phy.numerology, cfg_.channel.bandwidth_hz, cfg_.phy.guard_fraction)),
        table_(cfg_.phy.load_table()) {
    if (links_.empty())
      throw ConfigError("scenario has no links");
    std::vector<LinkId> ids;
    for (const auto& l : links_)
      ids.push_back(l.id);
    schedule_ = build_schedule(cfg_.phy.schedule, ids, frame_.slots_per_subframe);
    (void)table_.at(cfg_.phy.mcs);
  }

  const SimulationConfig& config() const { return cfg_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const FrameConfig& frame() const { return frame_; }
  const SchedulePattern& schedule() const { return schedule_; }
  const McsTable& mcs_table() const { return table_; }

  /// Upper bound on delivered bits per second for one link at a given MCS.
  double phy_rate_ceiling_bps(LinkId link, int mcs) const {
    return static_cast<double>(tbs_bits(table_.at(mcs), frame_, cfg_.phy.data_symbols())) *
           schedule_.slots_owned(link) * 1000.0;
  }

  RunMetrics run(std::uint64_t seed, const RunObserver* observer = nullptr) const;

private:
  SimulationConfig cfg_;
  std::vector<Vehicle> vehicles_;
  std::vector<LinkSpec> links_;
  FrameConfig frame_;
  McsTable table_;
  SchedulePattern schedule_;
};

namespace detail {

class RunState {
public:
  RunState(const SidelinkSimulation& sim, std::uint64_t seed, const RunObserver* obs)
      : sim_(sim), cfg_(sim.config()), rng_(seed), obs_(obs) {
    const auto& sc = cfg_.scenario;
    warmup_ = SimTime::from_seconds(sc.warmup_s);
    stop_ = SimTime::from_seconds(sc.duration_s);
    end_ = stop_ + SimTime::from_seconds(sc.drain_s);
    slot_ = sim.frame().slot_duration();

    std::vector<RadioNode> nodes;
    for (const Vehicle& v : sim.vehicles())
      nodes.push_back(RadioNode{v.id, v.position, v.speed_mps, v.antenna, v.antenna.boresight});
    // Serving beams point along the LOS direction to the link peer.
    for (const LinkSpec& l : sim.links()) {
      auto& a = find(nodes, l.tx);
      auto& b = find(nodes, l.rx);
      a.steering = (b.position - a.position).normalized();
      b.steering = (a.position - b.position).normalized();
    }
    channel_ = std::make_unique<Channel>(cfg_.channel, sc.propagation, nodes, rng_,
                                         [this](const RadioNode& a, const RadioNode& b) {
                                           return pick_condition(a, b);
                                         });

    for (const LinkSpec& l : sim.links()) {
      auto lr = std::make_unique<LinkRuntime>(
          l, RlcTxEntity(cfg_.rlc.buffer_bytes, cfg_.headers, cfg_.rlc.sn_bits),
          RlcRxEntity(SimTime::from_seconds(cfg_.rlc.t_reordering_ms * 1e-3), cfg_.rlc.sn_bits),
          TrafficPattern(cfg_.app, rng_.stream("traffic/" + std::to_string(l.id))),
          &rng_.stream("phy.error/" + std::to_string(l.id)));
      lr->last_sinr_db = initial_sinr_estimate(l);
      link_rt_.push_back(std::move(lr));
    }
  }

  RunMetrics execute() {
    for (auto& lr : link_rt_)
      schedule_next_packet(*lr);
    sim_clock_.schedule(SimTime(), [this] { on_slot(0); });
    sim_clock_.run_until(end_);
    return collect();
  }

private:
  struct LinkRuntime {
    LinkRuntime(LinkSpec s, RlcTxEntity t, RlcRxEntity r, TrafficPattern p, RngStream* e)
        : spec(s), tx(std::move(t)), rx(std::move(r)), pattern(std::move(p)), error_rng(e) {}
    LinkSpec spec;
    RlcTxEntity tx;
    RlcRxEntity rx;
    TrafficPattern pattern;
    RngStream* error_rng;
    std::vector<PacketRecord> packets;
    EventHandle reorder_event;
    std::optional<SimTime> armed;
    double last_sinr_db = 0.0;
  };

  struct ActiveTx {
    LinkRuntime* link;
    RlcPdu pdu;
    int mcs;
    std::int64_t tbs;
  };

  static RadioNode& find(std::vector<RadioNode>& nodes, NodeId id) {
    for (auto& n : nodes)
      if (n.id == id)
        return n;
    throw ConfigError("link refers to unknown vehicle " + std::to_string(id));
  }

  bool is_serving_pair(NodeId tx, NodeId rx) const {
    for (const LinkSpec& l : sim_.links())
      if ((l.tx == tx && l.rx == rx) || (l.tx == rx && l.rx == tx))
        return true;
    return false;
  }

  ChannelCondition pick_condition(const RadioNode& a, const RadioNode& b) {
    const auto& sc = cfg_.scenario;
    const double d = (b.position - a.position).norm();
    auto serving = [&] {
      RngStream& r = rng_.stream("condition/" + std::to_string(std::min(a.id, b.id)) + "-" +
                                 std::to_string(std::max(a.id, b.id)));
      return channel_condition(sc.condition, sc.propagation, d, r, cfg_.channel.los_probability_d0_m);
    };
    if (is_serving_pair(a.id, b.id))
      return serving();
    switch (sc.interferer_condition) {
    case InterfererCondition::Los: return ChannelCondition::Los;
    case InterfererCondition::Nlosv: return ChannelCondition::Nlosv;
    case InterfererCondition::Serving: return serving();
    case InterfererCondition::Geometric:
      for (const Vehicle& v : sim_.vehicles()) {
        if (v.id == a.id || v.id == b.id)
          continue;
        if (segment_hits_box(a.position, b.position, v.position, sc.vehicle_length_m / 2,
                             sc.vehicle_width_m / 2))
          return ChannelCondition::Nlosv;
      }
      return ChannelCondition::Los;
    }
    return ChannelCondition::Los;
  }

  double initial_sinr_estimate(const LinkSpec& l) {
    const LinkState& s = channel_->link(l.tx, l.rx);
    const auto& cp = cfg_.channel;
    const RadioNode& a = channel_->node(l.tx);
    const RadioNode& b = channel_->node(l.rx);
    const double g = a.array.peak_gain_db() + b.array.peak_gain_db();
    return cp.tx_power_dbm + g - s.pathloss_db - s.shadowing_db - s.blockage_extra_db - cp.noise_dbm();
  }

  void schedule_next_packet(LinkRuntime& lr) {
    const SimTime t = lr.pattern.next();
    if (t >= stop_)
      return;
    sim_clock_.schedule_at(t, [this, &lr] { on_packet(lr); });
  }

  void on_packet(LinkRuntime& lr) {
    PacketRecord p;
    p.link = lr.spec.id;
    p.id = lr.packets.size();
    p.payload_bytes = cfg_.app.packet_bytes;
    p.created_at = sim_clock_.now();
    const RlcSdu sdu{p.id, cfg_.headers.sdu_bytes(p.payload_bytes)};
    p.buffer_dropped = !lr.tx.enqueue(sdu);
    lr.packets.push_back(p);
    schedule_next_packet(lr);
  }

  int choose_mcs(const LinkRuntime& lr) const {
    if (cfg_.phy.mcs_mode == McsMode::Fixed)
      return cfg_.phy.mcs;
    return amc_select(sim_.mcs_table(), lr.last_sinr_db, cfg_.phy.target_bler);
  }

  void on_slot(std::int64_t k) {
    const SimTime start = sim_clock_.now();
    const int sis = static_cast<int>(k % sim_.frame().slots_per_subframe);
    std::vector<ActiveTx> active;
    for (auto& lr : link_rt_) {
      if (!sim_.schedule().permits(sis, lr->spec.id) || lr->tx.empty())
        continue;
      const int mcs = choose_mcs(*lr);
      const std::int64_t tbs = tbs_bits(sim_.mcs_table().at(mcs), sim_.frame(), cfg_.phy.data_symbols());
      auto pdus = lr->tx.fill(tbs);
      if (pdus.empty())
        continue;
      active.push_back({lr.get(), std::move(pdus.front()), mcs, tbs});
    }

    if (!active.empty()) {
      std::vector<NodeId> transmitters;
      for (const auto& a : active)
        transmitters.push_back(a.link->spec.tx);
      const SimTime mid = start + SimTime::from_ns(slot_.ns() / 2);
      const bool measured = start >= warmup_ && start < stop_;
      for (auto& a : active) {
        double interference = 0.0;
        const double sinr = channel_->sinr_db(a.link->spec.tx, a.link->spec.rx, transmitters, mid, &interference);
        const McsEntry& entry = sim_.mcs_table().at(a.mcs);
        const double p = cfg_.phy.bler_override ? *cfg_.phy.bler_override : bler(entry, sinr);
        const bool lost = transmit_slot(p, *a.link->error_rng) == TxOutcome::Lost;
        a.link->last_sinr_db = sinr;
        ++tbs_sent_;
        if (transmitters.size() > 1)
          ++interfered_tbs_;
        if (lost)
          ++tbs_lost_;
        if (measured) {
          sinr_sum_ += sinr;
          ++sinr_count_;
        }
        if (obs_ && obs_->on_tx) {
          TxRecord r{a.link->spec.id, k, sis, start, a.mcs, a.tbs, static_cast<std::int64_t>(a.pdu.size_bytes()) * 8,
                     sinr, interference, lost};
          obs_->on_tx(r);
        }
        if (lost) {
          for (const RlcSegment& s : a.pdu.segments)
            a.link->packets[s.packet_id].phy_lost = true;
          continue;
        }
        LinkRuntime* lr = a.link;
        sim_clock_.schedule(slot_, [this, lr, pdu = std::move(a.pdu)] {
          deliver(*lr, lr->rx.receive(pdu, sim_clock_.now()));
          sync_timer(*lr);
        });
      }
    }

    if (start + slot_ <= end_)
      sim_clock_.schedule(slot_, [this, k] { on_slot(k + 1); });
  }

  void deliver(LinkRuntime& lr, const std::vector<DeliveredSdu>& sdus) {
    for (const DeliveredSdu& d : sdus) {
      PacketRecord& p = lr.packets[d.packet_id];
      if (!p.delivered_at)
        p.delivered_at = d.at;
    }
  }

  void sync_timer(LinkRuntime& lr) {
    const auto deadline = lr.rx.timer_deadline();
    if (deadline == lr.armed)
      return;
    sim_clock_.cancel(lr.reorder_event);
    lr.armed = deadline;
    if (!deadline)
      return;
    LinkRuntime* p = &lr;
    lr.reorder_event = sim_clock_.schedule_at(*deadline, [this, p] {
      p->armed.reset();
      deliver(*p, p->rx.expire(sim_clock_.now()));
      sync_timer(*p);
    });
  }

  RunMetrics collect() const {
    RunMetrics m;
    m.seed = rng_.master_seed();
    double delay_sum = 0.0;
    double delivered_bits = 0.0;
    double offered_bits = 0.0;
    for (const auto& lr : link_rt_) {
      m.rlc_anomalies += lr->rx.anomalies();
      for (const PacketRecord& p : lr->packets) {
        if (obs_ && obs_->on_packet)
          obs_->on_packet(p);
        if (p.delivered_at && *p.delivered_at >= warmup_ && *p.delivered_at < stop_)
          delivered_bits += p.payload_bytes * 8.0;
        if (p.created_at < warmup_ || p.created_at >= stop_)
          continue;
        ++m.generated;
        offered_bits += p.payload_bytes * 8.0;
        if (p.delivered_at) {
          ++m.delivered;
          delay_sum += (*p.delivered_at - p.created_at).seconds();
        } else if (p.buffer_dropped) {
          ++m.buffer_dropped;
        } else if (p.phy_lost) {
          ++m.phy_lost;
        } else {
          ++m.in_flight;
        }
      }
    }
    const double window = (stop_ - warmup_).seconds();
    if (m.generated > 0)
      m.prr = static_cast<double>(m.delivered) / static_cast<double>(m.generated);
    if (m.delivered > 0)
      m.mean_delay_s = delay_sum / static_cast<double>(m.delivered);
    if (sinr_count_ > 0)
      m.mean_sinr_db = sinr_sum_ / static_cast<double>(sinr_count_);
    m.throughput_bps = window > 0.0 ? delivered_bits / window : 0.0;
    m.offered_bps = window > 0.0 ? offered_bits / window : 0.0;
    m.tbs_sent = tbs_sent_;
    m.tbs_lost = tbs_lost_;
    m.interfered_tbs = interfered_tbs_;
    return m;
  }

  const SidelinkSimulation& sim_;
  const SimulationConfig& cfg_;
  RngFactory rng_;
  const RunObserver* obs_;
  Simulator sim_clock_;
  std::unique_ptr<Channel> channel_;
  std::vector<std::unique_ptr<LinkRuntime>> link_rt_;
  SimTime warmup_, stop_, end_, slot_;
  double sinr_sum_ = 0.0;
  std::uint64_t sinr_count_ = 0;
  std::uint64_t tbs_sent_ = 0;
  std::uint64_t tbs_lost_ = 0;
  std::uint64_t interfered_tbs_ = 0;
};

} // namespace detail

inline RunMetrics SidelinkSimulation::run(std::uint64_t seed, const RunObserver* observer) const {
  detail::RunState state(*this, seed, observer);
  return state.execute();
}

inline AntennaArray make_array(int rows, int cols, Vec3 boresight) {
  AntennaArray a;
  a.rows = rows;
  a.cols = cols;
  a.boresight = boresight;
  a.validate();
  return a;
}

inline void validate_common(const SimulationConfig& cfg) {
  const auto& sc = cfg.scenario;
  if (!(sc.duration_s > 0.0) || sc.warmup_s < 0.0 || sc.warmup_s >= sc.duration_s)
    throw ConfigError("scenario.duration_s must exceed scenario.warmup_s >= 0");
  if (sc.drain_s < 0.0)
    throw ConfigError("scenario.drain_s must be nonnegative");
  check_numerology(cfg.phy.numerology);
  if (cfg.phy.control_symbols < 0 || cfg.phy.control_symbols > 4)
    throw ConfigError("phy.control_symbols must lie in [0, 4]");
  if (cfg.phy.bler_override && (*cfg.phy.bler_override < 0.0 || *cfg.phy.bler_override > 1.0))
    throw ConfigError("phy.bler_override must lie in [0, 1]");
  if (cfg.rlc.t_reordering_ms < 0.0)
    throw ConfigError("rlc.t_reordering_ms must be nonnegative");
  cfg.app.validate();
}

/// One transmitter behind one receiver in the same lane; the link owns every slot.
inline SidelinkSimulation build_scenario_a(const SimulationConfig& cfg) {
  validate_common(cfg);
  const auto& sc = cfg.scenario;
  if (!(sc.distance_m > 0.0) || !std::isfinite(sc.distance_m))
    throw ConfigError("scenario.distance_m must be positive");
  std::vector<Vehicle> v{
      {0, {0.0, 0.0, 0.0}, sc.speed_mps, make_array(sc.antenna_rows, sc.antenna_cols, {1.0, 0.0, 0.0})},
      {1, {sc.distance_m, 0.0, 0.0}, sc.speed_mps, make_array(sc.antenna_rows, sc.antenna_cols, {-1.0, 0.0, 0.0})},
  };
  return SidelinkSimulation(cfg, std::move(v), {{0, 0, 1}});
}

/// Two groups of two vehicles on adjacent lanes; in each group the rear
/// vehicle transmits to the front one. Group 1 sits at x in {0, s}, group 2 at
/// x in {D, D + s}, shifted laterally by the lane offset.
inline SidelinkSimulation build_scenario_b(const SimulationConfig& cfg) {
  validate_common(cfg);
  const auto& sc = cfg.scenario;
  if (!(sc.intra_group_distance_m > 0.0))
    throw ConfigError("scenario.intra_group_distance_m must be positive");
  if (!(sc.inter_group_distance_m >= 0.0))
    throw ConfigError("scenario.inter_group_distance_m must be nonnegative");
  const double s = sc.intra_group_distance_m;
  const double d = sc.inter_group_distance_m;
  const double y = sc.lane_offset_m;
  auto arr = [&](double dir) { return make_array(sc.antenna_rows, sc.antenna_cols, {dir, 0.0, 0.0}); };
  std::vector<Vehicle> v{
      {0, {0.0, 0.0, 0.0}, sc.speed_mps, arr(1.0)},
      {1, {s, 0.0, 0.0}, sc.speed_mps, arr(-1.0)},
      {2, {d, y, 0.0}, sc.speed_mps, arr(1.0)},
      {3, {d + s, y, 0.0}, sc.speed_mps, arr(-1.0)},
  };
  return SidelinkSimulation(cfg, std::move(v), {{0, 0, 1}, {1, 2, 3}});
}

inline SidelinkSimulation build_scenario(const SimulationConfig& cfg) {
  return cfg.scenario.kind == ScenarioKind::A ? build_scenario_a(cfg) : build_scenario_b(cfg);
}

struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();
  std::size_t samples = 0;
};

struct AggregateMetrics {
  std::size_t runs = 0;
  bool has_ci = false;
  MetricSummary prr;
  MetricSummary delay_s;
  MetricSummary sinr_db;
  MetricSummary throughput_bps;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t phy_lost = 0;
  std::uint64_t buffer_dropped = 0;
};

/// Student-t interval over the finite values in `xs` (already in canonical order).
inline MetricSummary summarize(const std::vector<double>& xs, double confidence) {
  MetricSummary s;
  std::vector<double> v;
  for (double x : xs)
    if (std::isfinite(x))
      v.push_back(x);
  s.samples = v.size();
  if (v.empty())
    return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2)
    return s;
  double ss = 0.0;
  for (double x : v)
    ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  s.half_width = t * sd / std::sqrt(n);
  return s;
}

/// Mean and confidence half-width per metric. Runs are ordered by seed first,
/// so the result does not depend on completion order.
inline AggregateMetrics aggregate(std::vector<RunMetrics> runs, double confidence = 0.95) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("confidence must lie in (0, 1)");
  std::sort(runs.begin(), runs.end(), [](const RunMetrics& a, const RunMetrics& b) { return a.seed < b.seed; });
  AggregateMetrics a;
  a.runs = runs.size();
  a.has_ci = runs.size() >= 2;
  std::vector<double> prr, delay, sinr, thr;
  for (const RunMetrics& r : runs) {
    prr.push_back(r.prr);
    delay.push_back(r.mean_delay_s);
    sinr.push_back(r.mean_sinr_db);
    thr.push_back(r.throughput_bps);
    a.generated += r.generated;
    a.delivered += r.delivered;
    a.phy_lost += r.phy_lost;
    a.buffer_dropped += r.buffer_dropped;
  }
  a.prr = summarize(prr, confidence);
  a.delay_s = summarize(delay, confidence);
  a.sinr_db = summarize(sinr, confidence);
  a.throughput_bps = summarize(thr, confidence);
  return a;
}

} // namespace mmv2v
