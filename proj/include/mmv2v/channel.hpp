#pragma once

// Large-scale propagation (pathloss, shadowing, vehicle blockage), channel
// condition selection, a correlated Rician/Rayleigh fading term, uniform
// planar array beam gains and the per-slot SINR computation.

#include "mmv2v/engine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmv2v {

inline constexpr double kSpeedOfLight = 299'792'458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

enum class PropagationScenario { Highway, Urban };
enum class ChannelCondition { Los, Nlosv, Nlos };

inline std::string_view to_string(PropagationScenario s) {
  return s == PropagationScenario::Highway ? "highway" : "urban";
}

inline std::string_view to_string(ChannelCondition c) {
  switch (c) {
  case ChannelCondition::Los: return "los";
  case ChannelCondition::Nlosv: return "nlosv";
  case ChannelCondition::Nlos: return "nlos";
  }
  return "?";
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double k, Vec3 a) { return {k * a.x, k * a.y, k * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(Vec3 o) const { return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x}; }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec3 normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw ConfigError("direction vector must be nonzero and finite");
    return (1.0 / n) * *this;
  }
};

/// PL[dB] = intercept + distance_slope*log10(d[m]) + frequency_slope*log10(fc[GHz]).
struct PathlossCoefficients {
  double intercept = 0.0;
  double distance_slope = 0.0;
  double frequency_slope = 0.0;

  double evaluate(double d_m, double fc_ghz) const {
    return intercept + distance_slope * std::log10(d_m) + frequency_slope * std::log10(fc_ghz);
  }
};

/// Additional vehicle-blockage loss for NLOSv links, Gaussian in dB and clamped at 0:
/// mean = base + max(0, slope*log10(d) - offset).
struct BlockageLossParams {
  double base_db = 9.0;
  double slope_db = 15.0;
  double offset_db = 41.0;
  double sigma_db = 4.5;

  double mean_db(double d_m) const {
    return base_db + std::max(0.0, slope_db * std::log10(std::max(d_m, 1.0)) - offset_db);
  }
};

struct ChannelParams {
  double carrier_ghz = 28.0;
  double bandwidth_hz = 100e6;
  double tx_power_dbm = 23.0;
  double noise_figure_db = 5.0;
  double thermal_noise_dbm_hz = -174.0;

  PathlossCoefficients highway_los{32.4, 20.0, 20.0};
  PathlossCoefficients highway_nlos{36.85, 30.0, 18.9};
  PathlossCoefficients urban_los{38.77, 16.7, 18.2};
  PathlossCoefficients urban_nlos{36.85, 30.0, 18.9};

  double shadowing_los_db = 3.0;
  double shadowing_nlosv_db = 4.0;
  double shadowing_nlos_db = 4.0;

  BlockageLossParams blockage;

  /// P(LOS) = min(1, exp(-d / d0)) in probabilistic mode.
  double los_probability_d0_m = 200.0;

  bool fading_enabled = true;
  double rician_k_db = 9.0;
  double min_speed_mps = 1.0;

  /// Gain behind the array plane, relative to the beam peak.
  double backlobe_db = 30.0;
  double min_distance_m = 1.0;

  double noise_dbm() const {
    return thermal_noise_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
  }

  double shadowing_sigma_db(ChannelCondition c) const {
    switch (c) {
    case ChannelCondition::Los: return shadowing_los_db;
    case ChannelCondition::Nlosv: return shadowing_nlosv_db;
    case ChannelCondition::Nlos: return shadowing_nlos_db;
    }
    return 0.0;
  }

  const PathlossCoefficients& coefficients(PropagationScenario s, ChannelCondition c) const {
    const bool nlos = c == ChannelCondition::Nlos;
    if (s == PropagationScenario::Highway)
      return nlos ? highway_nlos : highway_los;
    return nlos ? urban_nlos : urban_los;
  }
};

/// Mean pathloss in dB. NLOSv uses the LOS curve of its family; the blockage
/// term is drawn separately. Distances below `params.min_distance_m` are clamped.
inline double pathloss_db(PropagationScenario scenario, ChannelCondition condition, double d_m,
                          double fc_ghz, const ChannelParams& params = {}) {
  if (!std::isfinite(d_m) || d_m <= 0.0)
    throw ConfigError("pathloss distance must be positive and finite");
  if (!std::isfinite(fc_ghz) || fc_ghz < 0.5 || fc_ghz > 100.0)
    throw ConfigError("carrier frequency must lie in [0.5, 100] GHz");
  const double d = std::max(d_m, params.min_distance_m);
  return params.coefficients(scenario, condition).evaluate(d, fc_ghz);
}

/// One draw of the NLOSv extra loss. Never negative.
inline double nlosv_extra_loss_db(ChannelCondition condition, double d_m,
                                  const BlockageLossParams& params, RngStream& rng) {
  if (condition != ChannelCondition::Nlosv)
    throw std::logic_error("blockage loss requested for a link that is not NLOSv");
  if (params.sigma_db == 0.0)
    return std::max(0.0, params.mean_db(d_m));
  return std::max(0.0, rng.normal(params.mean_db(d_m), params.sigma_db));
}

inline double los_probability(double d_m, double d0_m) {
  return std::min(1.0, std::exp(-std::max(d_m, 0.0) / d0_m));
}

struct ConditionMode {
  enum class Kind { Fixed, Probabilistic };
  Kind kind = Kind::Fixed;
  ChannelCondition fixed = ChannelCondition::Los;

  static ConditionMode fixed_to(ChannelCondition c) { return {Kind::Fixed, c}; }
  static ConditionMode probabilistic() { return {Kind::Probabilistic, ChannelCondition::Los}; }
};

/// Probabilistic mode only ever chooses between LOS and NLOSv.
inline ChannelCondition channel_condition(const ConditionMode& mode, PropagationScenario /*scenario*/,
                                          double d_m, RngStream& rng,
                                          double d0_m = ChannelParams{}.los_probability_d0_m) {
  if (mode.kind == ConditionMode::Kind::Fixed)
    return mode.fixed;
  return rng.uniform() < los_probability(d_m, d0_m) ? ChannelCondition::Los : ChannelCondition::Nlosv;
}

/// Uniform planar array of `rows` x `cols` isotropic elements. The array plane
/// is perpendicular to `boresight`; columns run horizontally, rows vertically.
struct AntennaArray {
  int rows = 1;
  int cols = 1;
  double element_spacing = 0.5; // wavelengths
  Vec3 boresight{1.0, 0.0, 0.0};

  int elements() const { return rows * cols; }
  double peak_gain_db() const { return linear_to_db(static_cast<double>(elements())); }

  void validate() const {
    if (rows < 1 || cols < 1)
      throw ConfigError("antenna array needs at least one row and one column");
    if (!(element_spacing > 0.0))
      throw ConfigError("antenna element spacing must be positive");
    (void)boresight.normalized();
  }

  /// Local (horizontal, vertical) projections of a direction onto the array plane.
  std::pair<double, double> plane_components(Vec3 dir) const {
    const Vec3 b = boresight.normalized();
    const Vec3 up{0.0, 0.0, 1.0};
    Vec3 h = up.cross(b);
    if (h.norm() < 1e-12)
      h = Vec3{0.0, 1.0, 0.0}.cross(b);
    h = h.normalized();
    const Vec3 v = b.cross(h).normalized();
    return {dir.dot(h), dir.dot(v)};
  }
};

/// Beamforming gain of `array` steered toward `steering_dir` as seen from
/// `eval_dir`: |a(eval)^H w(steer)|^2 with unit-norm weights, so the matched
/// direction yields N*M. For multi-element arrays the result is floored at
/// peak - backlobe_db, and directions on or behind the array plane get exactly
/// that floor. A single element is isotropic.
inline double beam_gain_db(const AntennaArray& array, Vec3 steering_dir, Vec3 eval_dir,
                           double backlobe_db = ChannelParams{}.backlobe_db) {
  const Vec3 s = steering_dir.normalized();
  const Vec3 e = eval_dir.normalized();
  const int n_el = array.elements();
  if (n_el == 1)
    return 0.0;
  const double floor_lin = static_cast<double>(n_el) * db_to_linear(-backlobe_db);
  if (e.dot(array.boresight.normalized()) <= 0.0)
    return linear_to_db(floor_lin);

  const auto [sh, sv] = array.plane_components(s);
  const auto [eh, ev] = array.plane_components(e);
  const double k = 2.0 * std::numbers::pi * array.element_spacing;
  std::complex<double> sum{0.0, 0.0};
  for (int r = 0; r < array.rows; ++r) {
    for (int c = 0; c < array.cols; ++c) {
      const double phase = k * (c * (eh - sh) + r * (ev - sv));
      sum += std::polar(1.0, phase);
    }
  }
  const double gain = std::norm(sum) / static_cast<double>(n_el);
  return linear_to_db(std::max(gain, floor_lin));
}

/// Coherence time 0.423 / f_D with f_D = v * fc / c.
inline double coherence_time_s(double speed_mps, double fc_ghz) {
  return 0.423 * kSpeedOfLight / (fc_ghz * 1e9 * speed_mps);
}

/// Small-scale gain h = sqrt(K/(K+1)) + sqrt(1/(K+1)) g, where g is a unit-power
/// complex Gauss-Markov process with correlation exp(-dt / T_c). E|h|^2 = 1.
class FadingProcess {
public:
  FadingProcess() = default;
  FadingProcess(bool enabled, double k_factor_linear, double coherence_time_s)
      : enabled_(enabled), k_(k_factor_linear), coherence_s_(coherence_time_s) {}

  bool enabled() const { return enabled_; }
  double k_factor() const { return k_; }
  double coherence_time() const { return coherence_s_; }

  /// Power gain in dB at time t. Calls must be nondecreasing in t.
  double sample_db(SimTime t, RngStream& rng) {
    if (!enabled_)
      return 0.0;
    advance(t, rng);
    const double los = std::sqrt(k_ / (k_ + 1.0));
    const double diffuse = std::sqrt(1.0 / (k_ + 1.0));
    const std::complex<double> h = los + diffuse * g_;
    return linear_to_db(std::max(std::norm(h), 1e-30));
  }

private:
  void advance(SimTime t, RngStream& rng) {
    if (!started_) {
      g_ = draw(rng);
      last_ = t;
      started_ = true;
      return;
    }
    if (t < last_)
      throw std::logic_error("fading process sampled backwards in time");
    const double dt = (t - last_).seconds();
    if (dt == 0.0)
      return;
    const double rho = std::exp(-dt / coherence_s_);
    g_ = rho * g_ + std::sqrt(1.0 - rho * rho) * draw(rng);
    last_ = t;
  }

  static std::complex<double> draw(RngStream& rng) {
    const double s = std::sqrt(0.5);
    return {rng.normal(0.0, s), rng.normal(0.0, s)};
  }

  bool enabled_ = false;
  double k_ = 0.0;
  double coherence_s_ = 1.0;
  bool started_ = false;
  SimTime last_;
  std::complex<double> g_{0.0, 0.0};
};

using NodeId = int;

/// Channel realization of one directed (tx, rx) pair.
struct LinkState {
  NodeId tx = 0;
  NodeId rx = 0;
  ChannelCondition condition = ChannelCondition::Los;
  double distance_m = 0.0;
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;
  double blockage_extra_db = 0.0;
  FadingProcess fading;
};

/// Linear sum of the loss/gain terms in dB, in the order they are applied.
struct LinkBudgetTerms {
  double tx_gain_db = 0.0;
  double rx_gain_db = 0.0;
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;
  double blockage_db = 0.0;
  double fading_db = 0.0;
};

inline double rx_power_dbm(double tx_power_dbm, const LinkBudgetTerms& t) {
  return tx_power_dbm + t.tx_gain_db + t.rx_gain_db - t.pathloss_db - t.shadowing_db -
         t.blockage_db + t.fading_db;
}

/// S / (N + sum I), all inputs in dBm.
inline double sinr_db(double signal_dbm, std::span<const double> interference_dbm, double noise_dbm) {
  double denom = db_to_linear(noise_dbm);
  for (double i : interference_dbm)
    denom += db_to_linear(i);
  return signal_dbm - linear_to_db(denom);
}

/// Geometry and antenna of one radio endpoint as the channel sees it.
struct RadioNode {
  NodeId id = 0;
  Vec3 position;
  double speed_mps = 0.0;
  AntennaArray array;
  Vec3 steering{1.0, 0.0, 0.0};
};

/// Channel between a fixed set of nodes. Pair states are created on first
/// use and keep their large-scale draws for the whole run.
class Channel {
public:
  /// Chooses the condition of a pair the first time it is used.
  using ConditionPolicy = std::function<ChannelCondition(const RadioNode& tx, const RadioNode& rx)>;

  Channel(ChannelParams params, PropagationScenario scenario, std::vector<RadioNode> nodes,
          RngFactory& rng, ConditionPolicy policy)
      : params_(std::move(params)), scenario_(scenario), nodes_(std::move(nodes)), rng_(&rng),
        policy_(std::move(policy)) {
    for (const auto& n : nodes_)
      n.array.validate();
  }

  const ChannelParams& params() const { return params_; }
  PropagationScenario scenario() const { return scenario_; }
  double noise_dbm() const { return params_.noise_dbm(); }

  const RadioNode& node(NodeId id) const { return nodes_.at(index_of(id)); }

  LinkState& link(NodeId tx, NodeId rx) {
    const auto key = std::make_pair(tx, rx);
    auto it = links_.find(key);
    if (it == links_.end())
      it = links_.emplace(key, make_link(node(tx), node(rx))).first;
    return it->second;
  }

  /// Received power of `tx`'s transmission (beam steered as configured on the
  /// node) at `rx`'s receive beam, at time t.
  double rx_power_dbm(NodeId tx, NodeId rx, SimTime t) {
    const RadioNode& a = node(tx);
    const RadioNode& b = node(rx);
    LinkState& l = link(tx, rx);
    const Vec3 d = b.position - a.position;
    LinkBudgetTerms terms;
    terms.tx_gain_db = beam_gain_db(a.array, a.steering, d, params_.backlobe_db);
    terms.rx_gain_db = beam_gain_db(b.array, b.steering, -1.0 * d, params_.backlobe_db);
    terms.pathloss_db = l.pathloss_db;
    terms.shadowing_db = l.shadowing_db;
    terms.blockage_db = l.blockage_extra_db;
    terms.fading_db = l.fading.sample_db(t, fading_stream(tx, rx));
    return mmv2v::rx_power_dbm(params_.tx_power_dbm, terms);
  }

  /// SINR at `rx` for the serving transmission from `tx` while every node in
  /// `interferers` transmits on its own serving beam.
  double sinr_db(NodeId tx, NodeId rx, std::span<const NodeId> interferers, SimTime t,
                 double* interference_dbm_out = nullptr) {
    const double s = rx_power_dbm(tx, rx, t);
    std::vector<double> ints;
    ints.reserve(interferers.size());
    for (NodeId k : interferers)
      if (k != tx && k != rx)
        ints.push_back(rx_power_dbm(k, rx, t));
    if (interference_dbm_out) {
      double lin = 0.0;
      for (double i : ints)
        lin += db_to_linear(i);
      *interference_dbm_out = ints.empty() ? -std::numeric_limits<double>::infinity() : linear_to_db(lin);
    }
    return mmv2v::sinr_db(s, ints, noise_dbm());
  }

private:
  std::size_t index_of(NodeId id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].id == id)
        return i;
    throw ConfigError("unknown node id " + std::to_string(id));
  }

  static std::string pair_label(std::string_view prefix, NodeId tx, NodeId rx) {
    return std::string(prefix) + "/" + std::to_string(tx) + "->" + std::to_string(rx);
  }

  RngStream& fading_stream(NodeId tx, NodeId rx) { return rng_->stream(pair_label("fading", tx, rx)); }

  LinkState make_link(const RadioNode& a, const RadioNode& b) {
    LinkState l;
    l.tx = a.id;
    l.rx = b.id;
    l.condition = policy_(a, b);
    l.distance_m = std::max((b.position - a.position).norm(), params_.min_distance_m);
    l.pathloss_db = pathloss_db(scenario_, l.condition, l.distance_m, params_.carrier_ghz, params_);
    const double sigma = params_.shadowing_sigma_db(l.condition);
    l.shadowing_db = sigma > 0.0 ? rng_->stream(pair_label("shadowing", a.id, b.id)).normal(0.0, sigma) : 0.0;
    if (l.condition == ChannelCondition::Nlosv)
      l.blockage_extra_db =
          nlosv_extra_loss_db(l.condition, l.distance_m, params_.blockage, rng_->stream(pair_label("blockage", a.id, b.id)));
    const double k_lin = l.condition == ChannelCondition::Los ? db_to_linear(params_.rician_k_db) : 0.0;
    const double speed = std::max(std::abs(a.speed_mps) + std::abs(b.speed_mps), params_.min_speed_mps);
    l.fading = FadingProcess(params_.fading_enabled, k_lin, coherence_time_s(speed, params_.carrier_ghz));
    return l;
  }

  ChannelParams params_;
  PropagationScenario scenario_;
  std::vector<RadioNode> nodes_;
  RngFactory* rng_;
  ConditionPolicy policy_;
  std::map<std::pair<NodeId, NodeId>, LinkState> links_;
};

} // namespace mmv2v
