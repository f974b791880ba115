#pragma once

// NR sidelink frame timing, transport block sizing, the SINR-to-BLER mapping,
// adaptive MCS selection and TDMA slot schedules.

#include "mmv2v/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mmv2v {

struct FrameConfig {
  int numerology = 3;
  double scs_khz = 120.0;
  int slots_per_subframe = 8;
  int symbols_per_slot = 14;
  int n_prb = 66;

  SimTime slot_duration() const { return SimTime::from_ns(1'000'000 / slots_per_subframe); }
  int slots_per_second() const { return 1000 * slots_per_subframe; }
};

inline void check_numerology(int numerology) {
  if (numerology != 2 && numerology != 3)
    throw ConfigError("numerology must be 2 or 3, got " + std::to_string(numerology));
}

inline SimTime slot_duration(int numerology) {
  check_numerology(numerology);
  return SimTime::from_ns(1'000'000 >> numerology);
}

/// Usable bandwidth divided into 12-subcarrier PRBs, rounded to the nearest
/// whole PRB. 100 MHz with a 5% guard gives 132 PRBs at 60 kHz and 66 at 120 kHz.
inline int prb_count(double bandwidth_hz, double scs_khz, double guard_fraction) {
  if (!(bandwidth_hz > 0.0) || !(scs_khz > 0.0))
    throw ConfigError("bandwidth and subcarrier spacing must be positive");
  if (guard_fraction < 0.0 || guard_fraction >= 1.0)
    throw ConfigError("guard fraction must lie in [0, 1)");
  const double usable = bandwidth_hz * (1.0 - guard_fraction);
  return static_cast<int>(std::lround(usable / (12.0 * scs_khz * 1e3)));
}

inline FrameConfig make_frame_config(int numerology, double bandwidth_hz = 100e6, double guard_fraction = 0.05) {
  check_numerology(numerology);
  FrameConfig f;
  f.numerology = numerology;
  f.scs_khz = 15.0 * (1 << numerology);
  f.slots_per_subframe = 1 << numerology;
  f.symbols_per_slot = 14;
  f.n_prb = prb_count(bandwidth_hz, f.scs_khz, guard_fraction);
  return f;
}

struct McsEntry {
  int index = 0;
  int modulation_order = 2;
  double code_rate = 0.0;
  double spectral_efficiency = 0.0;
  double sinr_threshold_db = 0.0;
  double bler_slope = 2.0;
};

/// TBS = floor(SE * n_prb * 12 * data_symbols).
inline std::int64_t tbs_bits(double spectral_efficiency, const FrameConfig& frame, int data_symbols) {
  if (data_symbols < 0 || data_symbols > frame.symbols_per_slot)
    throw ConfigError("data symbols must lie in [0, symbols per slot]");
  return static_cast<std::int64_t>(
      std::floor(spectral_efficiency * frame.n_prb * 12.0 * static_cast<double>(data_symbols)));
}

inline std::int64_t tbs_bits(const McsEntry& mcs, const FrameConfig& frame, int data_symbols) {
  return tbs_bits(mcs.spectral_efficiency, frame, data_symbols);
}

/// SINR at which Shannon capacity equals `se`, plus an implementation gap.
inline double shannon_threshold_db(double se, double gap_db) {
  return 10.0 * std::log10(std::pow(2.0, se) - 1.0) + gap_db;
}

/// Logistic BLER curve: 1 / (1 + exp(k (sinr - threshold))).
inline double bler(const McsEntry& mcs, double sinr_db) {
  const double x = mcs.bler_slope * (sinr_db - mcs.sinr_threshold_db);
  if (x > 700.0)
    return 0.0;
  return 1.0 / (1.0 + std::exp(x));
}

/// SINR where the logistic curve of `mcs` crosses `target`.
inline double sinr_for_bler(const McsEntry& mcs, double target) {
  return mcs.sinr_threshold_db + std::log((1.0 - target) / target) / mcs.bler_slope;
}

class McsTable {
public:
  struct Row {
    int modulation_order;
    int code_rate_x1024;
    double spectral_efficiency;
  };

  McsTable() = default;
  explicit McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) { validate(); }

  /// NR PDSCH MCS index table 1 (up to 64-QAM), indexes 0-28.
  static McsTable nr_64qam(double bler_slope = 2.0, double gap_db = 3.0) {
    static constexpr std::array<Row, 29> rows{{
        {2, 120, 0.2344}, {2, 157, 0.3066}, {2, 193, 0.3770}, {2, 251, 0.4902}, {2, 308, 0.6016},
        {2, 379, 0.7402}, {2, 449, 0.8770}, {2, 526, 1.0273}, {2, 602, 1.1758}, {2, 679, 1.3262},
        {4, 340, 1.3281}, {4, 378, 1.4766}, {4, 434, 1.6953}, {4, 490, 1.9141}, {4, 553, 2.1602},
        {4, 616, 2.4063}, {4, 658, 2.5703}, {6, 438, 2.5664}, {6, 466, 2.7305}, {6, 517, 3.0293},
        {6, 567, 3.3223}, {6, 616, 3.6094}, {6, 666, 3.9023}, {6, 719, 4.2129}, {6, 772, 4.5234},
        {6, 822, 4.8164}, {6, 873, 5.1152}, {6, 910, 5.3320}, {6, 948, 5.5547},
    }};
    std::vector<McsEntry> e;
    for (std::size_t i = 0; i < rows.size(); ++i)
      e.push_back(make_entry(static_cast<int>(i), rows[i], bler_slope, gap_db));
    return McsTable(std::move(e));
  }

  /// CSV with header `index,modulation_order,code_rate_x1024,spectral_efficiency`
  /// and an optional fifth column `sinr_threshold_db` overriding the derived threshold.
  static McsTable from_csv(std::istream& in, double bler_slope = 2.0, double gap_db = 3.0) {
    std::string line;
    std::vector<McsEntry> e;
    bool header = true;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#')
        continue;
      if (header) {
        header = false;
        if (line.rfind("index", 0) == 0)
          continue;
      }
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ','))
        cells.push_back(cell);
      if (cells.size() != 4 && cells.size() != 5)
        throw ConfigError("mcs table line " + std::to_string(line_no) + ": expected 4 or 5 columns");
      try {
        const int idx = std::stoi(cells[0]);
        Row r{std::stoi(cells[1]), std::stoi(cells[2]), std::stod(cells[3])};
        McsEntry m = make_entry(idx, r, bler_slope, gap_db);
        if (cells.size() == 5)
          m.sinr_threshold_db = std::stod(cells[4]);
        e.push_back(m);
      } catch (const std::logic_error&) {
        throw ConfigError("mcs table line " + std::to_string(line_no) + ": malformed number");
      }
    }
    return McsTable(std::move(e));
  }

  static McsTable from_csv_file(const std::string& path, double bler_slope = 2.0, double gap_db = 3.0) {
    std::ifstream f(path);
    if (!f)
      throw ConfigError("cannot open mcs table '" + path + "'");
    return from_csv(f, bler_slope, gap_db);
  }

  const McsEntry& at(int index) const {
    if (index < 0 || index >= size())
      throw ConfigError("mcs index " + std::to_string(index) + " outside table [0, " +
                        std::to_string(size() - 1) + "]");
    return entries_[static_cast<std::size_t>(index)];
  }

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<McsEntry>& entries() const { return entries_; }

private:
  static McsEntry make_entry(int index, Row r, double slope, double gap_db) {
    McsEntry m;
    m.index = index;
    m.modulation_order = r.modulation_order;
    m.code_rate = r.code_rate_x1024 / 1024.0;
    m.spectral_efficiency = r.spectral_efficiency;
    m.sinr_threshold_db = shannon_threshold_db(r.spectral_efficiency, gap_db);
    m.bler_slope = slope;
    return m;
  }

  void validate() const {
    if (entries_.empty())
      throw ConfigError("mcs table is empty");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const McsEntry& m = entries_[i];
      if (m.index != static_cast<int>(i))
        throw ConfigError("mcs table indexes must be contiguous from 0");
      if (!(m.spectral_efficiency > 0.0) || !(m.bler_slope > 0.0))
        throw ConfigError("mcs " + std::to_string(i) + ": spectral efficiency and slope must be positive");
    }
  }

  std::vector<McsEntry> entries_;
};

/// Highest index whose BLER at `sinr_db` is at most `target_bler`; 0 if none
/// qualifies. A relative slack of 1e-9 absorbs rounding at the exact crossing.
inline int amc_select(const McsTable& table, double sinr_db, double target_bler = 0.1) {
  int best = 0;
  for (const McsEntry& m : table.entries())
    if (bler(m, sinr_db) <= target_bler * (1.0 + 1e-9))
      best = m.index;
  return best;
}

enum class ScheduleMode { Shared, Dedicated };

using LinkId = int;

/// Which links may transmit in each slot of a subframe.
class SchedulePattern {
public:
  SchedulePattern() = default;
  SchedulePattern(ScheduleMode mode, std::vector<std::vector<LinkId>> assignment)
      : mode_(mode), assignment_(std::move(assignment)) {}

  ScheduleMode mode() const { return mode_; }
  int slots_per_subframe() const { return static_cast<int>(assignment_.size()); }
  const std::vector<LinkId>& slot(int slot_in_subframe) const {
    return assignment_.at(static_cast<std::size_t>(slot_in_subframe));
  }

  bool permits(int slot_in_subframe, LinkId link) const {
    const auto& s = slot(slot_in_subframe);
    return std::find(s.begin(), s.end(), link) != s.end();
  }

  int slots_owned(LinkId link) const {
    int n = 0;
    for (int s = 0; s < slots_per_subframe(); ++s)
      n += permits(s, link) ? 1 : 0;
    return n;
  }

private:
  ScheduleMode mode_ = ScheduleMode::Shared;
  std::vector<std::vector<LinkId>> assignment_;
};

/// Shared: every link in every slot. Dedicated: slot s goes to links[s mod L].
inline SchedulePattern build_schedule(ScheduleMode mode, const std::vector<LinkId>& links,
                                      int slots_per_subframe) {
  if (links.empty())
    throw ConfigError("a schedule needs at least one link");
  if (slots_per_subframe < 1)
    throw ConfigError("slots per subframe must be positive");
  std::vector<std::vector<LinkId>> a(static_cast<std::size_t>(slots_per_subframe));
  if (mode == ScheduleMode::Shared) {
    for (auto& s : a)
      s = links;
  } else {
    if (static_cast<int>(links.size()) > slots_per_subframe)
      throw ConfigError("dedicated scheduling needs no more links than slots per subframe");
    for (int s = 0; s < slots_per_subframe; ++s)
      a[static_cast<std::size_t>(s)].push_back(links[static_cast<std::size_t>(s) % links.size()]);
  }
  return SchedulePattern(mode, std::move(a));
}

/// Opaque reference to the RLC PDUs a transport block carries.
struct TransportBlock {
  LinkId link = 0;
  SimTime slot_start;
  int mcs = 0;
  std::int64_t size_bits = 0;
  std::int64_t used_bits = 0;
  double sinr_db = 0.0;
};

enum class TxOutcome { Delivered, Lost };

/// Exactly one uniform draw per call, so runs that differ only in BLER stay
/// aligned draw for draw.
inline TxOutcome transmit_slot(double block_error_probability, RngStream& rng) {
  return rng.uniform() < block_error_probability ? TxOutcome::Lost : TxOutcome::Delivered;
}

} // namespace mmv2v
