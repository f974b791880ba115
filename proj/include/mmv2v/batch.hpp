#pragma once

// Batch execution of a sweep: one run per (point, seed) on a fixed-size
// worker pool, results stored by job index so output never depends on
// scheduling. CSV and JSON writers for the collected results.

#include "mmv2v/config.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mmv2v {

struct RunResult {
  std::uint64_t seed = 0;
  std::optional<RunMetrics> metrics;
  std::string error;
};

struct PointResult {
  std::vector<std::string> values;
  std::vector<RunResult> runs; // in seed-list order
  AggregateMetrics aggregate;
  std::size_t failures = 0;
};

struct BatchResult {
  std::vector<std::string> keys;
  std::vector<PointResult> points;
  std::size_t failures = 0;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

inline BatchResult run_batch(const SweepSpec& spec, unsigned parallelism = 1, const ProgressFn& progress = {}) {
  if (parallelism == 0)
    parallelism = 1;
  const auto points = spec.points();
  BatchResult out;
  for (const auto& a : spec.axes)
    out.keys.push_back(a.key);

  std::vector<std::optional<SidelinkSimulation>> sims(points.size());
  std::vector<std::string> build_errors(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      sims[i].emplace(build_scenario(points[i].config));
    } catch (const std::exception& e) {
      build_errors[i] = e.what();
    }
  }

  const std::size_t n_seeds = spec.seeds.size();
  const std::size_t total = points.size() * n_seeds;
  std::vector<RunResult> results(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= total)
        return;
      const std::size_t p = j / n_seeds;
      RunResult& r = results[j];
      r.seed = spec.seeds[j % n_seeds];
      if (!sims[p]) {
        r.error = build_errors[p];
      } else {
        try {
          r.metrics = sims[p]->run(r.seed);
        } catch (const std::exception& e) {
          r.error = e.what();
        } catch (...) {
          r.error = "unknown failure";
        }
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, total);
      }
    }
  };

  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(parallelism, std::max<std::size_t>(total, 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }

  for (std::size_t p = 0; p < points.size(); ++p) {
    PointResult pr;
    pr.values = points[p].values;
    std::vector<RunMetrics> ok;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      RunResult& r = results[p * n_seeds + s];
      if (r.metrics)
        ok.push_back(*r.metrics);
      else
        ++pr.failures;
      pr.runs.push_back(std::move(r));
    }
    pr.aggregate = aggregate(std::move(ok), spec.confidence);
    out.failures += pr.failures;
    out.points.push_back(std::move(pr));
  }
  return out;
}

namespace csv_detail {

/// Shortest representation that parses back to the same double.
inline std::string shortest(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fixed3(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  return std::string(buf, r.ptr);
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"')
      q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string u64(std::uint64_t v) { return std::to_string(v); }

} // namespace csv_detail

inline std::vector<std::string> csv_header(const std::vector<std::string>& keys) {
  std::vector<std::string> h = keys;
  for (const char* c : {"seed", "prr", "prr_ci", "delay_ms", "delay_ci", "sinr_db", "sinr_ci", "throughput_mbps",
                        "throughput_ci", "generated", "delivered", "phy_lost", "buffer_dropped"})
    h.emplace_back(c);
  return h;
}

/// Header, then per point its raw rows in seed order followed by one "agg"
/// row. Failed runs keep their key and seed cells and leave metrics empty.
inline void write_csv(const BatchResult& r, std::ostream& os) {
  using namespace csv_detail;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      os << (i ? "," : "") << quote(cells[i]);
    os << '\n';
  };
  line(csv_header(r.keys));
  for (const PointResult& p : r.points) {
    for (const RunResult& run : p.runs) {
      std::vector<std::string> c = p.values;
      c.push_back(u64(run.seed));
      if (run.metrics) {
        const RunMetrics& m = *run.metrics;
        for (const std::string& s :
             {shortest(m.prr), std::string(), fixed3(m.mean_delay_s * 1e3), std::string(), shortest(m.mean_sinr_db),
              std::string(), shortest(m.throughput_bps / 1e6), std::string(), u64(m.generated), u64(m.delivered),
              u64(m.phy_lost), u64(m.buffer_dropped)})
          c.push_back(s);
      } else {
        c.resize(c.size() + 12);
      }
      line(c);
    }
    const AggregateMetrics& a = p.aggregate;
    std::vector<std::string> c = p.values;
    c.push_back("agg");
    auto ci = [&](const MetricSummary& s, double scale, bool three) {
      c.push_back(three ? fixed3(s.mean * scale) : shortest(s.mean * scale));
      c.push_back(a.has_ci ? (three ? fixed3(s.half_width * scale) : shortest(s.half_width * scale)) : std::string());
    };
    ci(a.prr, 1.0, false);
    ci(a.delay_s, 1e3, true);
    ci(a.sinr_db, 1.0, false);
    ci(a.throughput_bps, 1e-6, false);
    for (std::uint64_t v : {a.generated, a.delivered, a.phy_lost, a.buffer_dropped})
      c.push_back(u64(v));
    line(c);
  }
}

inline std::string csv_string(const BatchResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

inline void write_csv_file(const BatchResult& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw ConfigError("cannot write '" + path + "'");
  write_csv(r, f);
  f.flush();
  if (!f)
    throw ConfigError("error while writing '" + path + "'");
}

inline nlohmann::json summary_json(const BatchResult& r, const SweepSpec& spec) {
  using nlohmann::json;
  auto metric = [](const MetricSummary& s) {
    json j;
    j["mean"] = std::isfinite(s.mean) ? json(s.mean) : json(nullptr);
    j["half_width"] = std::isfinite(s.half_width) ? json(s.half_width) : json(nullptr);
    j["samples"] = s.samples;
    return j;
  };
  json j;
  j["keys"] = r.keys;
  j["seeds"] = spec.seeds;
  j["confidence"] = spec.confidence;
  j["runs"] = spec.run_count();
  j["failures"] = r.failures;
  j["points"] = json::array();
  for (const PointResult& p : r.points) {
    json pj;
    pj["values"] = p.values;
    pj["runs"] = p.aggregate.runs;
    pj["failures"] = p.failures;
    pj["has_ci"] = p.aggregate.has_ci;
    pj["prr"] = metric(p.aggregate.prr);
    pj["delay_s"] = metric(p.aggregate.delay_s);
    pj["sinr_db"] = metric(p.aggregate.sinr_db);
    pj["throughput_bps"] = metric(p.aggregate.throughput_bps);
    pj["counts"] = {{"generated", p.aggregate.generated},
                    {"delivered", p.aggregate.delivered},
                    {"phy_lost", p.aggregate.phy_lost},
                    {"buffer_dropped", p.aggregate.buffer_dropped}};
    json errors = json::array();
    for (const RunResult& run : p.runs)
      if (!run.metrics)
        errors.push_back({{"seed", run.seed}, {"error", run.error}});
    pj["errors"] = errors;
    j["points"].push_back(pj);
  }
  return j;
}

} // namespace mmv2v
