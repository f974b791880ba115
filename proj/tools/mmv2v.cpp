// Batch runner: mmv2v --config <file> --out <csv> [--seeds N|a,b,c] [--parallel N] [--quiet]

#include "mmv2v/batch.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"Slot-level mmWave V2V sidelink simulator"};
  std::string config_path;
  std::string out_path;
  std::string seeds;
  unsigned parallel = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "scenario/sweep file")->required();
  app.add_option("--out", out_path, "CSV output path; a <out>.summary.json is written alongside")->required();
  app.add_option("--seeds", seeds, "seed count N (seeds 1..N) or comma-separated seed list");
  app.add_option("--parallel", parallel, "worker threads (0 = hardware concurrency)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  CLI11_PARSE(app, argc, argv);

  try {
    mmv2v::SweepSpec spec = mmv2v::parse_config(config_path);
    if (!seeds.empty())
      spec.seeds = mmv2v::parse_seeds(seeds);
    if (parallel == 0)
      parallel = std::max(1u, std::thread::hardware_concurrency());
    if (!quiet)
      std::cerr << spec.point_count() << " points x " << spec.seeds.size() << " seeds on " << parallel
                << " worker(s)\n";

    mmv2v::ProgressFn progress;
    if (!quiet)
      progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
        if (done == total)
          std::cerr << "\n";
      };
    const mmv2v::BatchResult result = mmv2v::run_batch(spec, parallel, progress);
    mmv2v::write_csv_file(result, out_path);

    std::ofstream js(out_path + ".summary.json", std::ios::binary | std::ios::trunc);
    if (!js)
      throw mmv2v::ConfigError("cannot write '" + out_path + ".summary.json'");
    js << mmv2v::summary_json(result, spec).dump(2) << '\n';

    if (result.failures > 0) {
      std::cerr << result.failures << " run(s) failed\n";
      for (const auto& p : result.points)
        for (const auto& r : p.runs)
          if (!r.metrics)
            std::cerr << "  seed " << r.seed << ": " << r.error << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
