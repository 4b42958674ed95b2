// Scenario runner: negotiates, analyzes and simulates scenario files and writes CSV reports.
//
// Exit codes: 0 clean, 2 configuration error, 3 at least one subscription rejected,
// 4 simulation invariant or bound violation (takes precedence over 3).

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "tsnr/log.hpp"
#include "tsnr/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRejected = 3;
constexpr int kExitViolation = 4;

struct SweepPoint {
  std::string label;
  tsnr::Scenario scenario;
};

std::vector<SweepPoint> expand_points(const tsnr::Scenario& base,
                                      const std::vector<std::pair<std::string, std::vector<std::string>>>& axes) {
  std::vector<SweepPoint> points{{"", base}};
  for (const auto& [axis, values] : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : points)
      for (const auto& v : values) {
        std::string label = p.label.empty() ? axis + "=" + v : p.label + ";" + axis + "=" + v;
        next.push_back({label, tsnr::apply_axis(p.scenario, axis, v)});
      }
    points = std::move(next);
  }
  return points;
}

// Runs fn(i) for i in [0, n) on at most `jobs` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void write_file(const std::string& dir, const std::string& name, const std::function<void(std::ostream&)>& fn) {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name);
  if (!f) throw tsnr::ConfigError("cannot write " + name);
  fn(f);
}

}  // namespace

int main(int argc, char** argv) {
  tsnr::init_logging();
  CLI::App app{"Stream reservation analyzer and credit-based shaper simulator"};
  std::string scenario_path;
  std::string mode = "both";
  std::string scheme;
  std::vector<std::string> sweeps;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int jobs = 1;
  bool compare = false;
  std::string trace_path;
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "analyze, simulate or both")->check(CLI::IsMember({"analyze", "simulate", "both"}));
  app.add_option("--scheme", scheme, "Override the idle slope scheme")->check(CLI::IsMember({"cmi", "fi", "db"}));
  app.add_option("--sweep", sweeps, "AXIS=a..b or AXIS=v1,v2 (N, M, ct_mode, seed, scheme, idle_slope in Mbit/s)");
  auto* seed_opt = app.add_option("--seed", seed, "Simulation seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--jobs", jobs, "Parallel sweep points")->check(CLI::PositiveNumber);
  app.add_flag("--compare", compare, "Run cmi, fi and db side by side and write comparison.csv");
  app.add_option("--trace", trace_path, "Per-frame CSV trace (single point only)");
  CLI11_PARSE(app, argc, argv);

  try {
    tsnr::Scenario base = tsnr::load_scenario_file(scenario_path);
    tsnr::RunOptions options;
    options.mode = tsnr::parse_mode(mode);
    if (!scheme.empty()) options.scheme = tsnr::parse_scheme(scheme);
    if (*seed_opt) options.seed = seed;

    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::optional<std::vector<std::string>> slope_axis;
    for (const auto& s : sweeps) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw tsnr::ConfigError("sweep must be AXIS=values: " + s);
      std::string axis = s.substr(0, eq);
      auto values = tsnr::expand_axis(s.substr(eq + 1));
      if (axis == "idle_slope") slope_axis = values;
      else axes.emplace_back(axis, values);
    }

    bool motivation = base.generator && base.generator->type == "motivation";
    if (slope_axis && !motivation) throw tsnr::ConfigError("idle_slope sweep needs a motivation scenario");
    if (motivation) {
      std::vector<std::int64_t> slopes;
      if (!slope_axis) slope_axis = tsnr::expand_axis("1..100");
      for (const auto& v : *slope_axis) {
        try {
          slopes.push_back(std::stoll(v) * 1'000'000);
        } catch (const std::exception&) {
          throw tsnr::ConfigError("idle_slope values are whole Mbit/s: " + v);
        }
      }
      auto rows = tsnr::motivation_sweep(base.generator->motivation, slopes);
      write_file(out_dir, "motivation.csv", [&](std::ostream& o) { tsnr::write_motivation(o, rows); });
    }

    auto points = expand_points(base, axes);
    std::ofstream trace;
    if (!trace_path.empty()) {
      if (points.size() != 1 || compare) throw tsnr::ConfigError("--trace needs a single run");
      trace.open(trace_path);
      if (!trace) throw tsnr::ConfigError("cannot write " + trace_path);
      options.trace = &trace;
    }

    std::size_t per_point = compare ? 3 : 1;
    std::vector<tsnr::RunOutcome> runs(points.size() * per_point);
    parallel_for(points.size(), jobs, [&](std::size_t i) {
      spdlog::info("running {}", points[i].label.empty() ? points[i].scenario.name : points[i].label);
      if (compare) {
        auto r = tsnr::compare_schemes(points[i].scenario, options);
        for (std::size_t k = 0; k < r.size(); ++k) {
          r[k].label = points[i].label;
          runs[i * per_point + k] = std::move(r[k]);
        }
      } else {
        runs[i] = tsnr::run_scenario(points[i].scenario, options);
        runs[i].label = points[i].label;
      }
    });

    tsnr::write_reports(out_dir, runs);
    if (compare) write_file(out_dir, "comparison.csv", [&](std::ostream& o) { tsnr::write_comparison(o, runs); });

    bool rejected = false, violated = false;
    for (const auto& r : runs) {
      rejected |= r.rejected > 0;
      violated |= !r.violations.empty();
      for (const auto& v : r.violations) spdlog::error("{}: {}", r.label.empty() ? r.scenario.name : r.label, v);
    }
    if (violated) return kExitViolation;
    if (rejected) return kExitRejected;
    return kExitOk;
  } catch (const tsnr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tsnr::NegotiationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tsnr::ModelError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}
