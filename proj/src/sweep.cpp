#include "ccsim/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <mutex>
#include <optional>
#include <thread>

#include "ccsim/simulator.hpp"

namespace ccsim {

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Entries: return "entries";
    case SweepAxis::Duration: return "duration";
    case SweepAxis::Advisor: return "advisor";
  }
  return "?";
}

std::optional<SweepAxis> sweep_axis_from_string(const std::string& s) {
  if (s == "entries") return SweepAxis::Entries;
  if (s == "duration") return SweepAxis::Duration;
  if (s == "advisor") return SweepAxis::Advisor;
  return std::nullopt;
}

RunConfig config_for_sweep_value(const RunConfig& base, SweepAxis axis,
                                 const std::string& value) {
  RunConfig cfg = base;
  switch (axis) {
    case SweepAxis::Entries:
      apply_override(cfg, "advisor.entries=" + value);
      break;
    case SweepAxis::Duration:
      apply_override(cfg, "advisor.duration_ms=" + value);
      break;
    case SweepAxis::Advisor:
      apply_override(cfg, "advisor.kind=" + value);
      break;
  }
  cfg.validate();
  return cfg;
}

SweepResult run_sweep(const RunConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values, int workers) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (workers < 1) workers = int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  // Validate every point up front so a bad value fails before any work.
  std::vector<RunConfig> configs;
  for (const auto& v : values) {
    try {
      configs.push_back(config_for_sweep_value(base, axis, v));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("sweep value '") + v + "': " + e.what());
    }
  }

  std::vector<std::optional<SimReport>> reports(values.size());
  std::vector<std::string> failures(values.size());
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      try {
        reports[i] = run_simulate(configs[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };

  const int n_threads = std::min<int>(workers, int(values.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (size_t i = 0; i < values.size(); ++i)
    if (!failures[i].empty())
      throw InternalError("sweep run failed for " + std::string(to_string(axis)) +
                          "=" + values[i] + ": " + failures[i]);

  SweepResult result;
  result.axis = axis;
  for (size_t i = 0; i < values.size(); ++i)
    result.rows.push_back({values[i], std::move(*reports[i])});
  return result;
}

std::string SweepResult::csv() const {
  std::string out;
  char buf[64];
  auto num = [&](double v) {
    snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };

  const size_t n_cores = rows.empty() ? 0 : rows[0].report.ipc.size();
  const auto windows =
      rows.empty() ? std::vector<double>{} : rows[0].report.rltl_windows_ms;

  out += "config_id,advisor,entries,duration_ms";
  for (size_t i = 0; i < n_cores; ++i) out += ",ipc" + std::to_string(i);
  out += ",ws,rmpkc,hit_rate";
  for (double w : windows) out += ",rltl_" + num(w) + "ms";
  out += ",energy_nj\n";

  for (const auto& row : rows) {
    const SimReport& r = row.report;
    RunConfig echo = parse_config(r.config_echo);
    out += std::string(to_string(axis)) + "=" + row.value;
    out += "," + r.advisor_name;
    out += "," + std::to_string(echo.advisor.entries);
    out += "," + num(echo.advisor.duration_ms);
    for (size_t i = 0; i < n_cores; ++i) out += "," + num(r.ipc[i]);
    out += ",";
    if (r.ws) out += num(*r.ws);
    out += "," + num(r.rmpkc);
    out += "," + num(r.hit_rate);
    for (size_t i = 0; i < windows.size(); ++i)
      out += "," + num(r.rltl.fraction(i));
    out += "," + num(r.energy.total_nj);
    out += "\n";
  }
  return out;
}

}  // namespace ccsim
