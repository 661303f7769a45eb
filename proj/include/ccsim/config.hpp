#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccsim/advisor.hpp"
#include "ccsim/controller.hpp"
#include "ccsim/core.hpp"
#include "ccsim/metrics.hpp"
#include "ccsim/trace.hpp"
#include "ccsim/types.hpp"

namespace ccsim {

struct RunConfig {
  RunConfig() { core.quota = 50000; }

  DramGeometry geometry;
  TimingParams timing;  // bus cycles
  ReductionTable reduction;
  ControllerConfig controller;
  AdvisorConfig advisor;

  int cores = 1;
  CoreParams core;                   // core.quota: 0 = one trace pass
  int cpu_freq_mhz = 4000;
  Cycle warmup_cycles = 2'000'000;

  std::vector<TraceSource> workload = {default_trace_source()};
  std::vector<double> alone_ipc;           // optional, for weighted speedup

  EnergyModel energy;

  std::vector<double> rltl_windows_ms = {0.125, 0.5, 1, 8, 32};
  double refresh_window_ms = 8.0;

  uint64_t seed = 1;
  double retention_ms = 64.0;
  int64_t ref_groups = 8192;
  bool validate_run = false;  // replay the command log through the validator

  // derived
  Cycle clock_ratio() const { return cpu_freq_mhz / timing.bus_freq_mhz; }
  int64_t cpu_cycles_per_ms() const { return int64_t(cpu_freq_mhz) * 1000; }
  Cycle ms_to_cycles(double ms) const {
    return Cycle(ms * double(cpu_cycles_per_ms()) + 0.5);
  }
  TimingParams timing_cpu() const { return timing.scaled(clock_ratio()); }
  std::vector<ActTiming> variant_timings_cpu() const;
  std::vector<TraceSource> workload_per_core() const;

  std::vector<std::string> problems() const;
  void validate() const {
    auto p = problems();
    if (!p.empty()) throw ConfigError(p);
  }

  std::string serialize() const;  // canonical, reload-equivalent
  bool operator==(const RunConfig& other) const {
    return serialize() == other.serialize();
  }
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Applies `section.key=value` assignments on top of a config (sweep axes,
// CLI overrides).
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace ccsim
