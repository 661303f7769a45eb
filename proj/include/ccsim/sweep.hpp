#pragma once

#include <string>
#include <vector>

#include "ccsim/config.hpp"
#include "ccsim/metrics.hpp"

namespace ccsim {

enum class SweepAxis { Entries, Duration, Advisor };

const char* to_string(SweepAxis a);
std::optional<SweepAxis> sweep_axis_from_string(const std::string& s);

struct SweepRow {
  std::string value;
  SimReport report;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Entries;
  std::vector<SweepRow> rows;  // in axis order, regardless of completion order

  // header + one row per run: config id, advisor, entries, duration_ms,
  // per-core ipc, ws, rmpkc, hit_rate, per-window rltl, energy_nj
  std::string csv() const;
};

RunConfig config_for_sweep_value(const RunConfig& base, SweepAxis axis,
                                 const std::string& value);

// Runs one simulation per value; independent runs execute on up to
// `workers` threads. Any failing run aborts the sweep with the failing
// value identified.
SweepResult run_sweep(const RunConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values, int workers);

}  // namespace ccsim
