#pragma once

#include "ccsim/config.hpp"
#include "ccsim/metrics.hpp"
#include "ccsim/validator.hpp"

namespace ccsim {

struct SimOutputs {
  SimReport report;
  CommandLog command_log;       // full run, including warm-up
  EventLog event_log;           // ACT/PRE row events (PREA expanded)
  RefreshTimeline refresh;
  uint64_t boundary_state_hash = 0;  // microarchitectural state at the
                                     // warm-up boundary
};

// Runs warm-up then the measured phase until every core meets its quota.
// Throws ConfigError on an invalid config, InputError on trace problems,
// InternalError when a run-time invariant breaks.
SimOutputs run_simulation(const RunConfig& cfg);

inline SimReport run_simulate(const RunConfig& cfg) {
  return run_simulation(cfg).report;
}

}  // namespace ccsim
