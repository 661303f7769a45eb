#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ccsim/metrics.hpp"
#include "ccsim/types.hpp"

namespace ccsim {

// One line of the emitted command trace. ACT records carry the tRCD/tRAS
// pair that was latched for the activation so replay can honor
// per-activation variants.
struct CommandRecord {
  Cycle cycle = 0;
  CommandKind kind = CommandKind::ACT;
  int channel = 0;
  int rank = 0;
  int bank = -1;
  int64_t row = -1;  // ACT/READ/WRITE: row; REF: refresh group
  int column = -1;
  Cycle act_trcd = 0;
  Cycle act_tras = 0;
  int reduced_row = -1;  // reduction-table row, -1 = standard
  int core = -1;
};

struct CommandLog {
  DramGeometry geometry;
  TimingParams timing;  // same clock domain as the record cycles
  Cycle clock_ratio = 1;
  Cycle measure_from = 0;
  Cycle refresh_deferral_bound = 8;  // in units of tREFI
  std::vector<CommandRecord> records;
};

struct LogViolation {
  size_t index = 0;
  Cycle cycle = 0;
  std::string what;
};

// Replays the log with bookkeeping independent of the simulator's bank
// state machine and reports every tRCD/tRAS/tRP/tRFC/tREFI or structural
// violation (up to `max_violations`).
std::vector<LogViolation> validate_command_log(const CommandLog& log,
                                               size_t max_violations = 64);

void write_command_log(std::ostream& out, const CommandLog& log);
CommandLog read_command_log(std::istream& in,
                            const std::string& name = "<cmdlog>");
CommandLog read_command_log_file(const std::string& path);

// Replays ACT/PRE/PREA into row events (PREA expands to one PRE per open
// bank) so the RLTL analysis can run straight off a command log.
EventLog event_log_from_command_log(const CommandLog& log);

}  // namespace ccsim
