#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

// ---------------------------------------------------------------------------
// Activation/precharge event log. PREA is recorded as one PRE event per
// closed row. Events before `measure_from` provide context (a precharge
// during warm-up still anchors a measured activation) but only ACTs at or
// after it are counted.
// ---------------------------------------------------------------------------

enum class RowEventKind : uint8_t { Act, Pre };

struct RowEvent {
  Cycle cycle = 0;
  RowEventKind kind = RowEventKind::Act;
  int16_t channel = 0;
  int16_t rank = 0;
  int16_t bank = 0;
  int64_t row = 0;
};

struct EventLog {
  std::vector<RowEvent> events;  // cycle-ordered
  Cycle measure_from = 0;
};

struct RltlHistogram {
  std::vector<Cycle> windows;        // ascending
  std::vector<uint64_t> qualifying;  // per window
  uint64_t total_activations = 0;
  uint64_t first_touch = 0;

  double fraction(size_t i) const {
    return total_activations == 0
               ? 0.0
               : double(qualifying[i]) / double(total_activations);
  }
};

// Fraction of activations whose same-row previous precharge happened within
// each window. First-ever activations of a row never qualify.
RltlHistogram compute_rltl(const EventLog& log,
                           const std::vector<Cycle>& windows);

// ---------------------------------------------------------------------------
// Refresh-relative locality. The refresh timeline carries the engine's
// initial (pre-run) group timestamps plus every REF issued, so ages can be
// replayed exactly.
// ---------------------------------------------------------------------------

struct RefreshEvent {
  Cycle cycle = 0;
  int16_t channel = 0;
  int16_t rank = 0;
  int64_t group = 0;
};

struct RefreshTimeline {
  int channels = 1;
  int ranks = 1;
  int64_t groups = 8192;
  int64_t rows_per_group = 8;
  Cycle trefi = 0;  // scaled; defines the seeded pre-run timestamps
  std::vector<RefreshEvent> events;  // cycle-ordered

  Cycle initial_timestamp(int64_t group) const {
    return (group + 1 - groups) * trefi;
  }
};

double compute_refresh_locality(const EventLog& log,
                                const RefreshTimeline& refresh, Cycle window);

// ---------------------------------------------------------------------------
// Throughput + energy
// ---------------------------------------------------------------------------

double weighted_speedup(const std::vector<double>& shared_ipc,
                        const std::vector<double>& alone_ipc);

struct EnergyModel {
  double act_pre_nj = 2.0;   // one ACT/PRE pair, charged per ACT
  double read_nj = 1.2;
  double write_nj = 1.3;
  double ref_nj = 28.0;
  double standby_mw_per_rank = 120.0;
  double active_mw_per_rank = 180.0;
  double advisor_mw = 0.149;

  void collect_problems(std::vector<std::string>& out) const;
};

struct CommandCounts {
  uint64_t act = 0;
  uint64_t pre = 0;
  uint64_t prea = 0;
  uint64_t read = 0;
  uint64_t write = 0;
  uint64_t ref = 0;
  uint64_t rows_closed = 0;  // PRE + per-bank closes from PREA
};

struct EnergyBreakdown {
  double activation_nj = 0;
  double read_nj = 0;
  double write_nj = 0;
  double refresh_nj = 0;
  double background_standby_nj = 0;
  double background_active_nj = 0;
  double advisor_nj = 0;
  double total_nj = 0;  // always the exact sum of the components above
};

// `elapsed_cycles` at `cpu_mhz`; `rank_active_cycles` summed over ranks.
EnergyBreakdown compute_energy(const CommandCounts& counts,
                               Cycle elapsed_cycles, Cycle rank_active_cycles,
                               int total_ranks, int cpu_mhz,
                               const EnergyModel& model);

// ---------------------------------------------------------------------------
// Per-run report
// ---------------------------------------------------------------------------

struct SimReport {
  Cycle measured_cycles = 0;
  Cycle warmup_cycles = 0;
  std::vector<double> ipc;
  std::optional<double> ws;  // needs alone-run IPCs
  double rmpkc = 0;
  double hit_rate = 0;
  uint64_t activations = 0;
  uint64_t hits_chargecache = 0;
  uint64_t hits_nuat = 0;
  uint64_t hits_lldram = 0;
  RltlHistogram rltl;
  std::vector<double> rltl_windows_ms;
  double refresh_locality = 0;
  double refresh_locality_window_ms = 8.0;
  CommandCounts commands;
  EnergyBreakdown energy;
  uint64_t storage_bits = 0;
  Cycle max_entry_residency = 0;
  Cycle advisor_window_cycles = 0;
  Cycle max_request_latency = 0;
  Cycle min_read_latency = 0;  // 0 when the run issued no reads
  int refresh_deferral_warnings = 0;
  uint64_t state_hash = 0;
  uint64_t seed = 0;
  std::string advisor_name;
  std::string config_echo;  // canonical config text, reloadable

  std::string to_json() const;  // deterministic byte-for-byte
};

}  // namespace ccsim
