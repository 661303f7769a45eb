#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

// ---------------------------------------------------------------------------
// Timing-reduction table: which tRCD/tRAS a highly-charged activation may
// use, per caching duration. Values are kept in nanoseconds and converted
// to cycles rounding up, so a reduced activation never starts earlier than
// the analog budget allows.
// ---------------------------------------------------------------------------

struct ReductionRow {
  double duration_ms = 1.0;
  double trcd_ns = 8.0;
  double tras_ns = 22.0;
};

struct ReductionTable {
  double baseline_trcd_ns = 13.75;
  double baseline_tras_ns = 35.0;
  std::vector<ReductionRow> rows = {
      {1.0, 8.0, 22.0}, {4.0, 9.0, 24.0}, {16.0, 11.0, 28.0}};

  static Cycle ns_to_cycles(double ns, int bus_freq_mhz);

  // Row timings in CPU cycles (bus-cycle conversion first, then the
  // CPU:bus ratio).
  ActTiming row_timing(int row, int bus_freq_mhz, Cycle clock_ratio) const;

  int row_for_duration(double ms) const;       // exact match or -1
  int row_covering_duration(double ms) const;  // smallest duration >= ms, or -1

  void collect_problems(std::vector<std::string>& out,
                        const TimingParams& standard_bus_timing) const;
};

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------

struct AdvisorVerdict {
  // Index into ReductionTable rows; empty means standard timing.
  std::optional<int> reduced_row;
  bool hit() const { return reduced_row.has_value(); }
};

// ---------------------------------------------------------------------------
// HCRAC: set-associative tag store of recently-precharged rows with the
// IIC/EC rolling invalidation scheme. Entry slots are numbered set-major
// (slot = set * ways + way) for the EC walk.
// ---------------------------------------------------------------------------

struct HcracParams {
  int entries = 128;             // k
  int ways = 2;                  // w
  Cycle window = 4'000'000;      // C, in controller cycles
  bool invalidate_on_hit = true;
};

class Hcrac {
public:
  explicit Hcrac(const HcracParams& p);

  void tick(Cycle now);
  bool lookup(int rank, int bank, int64_t row, Cycle now);
  void insert(int rank, int bank, int64_t row, Cycle now);

  int entries() const { return k_; }
  int ways() const { return ways_; }
  Cycle window() const { return window_; }          // after round-up
  Cycle invalidation_interval() const { return interval_; }

  Cycle max_residency() const { return max_residency_; }
  uint64_t invalidations() const { return invalidations_; }
  uint64_t slot_invalidations(int slot) const {
    return slot_invalidations_[size_t(slot)];
  }
  int valid_count() const;
  uint64_t state_hash() const;

private:
  struct Entry {
    bool valid = false;
    int rank = 0;
    int bank = 0;
    int64_t row = 0;
    uint64_t lru = 0;  // larger = more recent
    Cycle inserted = 0;
  };

  int set_of(int bank, int64_t row) const;
  void invalidate_slot(int slot, Cycle now);

  int k_;
  int ways_;
  int sets_;
  Cycle window_;
  Cycle interval_;
  bool invalidate_on_hit_;

  Cycle iic_ = 0;
  int ec_ = 0;
  uint64_t lru_clock_ = 0;

  std::vector<Entry> slots_;
  std::vector<uint64_t> slot_invalidations_;
  Cycle max_residency_ = 0;
  uint64_t invalidations_ = 0;
};

// ---------------------------------------------------------------------------
// Advisor interface
// ---------------------------------------------------------------------------

enum class AdvisorKind { None, ChargeCache, Nuat, ChargeCacheNuat, LlDram };

const char* to_string(AdvisorKind k);
std::optional<AdvisorKind> advisor_kind_from_string(const std::string& s);

struct AdvisorConfig {
  AdvisorKind kind = AdvisorKind::None;
  int entries = 128;
  int ways = 2;
  double duration_ms = 1.0;
  bool invalidate_on_hit = true;
  bool shared = false;  // one HCRAC per channel instead of per core+channel
  std::vector<double> nuat_bins_ms = {6.0, 16.0};

  void collect_problems(std::vector<std::string>& out,
                        const ReductionTable& table) const;
};

// Where NUAT gets row ages from; implemented over the DRAM refresh engine.
class RefreshBook {
public:
  virtual ~RefreshBook() = default;
  virtual Cycle last_refresh(int channel, int rank, int64_t row) const = 0;
};

struct AdvisorStats {
  uint64_t activations = 0;
  uint64_t hits_chargecache = 0;
  uint64_t hits_nuat = 0;
  uint64_t hits_lldram = 0;
  uint64_t insertions = 0;
  uint64_t hits_total() const {
    return hits_chargecache + hits_nuat + hits_lldram;
  }
};

class LatencyAdvisor {
public:
  virtual ~LatencyAdvisor() = default;
  virtual AdvisorVerdict on_activate(int core, const AddressParts& where,
                                     Cycle now) = 0;
  virtual void on_precharge(int core, const AddressParts& where, Cycle now) = 0;
  virtual void tick(Cycle now) = 0;
  virtual AdvisorKind kind() const = 0;

  void reset_stats() { stats_ = AdvisorStats{}; }
  const AdvisorStats& stats() const { return stats_; }

  // Instrumentation for the residency-bound invariant; zero when the
  // mechanism has no table.
  virtual Cycle max_entry_residency() const { return 0; }
  virtual Cycle effective_window() const { return 0; }
  virtual uint64_t state_hash() const { return 0; }

protected:
  AdvisorStats stats_;
};

// cpu_cycles_per_ms: how many controller cycles make one millisecond;
// durations and bins are converted with it.
struct AdvisorEnv {
  const DramGeometry* geometry = nullptr;
  const ReductionTable* table = nullptr;
  int bus_freq_mhz = 800;
  Cycle clock_ratio = 5;
  int64_t cpu_cycles_per_ms = 4'000'000;
  int cores = 1;
  const RefreshBook* refresh = nullptr;  // required for NUAT
};

std::unique_ptr<LatencyAdvisor> make_advisor(const AdvisorConfig& cfg,
                                             const AdvisorEnv& env);

// Eq.-style storage model: EntrySize = log2(ranks) + log2(banks) +
// log2(rows) + 1 valid bit; per entry add log2(ways) LRU bits; total over
// cores * channels * entries.
uint64_t storage_cost_bits(int cores, int channels, int entries,
                           const DramGeometry& geometry, int associativity);

}  // namespace ccsim
