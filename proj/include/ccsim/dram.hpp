#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

enum class BankPhase : uint8_t { Precharged, Activating, Activated, Precharging };

const char* to_string(BankPhase p);

// Per-bank finite-state record. Value type: apply() returns the successor
// state, so replay and what-if checks are cheap.
struct BankState {
  BankPhase phase = BankPhase::Precharged;
  std::optional<int64_t> open_row;
  Cycle last_act = kNever;
  Cycle last_pre = kNever;
  Cycle last_rdwr = kNever;
  ActTiming active_timing;  // latched at ACT, governs READ/WRITE/PRE until PRE
  int active_core = -1;     // core whose request triggered the current ACT

  // Time-derived phase: Activating ripens into Activated after the latched
  // tRCD, Precharging into Precharged after tRP.
  BankPhase phase_at(Cycle now, const TimingParams& timing) const;
};

struct TimingViolation {
  std::string constraint;
  Cycle deficit = 0;
};

// For ACT, `timing` is the variant chosen for this activation (its
// trcd/tras get latched); for everything else it supplies tRP. READ/WRITE
// and PRE legality use the pair latched at the last ACT.
std::optional<TimingViolation> check_issue(const BankState& bank,
                                           const DramCommand& cmd, Cycle now,
                                           const TimingParams& timing);

bool can_issue(const BankState& bank, const DramCommand& cmd, Cycle now,
               const TimingParams& timing);

// Successor state. Throws ProtocolError when check_issue reports a
// violation.
BankState apply(const BankState& bank, const DramCommand& cmd, Cycle now,
                const TimingParams& timing);

// ---------------------------------------------------------------------------
// Rank state + refresh engine
// ---------------------------------------------------------------------------

// Refresh bookkeeping is rank-granular: every REF refreshes one group of
// `rows_per_ref` consecutive rows in each bank of the rank, and the group
// pointer walks round-robin so each row is refreshed once per retention
// window. Group timestamps double as the per-row last-refresh record that
// NUAT and the refresh-locality metric consume.
struct RankState {
  std::vector<BankState> banks;

  Cycle ref_busy_until = kNever;  // rank blocked for tRFC after REF

  // refresh engine
  Cycle next_due = 0;
  int pending_refs = 0;
  Cycle oldest_pending_due = 0;
  int64_t group_ptr = 0;
  int64_t rows_per_ref = 8;
  int64_t groups = 8192;
  std::vector<Cycle> group_refresh_cycle;
  uint64_t refs_issued = 0;
  int deferral_warnings = 0;

  // background-energy accounting: rank is "active" while any bank is open
  int open_banks = 0;
  Cycle active_since = 0;
  Cycle active_cycles = 0;

  bool all_banks_precharged(Cycle now, const TimingParams& timing) const;
  Cycle last_refresh(int64_t row) const {
    return group_refresh_cycle[size_t(row / rows_per_ref)];
  }
};

struct ChannelState {
  std::vector<RankState> ranks;
  Cycle last_cmd_cycle = kNever;  // one command per channel per bus slot
  Cycle data_bus_free = kNever;   // end of the last reserved data burst
};

// Whole-DRAM state plus command admission. All cycle arguments are in the
// caller's clock domain (the simulator uses CPU cycles); `clock_ratio` is
// how many of those cycles make one bus cycle.
class DramSystem {
public:
  DramSystem(const DramGeometry& geo, const TimingParams& timing_scaled,
             Cycle clock_ratio, Cycle retention_cycles, int64_t ref_groups);

  const DramGeometry& geometry() const { return geo_; }
  const TimingParams& timing() const { return timing_; }
  Cycle clock_ratio() const { return ratio_; }

  ChannelState& channel(int ch) { return channels_[size_t(ch)]; }
  const ChannelState& channel(int ch) const { return channels_[size_t(ch)]; }
  RankState& rank(int ch, int rk) { return channels_[size_t(ch)].ranks[size_t(rk)]; }
  const RankState& rank(int ch, int rk) const {
    return channels_[size_t(ch)].ranks[size_t(rk)];
  }
  BankState& bank(int ch, int rk, int b) {
    return channels_[size_t(ch)].ranks[size_t(rk)].banks[size_t(b)];
  }
  const BankState& bank(int ch, int rk, int b) const {
    return channels_[size_t(ch)].ranks[size_t(rk)].banks[size_t(b)];
  }

  bool is_bus_slot(Cycle now) const { return now % ratio_ == 0; }

  // Channel-level admission on top of the bank state machine: bus-slot
  // alignment, one command per channel per slot, rank tRFC blocking, and
  // data-bus occupancy for READ/WRITE.
  std::optional<TimingViolation> check_channel_issue(const DramCommand& cmd,
                                                     Cycle now) const;
  bool can_issue_cmd(const DramCommand& cmd, Cycle now) const;

  // Applies `cmd` to the addressed bank/rank and updates channel bookkeeping.
  // For ACT, `act_timing` must carry the variant that governs the
  // activation. Returns the rows closed by the command (one for PRE, one
  // per open bank for PREA) so the caller can feed the latency advisor.
  struct CloseEvent {
    int bank;
    int64_t row;
    int core;
  };
  std::vector<CloseEvent> issue(const DramCommand& cmd, Cycle now,
                                const ActTiming& act_timing, int core_id);

  // Refresh engine. Call with a monotone clock, at least once per bus slot.
  // Returns true while a REF is pending for the rank.
  bool refresh_tick(int ch, int rk, Cycle now);
  bool refresh_pending(int ch, int rk) const {
    return rank(ch, rk).pending_refs > 0;
  }

  Cycle last_refresh(int ch, int rk, int64_t row) const {
    return rank(ch, rk).last_refresh(row);
  }
  int64_t refresh_groups() const { return groups_; }
  int64_t rows_per_ref() const { return rows_per_ref_; }
  int total_deferral_warnings() const;

  // Rank-active integration for the energy model's standby/active split.
  void settle_active_time(Cycle now);

private:
  void note_open_delta(RankState& rk, Cycle now, int delta);

  DramGeometry geo_;
  TimingParams timing_;
  Cycle ratio_;
  Cycle retention_;
  int64_t groups_;
  int64_t rows_per_ref_;
  std::vector<ChannelState> channels_;
};

}  // namespace ccsim
