#include "ccsim/dram.hpp"

#include <cassert>

namespace ccsim {

const char* to_string(BankPhase p) {
  switch (p) {
    case BankPhase::Precharged: return "Precharged";
    case BankPhase::Activating: return "Activating";
    case BankPhase::Activated: return "Activated";
    case BankPhase::Precharging: return "Precharging";
  }
  return "?";
}

BankPhase BankState::phase_at(Cycle now, const TimingParams& timing) const {
  if (phase == BankPhase::Activating && now - last_act >= active_timing.trcd)
    return BankPhase::Activated;
  if (phase == BankPhase::Precharging && now - last_pre >= timing.trp)
    return BankPhase::Precharged;
  return phase;
}

std::optional<TimingViolation> check_issue(const BankState& bank,
                                           const DramCommand& cmd, Cycle now,
                                           const TimingParams& timing) {
  const BankPhase phase = bank.phase_at(now, timing);
  switch (cmd.kind) {
    case CommandKind::ACT:
      if (phase == BankPhase::Activating || phase == BankPhase::Activated)
        return TimingViolation{"bank-state: ACT while row open", 0};
      if (phase == BankPhase::Precharging)
        return TimingViolation{"tRP", timing.trp - (now - bank.last_pre)};
      return std::nullopt;

    case CommandKind::READ:
    case CommandKind::WRITE:
      if (phase == BankPhase::Precharged || phase == BankPhase::Precharging)
        return TimingViolation{"bank-state: column access with no open row", 0};
      if (phase == BankPhase::Activating)
        return TimingViolation{"tRCD",
                               bank.active_timing.trcd - (now - bank.last_act)};
      if (cmd.row >= 0 && bank.open_row && *bank.open_row != cmd.row)
        return TimingViolation{"bank-state: column access to non-open row", 0};
      return std::nullopt;

    case CommandKind::PRE:
      if (phase == BankPhase::Precharged || phase == BankPhase::Precharging)
        return TimingViolation{"bank-state: PRE with no open row", 0};
      if (now - bank.last_act < bank.active_timing.tras)
        return TimingViolation{"tRAS",
                               bank.active_timing.tras - (now - bank.last_act)};
      return std::nullopt;

    case CommandKind::PREA:
      // Only open banks are constrained; a precharged bank ignores PREA.
      if (phase == BankPhase::Activating || phase == BankPhase::Activated) {
        if (now - bank.last_act < bank.active_timing.tras)
          return TimingViolation{
              "tRAS", bank.active_timing.tras - (now - bank.last_act)};
      }
      return std::nullopt;

    case CommandKind::REF:
      if (phase != BankPhase::Precharged) {
        if (phase == BankPhase::Precharging)
          return TimingViolation{"tRP", timing.trp - (now - bank.last_pre)};
        return TimingViolation{"bank-state: REF with open row", 0};
      }
      return std::nullopt;
  }
  return TimingViolation{"bank-state: unknown command", 0};
}

bool can_issue(const BankState& bank, const DramCommand& cmd, Cycle now,
               const TimingParams& timing) {
  return !check_issue(bank, cmd, now, timing).has_value();
}

BankState apply(const BankState& bank, const DramCommand& cmd, Cycle now,
                const TimingParams& timing) {
  if (auto v = check_issue(bank, cmd, now, timing))
    throw ProtocolError(v->constraint, v->deficit);

  BankState next = bank;
  next.phase = bank.phase_at(now, timing);
  switch (cmd.kind) {
    case CommandKind::ACT:
      next.phase = BankPhase::Activating;
      next.open_row = cmd.row;
      next.last_act = now;
      next.active_timing = ActTiming{timing.trcd, timing.tras};
      break;
    case CommandKind::READ:
    case CommandKind::WRITE:
      next.last_rdwr = now;
      break;
    case CommandKind::PRE:
      next.phase = BankPhase::Precharging;
      next.open_row.reset();
      next.last_pre = now;
      next.active_core = -1;
      break;
    case CommandKind::PREA:
      if (next.phase == BankPhase::Activating ||
          next.phase == BankPhase::Activated) {
        next.phase = BankPhase::Precharging;
        next.open_row.reset();
        next.last_pre = now;
        next.active_core = -1;
      }
      break;
    case CommandKind::REF:
      break;  // rank-level effect only
  }
  return next;
}

bool RankState::all_banks_precharged(Cycle now,
                                     const TimingParams& timing) const {
  for (const auto& b : banks)
    if (b.phase_at(now, timing) != BankPhase::Precharged) return false;
  return true;
}

// ---------------------------------------------------------------------------
// DramSystem
// ---------------------------------------------------------------------------

DramSystem::DramSystem(const DramGeometry& geo,
                       const TimingParams& timing_scaled, Cycle clock_ratio,
                       Cycle retention_cycles, int64_t ref_groups)
    : geo_(geo), timing_(timing_scaled), ratio_(clock_ratio),
      retention_(retention_cycles) {
  rows_per_ref_ = geo.rows_per_bank / ref_groups;
  if (rows_per_ref_ < 1) rows_per_ref_ = 1;
  groups_ = geo.rows_per_bank / rows_per_ref_;

  channels_.resize(size_t(geo.channels));
  for (auto& ch : channels_) {
    ch.ranks.resize(size_t(geo.ranks_per_channel));
    for (auto& rk : ch.ranks) {
      rk.banks.resize(size_t(geo.banks_per_rank));
      rk.rows_per_ref = rows_per_ref_;
      rk.groups = groups_;
      rk.next_due = timing_.trefi;
      rk.group_refresh_cycle.resize(size_t(groups_));
      // Seed the pre-run refresh history as if the round-robin engine had
      // been running forever, so row ages are spread over the full wheel
      // from cycle 0 on.
      for (int64_t g = 0; g < groups_; ++g)
        rk.group_refresh_cycle[size_t(g)] = (g + 1 - groups_) * timing_.trefi;
    }
  }
}

std::optional<TimingViolation> DramSystem::check_channel_issue(
    const DramCommand& cmd, Cycle now) const {
  if (cmd.channel < 0 || cmd.channel >= geo_.channels || cmd.rank < 0 ||
      cmd.rank >= geo_.ranks_per_channel)
    return TimingViolation{"bank-state: channel/rank out of range", 0};
  const bool bank_scope =
      cmd.kind != CommandKind::PREA && cmd.kind != CommandKind::REF;
  if (bank_scope && (cmd.bank < 0 || cmd.bank >= geo_.banks_per_rank))
    return TimingViolation{"bank-state: bank out of range", 0};
  if (cmd.kind == CommandKind::ACT &&
      (cmd.row < 0 || cmd.row >= geo_.rows_per_bank))
    return TimingViolation{"bank-state: row out of range", 0};
  if (!is_bus_slot(now))
    return TimingViolation{"bus-slot-alignment", ratio_ - (now % ratio_)};
  const ChannelState& ch = channels_[size_t(cmd.channel)];
  if (ch.last_cmd_cycle == now) return TimingViolation{"command-bus-busy", ratio_};

  const RankState& rk = ch.ranks[size_t(cmd.rank)];
  if (now < rk.ref_busy_until)
    return TimingViolation{"tRFC", rk.ref_busy_until - now};

  if (cmd.kind == CommandKind::READ || cmd.kind == CommandKind::WRITE) {
    const Cycle data_start =
        now + (cmd.kind == CommandKind::READ ? timing_.tcl : timing_.tcwl);
    if (data_start < ch.data_bus_free)
      return TimingViolation{"data-bus-busy", ch.data_bus_free - data_start};
  }

  switch (cmd.kind) {
    case CommandKind::PREA:
    case CommandKind::REF:
      for (const auto& b : rk.banks)
        if (auto v = check_issue(b, cmd, now, timing_)) return v;
      return std::nullopt;
    default:
      return check_issue(rk.banks[size_t(cmd.bank)], cmd, now, timing_);
  }
}

bool DramSystem::can_issue_cmd(const DramCommand& cmd, Cycle now) const {
  return !check_channel_issue(cmd, now).has_value();
}

void DramSystem::note_open_delta(RankState& rk, Cycle now, int delta) {
  if (rk.open_banks > 0) rk.active_cycles += now - rk.active_since;
  rk.open_banks += delta;
  rk.active_since = now;
  assert(rk.open_banks >= 0);
}

void DramSystem::settle_active_time(Cycle now) {
  for (auto& ch : channels_)
    for (auto& rk : ch.ranks) {
      if (rk.open_banks > 0) rk.active_cycles += now - rk.active_since;
      rk.active_since = now;
    }
}

std::vector<DramSystem::CloseEvent> DramSystem::issue(const DramCommand& cmd,
                                                      Cycle now,
                                                      const ActTiming& act_timing,
                                                      int core_id) {
  if (auto v = check_channel_issue(cmd, now))
    throw ProtocolError(v->constraint, v->deficit);

  ChannelState& ch = channels_[size_t(cmd.channel)];
  RankState& rk = ch.ranks[size_t(cmd.rank)];
  ch.last_cmd_cycle = now;

  std::vector<CloseEvent> closed;
  switch (cmd.kind) {
    case CommandKind::ACT: {
      TimingParams variant = timing_;
      variant.trcd = act_timing.trcd;
      variant.tras = act_timing.tras;
      BankState& b = rk.banks[size_t(cmd.bank)];
      b = apply(b, cmd, now, variant);
      b.active_core = core_id;
      note_open_delta(rk, now, +1);
      break;
    }
    case CommandKind::READ:
    case CommandKind::WRITE: {
      BankState& b = rk.banks[size_t(cmd.bank)];
      b = apply(b, cmd, now, timing_);
      ch.data_bus_free =
          now + (cmd.kind == CommandKind::READ ? timing_.tcl : timing_.tcwl) +
          timing_.tbl;
      break;
    }
    case CommandKind::PRE: {
      BankState& b = rk.banks[size_t(cmd.bank)];
      closed.push_back({cmd.bank, *b.open_row, b.active_core});
      b = apply(b, cmd, now, timing_);
      note_open_delta(rk, now, -1);
      break;
    }
    case CommandKind::PREA: {
      for (int bi = 0; bi < geo_.banks_per_rank; ++bi) {
        BankState& b = rk.banks[size_t(bi)];
        const BankPhase p = b.phase_at(now, timing_);
        if (p == BankPhase::Activating || p == BankPhase::Activated) {
          closed.push_back({bi, *b.open_row, b.active_core});
          b = apply(b, cmd, now, timing_);
          note_open_delta(rk, now, -1);
        }
      }
      break;
    }
    case CommandKind::REF: {
      if (rk.pending_refs <= 0)
        throw InternalError("REF issued with no refresh pending");
      rk.ref_busy_until = now + timing_.trfc;
      rk.group_refresh_cycle[size_t(rk.group_ptr)] = now;
      rk.group_ptr = (rk.group_ptr + 1) % groups_;
      if (now - rk.oldest_pending_due > 8 * timing_.trefi)
        rk.deferral_warnings++;
      rk.pending_refs--;
      rk.oldest_pending_due += timing_.trefi;
      rk.refs_issued++;
      break;
    }
  }
  return closed;
}

bool DramSystem::refresh_tick(int ch, int rk_i, Cycle now) {
  RankState& rk = rank(ch, rk_i);
  while (now >= rk.next_due) {
    if (rk.pending_refs == 0) rk.oldest_pending_due = rk.next_due;
    rk.pending_refs++;
    rk.next_due += timing_.trefi;
  }
  return rk.pending_refs > 0;
}

int DramSystem::total_deferral_warnings() const {
  int n = 0;
  for (const auto& ch : channels_)
    for (const auto& rk : ch.ranks) n += rk.deferral_warnings;
  return n;
}

}  // namespace ccsim
