#include "ccsim/controller.hpp"

#include <cassert>

namespace ccsim {

// ---------------------------------------------------------------------------
// Address mapping
// ---------------------------------------------------------------------------

const char* to_string(MappingScheme s) {
  switch (s) {
    case MappingScheme::RowRankBankChannelColumn:
      return "row_rank_bank_channel_column";
    case MappingScheme::RowRankChannelBankColumn:
      return "row_rank_channel_bank_column";
    case MappingScheme::RowChannelBankRankColumn:
      return "row_channel_bank_rank_column";
  }
  return "?";
}

std::optional<MappingScheme> mapping_scheme_from_string(const std::string& s) {
  if (s == "row_rank_bank_channel_column")
    return MappingScheme::RowRankBankChannelColumn;
  if (s == "row_rank_channel_bank_column")
    return MappingScheme::RowRankChannelBankColumn;
  if (s == "row_channel_bank_rank_column")
    return MappingScheme::RowChannelBankRankColumn;
  return std::nullopt;
}

namespace {

struct Field {
  int64_t* out;
  int64_t count;
};

// Least-significant-first field order for each scheme (offset handled
// separately below).
void slice_fields(uint64_t v, Field* fields, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    *fields[i].out = int64_t(v % uint64_t(fields[i].count));
    v /= uint64_t(fields[i].count);
  }
}

uint64_t join_fields(const Field* fields, size_t n) {
  uint64_t v = 0;
  for (size_t i = n; i-- > 0;) {
    v = v * uint64_t(fields[i].count) + uint64_t(*fields[i].out);
  }
  return v;
}

}  // namespace

AddressParts map_address(uint64_t address, const DramGeometry& geo,
                         const MappingConfig& mapping) {
  if (address >= geo.total_bytes())
    throw InputError("address 0x" + std::to_string(address) +
                     " outside configured capacity");
  AddressParts p;
  int64_t channel = 0, rank = 0, bank = 0, row = 0, column = 0;
  const uint64_t v = address / kCachelineBytes;
  switch (mapping.scheme) {
    case MappingScheme::RowRankBankChannelColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&channel, geo.channels},
                   {&bank, geo.banks_per_rank},
                   {&rank, geo.ranks_per_channel},
                   {&row, geo.rows_per_bank}};
      slice_fields(v, f, 5);
      break;
    }
    case MappingScheme::RowRankChannelBankColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&bank, geo.banks_per_rank},
                   {&channel, geo.channels},
                   {&rank, geo.ranks_per_channel},
                   {&row, geo.rows_per_bank}};
      slice_fields(v, f, 5);
      break;
    }
    case MappingScheme::RowChannelBankRankColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&rank, geo.ranks_per_channel},
                   {&bank, geo.banks_per_rank},
                   {&channel, geo.channels},
                   {&row, geo.rows_per_bank}};
      slice_fields(v, f, 5);
      break;
    }
  }
  p.channel = int(channel);
  p.rank = int(rank);
  p.bank = int(bank);
  p.row = row;
  p.column = int(column);
  return p;
}

uint64_t compose_address(const AddressParts& parts, const DramGeometry& geo,
                         const MappingConfig& mapping) {
  int64_t channel = parts.channel, rank = parts.rank, bank = parts.bank,
          row = parts.row, column = parts.column;
  uint64_t v = 0;
  switch (mapping.scheme) {
    case MappingScheme::RowRankBankChannelColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&channel, geo.channels},
                   {&bank, geo.banks_per_rank},
                   {&rank, geo.ranks_per_channel},
                   {&row, geo.rows_per_bank}};
      v = join_fields(f, 5);
      break;
    }
    case MappingScheme::RowRankChannelBankColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&bank, geo.banks_per_rank},
                   {&channel, geo.channels},
                   {&rank, geo.ranks_per_channel},
                   {&row, geo.rows_per_bank}};
      v = join_fields(f, 5);
      break;
    }
    case MappingScheme::RowChannelBankRankColumn: {
      Field f[] = {{&column, geo.columns_per_row},
                   {&rank, geo.ranks_per_channel},
                   {&bank, geo.banks_per_rank},
                   {&channel, geo.channels},
                   {&row, geo.rows_per_bank}};
      v = join_fields(f, 5);
      break;
    }
  }
  return v * kCachelineBytes;
}

// ---------------------------------------------------------------------------
// Controller
// ---------------------------------------------------------------------------

const char* to_string(RowPolicy p) {
  return p == RowPolicy::OpenRow ? "open" : "closed";
}

std::optional<RowPolicy> row_policy_from_string(const std::string& s) {
  if (s == "open") return RowPolicy::OpenRow;
  if (s == "closed") return RowPolicy::ClosedRow;
  return std::nullopt;
}

void ControllerConfig::collect_problems(std::vector<std::string>& out) const {
  if (read_queue_size < 1) out.push_back("controller.read_queue must be >= 1");
  if (write_queue_size < 1) out.push_back("controller.write_queue must be >= 1");
  if (write_high_watermark < 1 || write_high_watermark > write_queue_size)
    out.push_back("controller.write_high_watermark must be in [1, write_queue]");
  if (write_low_watermark < 0 || write_low_watermark >= write_high_watermark)
    out.push_back("controller.write_low_watermark must be in [0, high)");
}

ChannelController::ChannelController(int channel, const ControllerConfig& cfg,
                                     DramSystem& dram, LatencyAdvisor& advisor,
                                     ControllerHooks& hooks,
                                     std::vector<ActTiming> variant_timings)
    : channel_(channel), cfg_(cfg), dram_(dram), advisor_(advisor),
      hooks_(hooks), variants_(std::move(variant_timings)) {
  standard_ = ActTiming{dram_.timing().trcd, dram_.timing().tras};
}

bool ChannelController::can_accept(ReqKind kind) const {
  if (kind == ReqKind::Read)
    return int(read_q_.size()) < cfg_.read_queue_size;
  return int(write_q_.size()) < cfg_.write_queue_size;
}

bool ChannelController::try_enqueue(MemoryRequest req) {
  if (!can_accept(req.kind)) return false;
  req.seq = next_seq_++;
  if (req.kind == ReqKind::Read)
    read_q_.push_back(req);
  else
    write_q_.push_back(req);
  return true;
}

DramCommand ChannelController::next_command_for(const MemoryRequest& req,
                                                Cycle now) const {
  const BankState& b = dram_.bank(channel_, req.parts.rank, req.parts.bank);
  DramCommand cmd;
  cmd.channel = channel_;
  cmd.rank = req.parts.rank;
  cmd.bank = req.parts.bank;
  cmd.issue_cycle = now;
  if (b.open_row) {
    if (*b.open_row == req.parts.row) {
      cmd.kind = req.kind == ReqKind::Read ? CommandKind::READ
                                           : CommandKind::WRITE;
      cmd.row = req.parts.row;
      cmd.column = req.parts.column;
    } else {
      cmd.kind = CommandKind::PRE;
    }
  } else {
    cmd.kind = CommandKind::ACT;
    cmd.row = req.parts.row;
  }
  return cmd;
}

std::optional<ChannelController::Candidate> ChannelController::pick_fr_fcfs(
    const std::deque<MemoryRequest>& q, Cycle now) const {
  std::optional<Candidate> oldest;
  for (size_t i = 0; i < q.size(); ++i) {
    const MemoryRequest& req = q[i];
    // A rank with a due refresh takes no new request commands.
    if (dram_.refresh_pending(channel_, req.parts.rank)) continue;
    DramCommand cmd = next_command_for(req, now);
    if (!dram_.can_issue_cmd(cmd, now)) continue;
    const bool hit =
        cmd.kind == CommandKind::READ || cmd.kind == CommandKind::WRITE;
    if (hit) return Candidate{i, cmd, true};  // oldest issuable row hit
    if (!oldest) oldest = Candidate{i, cmd, false};
  }
  return oldest;
}

bool ChannelController::any_pending_hit(int rank, int bank, int64_t row) const {
  for (const auto& r : read_q_)
    if (r.parts.rank == rank && r.parts.bank == bank && r.parts.row == row)
      return true;
  for (const auto& r : write_q_)
    if (r.parts.rank == rank && r.parts.bank == bank && r.parts.row == row)
      return true;
  return false;
}

void ChannelController::note_closed(
    const DramCommand& cmd, const std::vector<DramSystem::CloseEvent>& closed,
    Cycle now) {
  for (const auto& ev : closed) {
    AddressParts where;
    where.channel = channel_;
    where.rank = cmd.rank;
    where.bank = ev.bank;
    where.row = ev.row;
    advisor_.on_precharge(ev.core < 0 ? 0 : ev.core, where, now);
    hooks_.on_row_closed(cmd, ev.bank, ev.row, ev.core);
  }
}

bool ChannelController::refresh_duty(Cycle now) {
  const int ranks = dram_.geometry().ranks_per_channel;
  for (int r = 0; r < ranks; ++r) dram_.refresh_tick(channel_, r, now);

  for (int r = 0; r < ranks; ++r) {
    if (!dram_.refresh_pending(channel_, r)) continue;

    DramCommand ref;
    ref.kind = CommandKind::REF;
    ref.channel = channel_;
    ref.rank = r;
    ref.bank = -1;
    ref.issue_cycle = now;
    if (dram_.can_issue_cmd(ref, now)) {
      dram_.issue(ref, now, standard_, -1);
      hooks_.on_command(ref, nullptr, -1, -1);
      return true;
    }

    // Close open banks to make way for the REF.
    const RankState& rk = dram_.rank(channel_, r);
    int open = 0;
    for (int b = 0; b < dram_.geometry().banks_per_rank; ++b) {
      const BankPhase p = rk.banks[size_t(b)].phase_at(now, dram_.timing());
      if (p == BankPhase::Activating || p == BankPhase::Activated) open++;
    }
    if (open >= 2) {
      DramCommand prea;
      prea.kind = CommandKind::PREA;
      prea.channel = channel_;
      prea.rank = r;
      prea.bank = -1;
      prea.issue_cycle = now;
      if (dram_.can_issue_cmd(prea, now)) {
        auto closed = dram_.issue(prea, now, standard_, -1);
        hooks_.on_command(prea, nullptr, -1, -1);
        note_closed(prea, closed, now);
        return true;
      }
    }
    for (int b = 0; b < dram_.geometry().banks_per_rank; ++b) {
      const BankPhase p = rk.banks[size_t(b)].phase_at(now, dram_.timing());
      if (p != BankPhase::Activating && p != BankPhase::Activated) continue;
      DramCommand pre;
      pre.kind = CommandKind::PRE;
      pre.channel = channel_;
      pre.rank = r;
      pre.bank = b;
      pre.issue_cycle = now;
      if (dram_.can_issue_cmd(pre, now)) {
        auto closed = dram_.issue(pre, now, standard_, -1);
        hooks_.on_command(pre, nullptr, -1, -1);
        note_closed(pre, closed, now);
        return true;
      }
    }
  }
  return false;
}

bool ChannelController::closed_row_duty(Cycle now) {
  const auto& geo = dram_.geometry();
  for (int r = 0; r < geo.ranks_per_channel; ++r) {
    if (dram_.refresh_pending(channel_, r)) continue;  // refresh owns the rank
    for (int b = 0; b < geo.banks_per_rank; ++b) {
      const BankState& bs = dram_.bank(channel_, r, b);
      const BankPhase p = bs.phase_at(now, dram_.timing());
      if (p != BankPhase::Activating && p != BankPhase::Activated) continue;
      if (any_pending_hit(r, b, *bs.open_row)) continue;
      DramCommand pre;
      pre.kind = CommandKind::PRE;
      pre.channel = channel_;
      pre.rank = r;
      pre.bank = b;
      pre.issue_cycle = now;
      if (!dram_.can_issue_cmd(pre, now)) continue;
      auto closed = dram_.issue(pre, now, standard_, -1);
      hooks_.on_command(pre, nullptr, -1, -1);
      note_closed(pre, closed, now);
      return true;
    }
  }
  return false;
}

void ChannelController::issue_for_request(std::deque<MemoryRequest>& q,
                                          size_t index, const DramCommand& cmd,
                                          Cycle now) {
  MemoryRequest& req = q[index];
  switch (cmd.kind) {
    case CommandKind::ACT: {
      const AdvisorVerdict v = advisor_.on_activate(req.core_id, req.parts, now);
      const int row = v.reduced_row.value_or(-1);
      const ActTiming at = v.hit() ? variants_[size_t(row)] : standard_;
      dram_.issue(cmd, now, at, req.core_id);
      hooks_.on_command(cmd, &at, row, req.core_id);
      break;
    }
    case CommandKind::PRE: {
      auto closed = dram_.issue(cmd, now, standard_, req.core_id);
      hooks_.on_command(cmd, nullptr, -1, req.core_id);
      note_closed(cmd, closed, now);
      break;
    }
    case CommandKind::READ: {
      dram_.issue(cmd, now, standard_, req.core_id);
      hooks_.on_command(cmd, nullptr, -1, req.core_id);
      req.completion = now + dram_.timing().tcl + dram_.timing().tbl;
      max_request_latency_ =
          std::max(max_request_latency_, *req.completion - req.arrival);
      min_read_latency_ =
          std::min(min_read_latency_, *req.completion - req.arrival);
      requests_served_++;
      hooks_.on_read_done(req, *req.completion);
      q.erase(q.begin() + long(index));
      break;
    }
    case CommandKind::WRITE: {
      dram_.issue(cmd, now, standard_, req.core_id);
      hooks_.on_command(cmd, nullptr, -1, req.core_id);
      max_request_latency_ = std::max(max_request_latency_, now - req.arrival);
      requests_served_++;
      hooks_.on_write_done(req, now);
      q.erase(q.begin() + long(index));
      break;
    }
    default:
      throw InternalError("unexpected request command kind");
  }
}

void ChannelController::tick(Cycle now) {
  if (refresh_duty(now)) return;
  if (cfg_.policy == RowPolicy::ClosedRow && closed_row_duty(now)) return;

  if (int(write_q_.size()) >= cfg_.write_high_watermark)
    draining_writes_ = true;
  else if (int(write_q_.size()) <= cfg_.write_low_watermark)
    draining_writes_ = false;

  const bool serve_writes = draining_writes_ || read_q_.empty();
  auto& q = serve_writes ? write_q_ : read_q_;
  if (auto cand = pick_fr_fcfs(q, now))
    issue_for_request(q, cand->index, cand->cmd, now);
}

}  // namespace ccsim
