#include "ccsim/validator.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ccsim {

namespace {

// Replay bookkeeping deliberately separate from the simulator's BankState.
struct VBank {
  bool open = false;
  int64_t row = -1;
  Cycle act = 0;
  Cycle trcd = 0;
  Cycle tras = 0;
  bool had_pre = false;
  Cycle pre = 0;
};

struct VRank {
  std::vector<VBank> banks;
  bool had_ref = false;
  Cycle ref_end = 0;  // exclusive
  uint64_t refs_seen = 0;
};

struct VChannel {
  std::vector<VRank> ranks;
  bool had_cmd = false;
  Cycle last_cmd = 0;
  Cycle data_end = 0;
};

}  // namespace

std::vector<LogViolation> validate_command_log(const CommandLog& log,
                                               size_t max_violations) {
  std::vector<LogViolation> out;
  const auto& geo = log.geometry;
  const auto& t = log.timing;

  std::vector<VChannel> channels(size_t(geo.channels));
  for (auto& ch : channels) {
    ch.ranks.resize(size_t(geo.ranks_per_channel));
    for (auto& rk : ch.ranks) rk.banks.resize(size_t(geo.banks_per_rank));
  }

  Cycle prev_cycle = kNever;
  for (size_t i = 0; i < log.records.size(); ++i) {
    if (out.size() >= max_violations) break;
    const auto& r = log.records[i];
    auto flag = [&](const std::string& what) {
      out.push_back({i, r.cycle, what});
    };

    if (r.cycle < prev_cycle) flag("records out of cycle order");
    prev_cycle = r.cycle;
    if (r.cycle % log.clock_ratio != 0) flag("command off the bus-slot grid");
    if (r.channel < 0 || r.channel >= geo.channels ||
        r.rank < 0 || r.rank >= geo.ranks_per_channel) {
      flag("channel/rank out of range");
      continue;
    }

    VChannel& ch = channels[size_t(r.channel)];
    VRank& rk = ch.ranks[size_t(r.rank)];

    if (ch.had_cmd && ch.last_cmd == r.cycle)
      flag("two commands on one channel in one bus slot");
    ch.had_cmd = true;
    ch.last_cmd = r.cycle;

    if (rk.had_ref && r.cycle < rk.ref_end)
      flag("tRFC: command to rank " + std::to_string(r.rank) + " " +
           std::to_string(rk.ref_end - r.cycle) + " cycles early");

    const bool needs_bank = r.kind == CommandKind::ACT ||
                            r.kind == CommandKind::PRE ||
                            r.kind == CommandKind::READ ||
                            r.kind == CommandKind::WRITE;
    if (needs_bank && (r.bank < 0 || r.bank >= geo.banks_per_rank)) {
      flag("bank out of range");
      continue;
    }

    switch (r.kind) {
      case CommandKind::ACT: {
        VBank& b = rk.banks[size_t(r.bank)];
        if (b.open) flag("ACT on bank with open row");
        if (b.had_pre && r.cycle - b.pre < t.trp)
          flag("tRP: ACT " + std::to_string(t.trp - (r.cycle - b.pre)) +
               " cycles early");
        if (r.row < 0 || r.row >= geo.rows_per_bank) flag("ACT row out of range");
        if (r.act_trcd < 1 || r.act_tras < r.act_trcd)
          flag("ACT carries a malformed timing variant");
        b.open = true;
        b.row = r.row;
        b.act = r.cycle;
        b.trcd = r.act_trcd;
        b.tras = r.act_tras;
        break;
      }
      case CommandKind::READ:
      case CommandKind::WRITE: {
        VBank& b = rk.banks[size_t(r.bank)];
        if (!b.open) {
          flag("column access with no open row");
          break;
        }
        if (r.row >= 0 && b.row != r.row) flag("column access to non-open row");
        if (r.cycle - b.act < b.trcd)
          flag("tRCD: column access " +
               std::to_string(b.trcd - (r.cycle - b.act)) + " cycles early");
        const Cycle start =
            r.cycle + (r.kind == CommandKind::READ ? t.tcl : t.tcwl);
        if (start < ch.data_end) flag("data bus overlap");
        ch.data_end = start + t.tbl;
        break;
      }
      case CommandKind::PRE: {
        VBank& b = rk.banks[size_t(r.bank)];
        if (!b.open) {
          flag("PRE on bank with no open row");
          break;
        }
        if (r.cycle - b.act < b.tras)
          flag("tRAS: PRE " + std::to_string(b.tras - (r.cycle - b.act)) +
               " cycles early");
        b.open = false;
        b.had_pre = true;
        b.pre = r.cycle;
        break;
      }
      case CommandKind::PREA: {
        for (auto& b : rk.banks) {
          if (!b.open) continue;
          if (r.cycle - b.act < b.tras)
            flag("tRAS: PREA " + std::to_string(b.tras - (r.cycle - b.act)) +
                 " cycles early");
          b.open = false;
          b.had_pre = true;
          b.pre = r.cycle;
        }
        break;
      }
      case CommandKind::REF: {
        for (const auto& b : rk.banks)
          if (b.open) {
            flag("REF with open bank");
            break;
          }
        // cadence: REF #n is due at (n+1)*tREFI and must not be deferred
        // past the postponement bound
        const Cycle due = Cycle(rk.refs_seen + 1) * t.trefi;
        if (r.cycle < due) flag("tREFI: REF issued before it was due");
        if (r.cycle > due + log.refresh_deferral_bound * t.trefi)
          flag("tREFI: REF deferred past the postponement bound");
        rk.refs_seen++;
        rk.had_ref = true;
        rk.ref_end = r.cycle + t.trfc;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

void write_command_log(std::ostream& out, const CommandLog& log) {
  out << "# ccsim-cmdlog v1\n";
  out << "ratio " << log.clock_ratio << "\n";
  const auto& g = log.geometry;
  out << "geometry " << g.channels << " " << g.ranks_per_channel << " "
      << g.banks_per_rank << " " << g.rows_per_bank << " " << g.columns_per_row
      << "\n";
  const auto& t = log.timing;
  out << "timing " << t.trcd << " " << t.tras << " " << t.trp << " " << t.tcl
      << " " << t.tcwl << " " << t.tbl << " " << t.trfc << " " << t.trefi
      << "\n";
  out << "measure_from " << log.measure_from << "\n";
  out << "records " << log.records.size() << "\n";
  for (const auto& r : log.records) {
    out << r.cycle << " " << to_string(r.kind) << " " << r.channel << " "
        << r.rank << " " << r.bank << " " << r.row << " " << r.column << " "
        << r.act_trcd << " " << r.act_tras << " " << r.reduced_row << " "
        << r.core << "\n";
  }
}

CommandLog read_command_log(std::istream& in, const std::string& name) {
  CommandLog log;
  std::string line;
  size_t lineno = 0;
  auto fail = [&](const std::string& why) -> void {
    throw InputError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  size_t expected = 0;
  bool have_records_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (!have_records_header) {
      if (tag == "ratio") {
        if (!(is >> log.clock_ratio)) fail("bad ratio line");
      } else if (tag == "geometry") {
        auto& g = log.geometry;
        if (!(is >> g.channels >> g.ranks_per_channel >> g.banks_per_rank >>
              g.rows_per_bank >> g.columns_per_row))
          fail("bad geometry line");
        g.row_buffer_bytes = g.columns_per_row * kCachelineBytes;
      } else if (tag == "timing") {
        auto& t = log.timing;
        if (!(is >> t.trcd >> t.tras >> t.trp >> t.tcl >> t.tcwl >> t.tbl >>
              t.trfc >> t.trefi))
          fail("bad timing line");
      } else if (tag == "measure_from") {
        if (!(is >> log.measure_from)) fail("bad measure_from line");
      } else if (tag == "records") {
        if (!(is >> expected)) fail("bad records line");
        have_records_header = true;
        log.records.reserve(expected);
      } else {
        fail("unknown header line '" + tag + "'");
      }
      continue;
    }
    CommandRecord r;
    std::string kind;
    std::istringstream rs(line);
    if (!(rs >> r.cycle >> kind >> r.channel >> r.rank >> r.bank >> r.row >>
          r.column >> r.act_trcd >> r.act_tras >> r.reduced_row >> r.core))
      fail("malformed record");
    auto k = command_kind_from_string(kind);
    if (!k) fail("unknown command kind '" + kind + "'");
    r.kind = *k;
    log.records.push_back(r);
  }
  if (!have_records_header) {
    lineno = 0;
    fail("missing records header");
  }
  if (log.records.size() != expected) {
    lineno = 0;
    fail("record count mismatch: header says " + std::to_string(expected) +
         ", got " + std::to_string(log.records.size()));
  }
  return log;
}

CommandLog read_command_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open command log: " + path);
  return read_command_log(in, path);
}

EventLog event_log_from_command_log(const CommandLog& log) {
  EventLog out;
  out.measure_from = log.measure_from;
  const auto& geo = log.geometry;
  // open row per (channel, rank, bank); -1 = closed
  std::vector<int64_t> open(size_t(geo.channels) * size_t(geo.ranks_per_channel) *
                                size_t(geo.banks_per_rank),
                            -1);
  auto slot = [&](int ch, int rk, int b) -> int64_t& {
    return open[(size_t(ch) * size_t(geo.ranks_per_channel) + size_t(rk)) *
                    size_t(geo.banks_per_rank) +
                size_t(b)];
  };
  for (const auto& r : log.records) {
    switch (r.kind) {
      case CommandKind::ACT:
        slot(r.channel, r.rank, r.bank) = r.row;
        out.events.push_back({r.cycle, RowEventKind::Act, int16_t(r.channel),
                              int16_t(r.rank), int16_t(r.bank), r.row});
        break;
      case CommandKind::PRE: {
        int64_t& row = slot(r.channel, r.rank, r.bank);
        if (row >= 0)
          out.events.push_back({r.cycle, RowEventKind::Pre, int16_t(r.channel),
                                int16_t(r.rank), int16_t(r.bank), row});
        row = -1;
        break;
      }
      case CommandKind::PREA: {
        for (int b = 0; b < geo.banks_per_rank; ++b) {
          int64_t& row = slot(r.channel, r.rank, b);
          if (row >= 0)
            out.events.push_back({r.cycle, RowEventKind::Pre,
                                  int16_t(r.channel), int16_t(r.rank),
                                  int16_t(b), row});
          row = -1;
        }
        break;
      }
      default:
        break;
    }
  }
  return out;
}

}  // namespace ccsim
