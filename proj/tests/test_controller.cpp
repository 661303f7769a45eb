#include "doctest.h"

#include "ccsim/controller.hpp"
#include "ccsim/trace.hpp"

using namespace ccsim;

// ---------------------------------------------------------------------------
// Address mapping
// ---------------------------------------------------------------------------

namespace {

DramGeometry paper_geometry() {
  DramGeometry g;
  g.channels = 2;
  return g;  // 2 ch, 1 rank, 8 banks, 64K rows, 128 columns
}

}  // namespace

TEST_CASE("address zero decomposes to all-zero coordinates") {
  const DramGeometry g = paper_geometry();
  const MappingConfig m;
  CHECK(map_address(0, g, m) == AddressParts{0, 0, 0, 0, 0});
}

TEST_CASE("row stride under the documented layout") {
  // row : rank : bank : channel : column : offset, so one row step is
  // ranks * banks * channels * columns * 64 bytes.
  const DramGeometry g = paper_geometry();
  const MappingConfig m;
  const uint64_t row_stride = uint64_t(g.ranks_per_channel) * g.banks_per_rank *
                              g.channels * g.columns_per_row * kCachelineBytes;
  CHECK(row_stride == 131072);
  const AddressParts a = map_address(1234 * kCachelineBytes, g, m);
  const AddressParts b = map_address(1234 * kCachelineBytes + row_stride, g, m);
  CHECK(b.row == a.row + 1);
  CHECK(b.bank == a.bank);
  CHECK(b.rank == a.rank);
  CHECK(b.channel == a.channel);
  CHECK(b.column == a.column);
}

TEST_CASE("addresses differing only in bank bits share the row id") {
  const DramGeometry g = paper_geometry();
  const MappingConfig m;
  const uint64_t bank_stride =
      uint64_t(g.channels) * g.columns_per_row * kCachelineBytes;
  const AddressParts a = map_address(77 * kCachelineBytes, g, m);
  const AddressParts b = map_address(77 * kCachelineBytes + bank_stride, g, m);
  CHECK(a.row == b.row);
  CHECK(a.channel == b.channel);
  CHECK(b.bank == a.bank + 1);
}

TEST_CASE("mapping is a bijection for every scheme") {
  const DramGeometry g = paper_geometry();
  Rng rng(7);
  for (auto scheme : {MappingScheme::RowRankBankChannelColumn,
                      MappingScheme::RowRankChannelBankColumn,
                      MappingScheme::RowChannelBankRankColumn}) {
    MappingConfig m{scheme};
    for (int i = 0; i < 2000; ++i) {
      const uint64_t addr =
          rng.below(g.total_bytes() / kCachelineBytes) * kCachelineBytes;
      const AddressParts p = map_address(addr, g, m);
      CHECK(compose_address(p, g, m) == addr);
      CHECK(p.channel < g.channels);
      CHECK(p.bank < g.banks_per_rank);
      CHECK(p.row < g.rows_per_bank);
      CHECK(p.column < g.columns_per_row);
    }
  }
}

TEST_CASE("out-of-range addresses are rejected") {
  const DramGeometry g = paper_geometry();
  const MappingConfig m;
  CHECK_THROWS_AS(map_address(g.total_bytes(), g, m), InputError);
  CHECK_NOTHROW(map_address(g.total_bytes() - kCachelineBytes, g, m));
}

// ---------------------------------------------------------------------------
// FR-FCFS scheduling
// ---------------------------------------------------------------------------

namespace {

struct Recorder final : ControllerHooks {
  struct Cmd {
    DramCommand cmd;
    int reduced_row;
    int core;
  };
  std::vector<Cmd> cmds;
  std::vector<std::pair<MemoryRequest, Cycle>> reads_done;
  std::vector<MemoryRequest> writes_done;

  void on_command(const DramCommand& c, const ActTiming*, int reduced_row,
                  int core) override {
    cmds.push_back({c, reduced_row, core});
  }
  void on_read_done(const MemoryRequest& r, Cycle done) override {
    reads_done.push_back({r, done});
  }
  void on_write_done(const MemoryRequest& r, Cycle issue) override {
    writes_done.push_back(r);
    (void)issue;
  }
};

struct NullAdvisorForTest final : LatencyAdvisor {
  AdvisorVerdict on_activate(int, const AddressParts&, Cycle) override {
    stats_.activations++;
    return {};
  }
  void on_precharge(int, const AddressParts&, Cycle) override {
    inserts++;
  }
  void tick(Cycle) override {}
  AdvisorKind kind() const override { return AdvisorKind::None; }
  int inserts = 0;
};

struct Rig {
  DramGeometry geo;
  TimingParams timing;
  DramSystem dram;
  NullAdvisorForTest advisor;
  Recorder rec;
  ChannelController ctrl;

  explicit Rig(RowPolicy policy = RowPolicy::OpenRow, int read_q = 64)
      : geo(single_channel()), timing(TimingParams{}),
        dram(geo, timing, 1, timing.trefi * 8192 + timing.trefi, 8192),
        ctrl(0, config(policy, read_q), dram, advisor, rec, {ActTiming{7, 18}}) {}

  static DramGeometry single_channel() {
    DramGeometry g;
    g.channels = 1;
    return g;
  }
  static ControllerConfig config(RowPolicy policy, int read_q) {
    ControllerConfig c;
    c.policy = policy;
    c.read_queue_size = read_q;
    return c;
  }

  MemoryRequest req(ReqKind kind, int bank, int64_t row, Cycle arrival,
                    int core = 0, int column = 0) {
    MemoryRequest r;
    r.kind = kind;
    r.parts.bank = bank;
    r.parts.row = row;
    r.parts.column = column;
    r.core_id = core;
    r.arrival = arrival;
    return r;
  }

  // Runs the controller for `slots` bus slots starting at `from`.
  Cycle drive(Cycle from, Cycle slots) {
    for (Cycle i = 0; i < slots; ++i) ctrl.tick(from + i);
    return from + slots;
  }
};

}  // namespace

TEST_CASE("a row hit beats an older conflicting request") {
  Rig rig;
  // open row A in bank 0
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0));
  rig.drive(0, 1);
  REQUIRE(rig.rec.cmds.size() == 1);
  CHECK(rig.rec.cmds[0].cmd.kind == CommandKind::ACT);
  rig.drive(1, 11);  // READ at tRCD, request leaves the queue
  REQUIRE(rig.rec.cmds.size() == 2);
  CHECK(rig.rec.cmds[0].cmd.row == 100);

  // older request to a closed row B, younger row hit to open row A
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 200, 5));
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 9, 0, 3));
  rig.drive(12, 20);
  // the row hit is served first: READ(100) precedes any PRE for row 200
  bool saw_hit_read = false;
  for (const auto& c : rig.rec.cmds) {
    if (c.cmd.kind == CommandKind::READ && c.cmd.row == 100 &&
        c.cmd.issue_cycle >= 12)
      saw_hit_read = true;
    if (c.cmd.kind == CommandKind::PRE) CHECK(saw_hit_read);
  }
  CHECK(saw_hit_read);
}

TEST_CASE("two row hits are served oldest first") {
  Rig rig;
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0, 0, 1));
  rig.drive(0, 12);  // ACT + READ issued
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 20, 1, 2));
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 21, 2, 3));
  rig.drive(12, 30);
  std::vector<int> read_cores;
  for (const auto& c : rig.rec.cmds)
    if (c.cmd.kind == CommandKind::READ && c.cmd.issue_cycle >= 12)
      read_cores.push_back(c.core);
  REQUIRE(read_cores.size() == 2);
  CHECK(read_cores[0] == 1);
  CHECK(read_cores[1] == 2);
}

TEST_CASE("empty queues issue nothing") {
  Rig rig;
  rig.drive(0, 50);
  CHECK(rig.rec.cmds.empty());
}

TEST_CASE("command generation follows the bank state") {
  Rig rig;
  // precharged bank: ACT first
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 1, 7, 0));
  rig.drive(0, 1);
  CHECK(rig.rec.cmds.back().cmd.kind == CommandKind::ACT);
  rig.drive(1, 11);
  CHECK(rig.rec.cmds.back().cmd.kind == CommandKind::READ);
  // conflicting row: PRE (after tRAS), then ACT, then READ/WRITE
  rig.ctrl.try_enqueue(rig.req(ReqKind::Write, 1, 8, 12));
  rig.drive(12, 60);
  std::vector<CommandKind> kinds;
  for (const auto& c : rig.rec.cmds)
    if (c.cmd.issue_cycle >= 12) kinds.push_back(c.cmd.kind);
  REQUIRE(kinds.size() == 3);
  CHECK(kinds[0] == CommandKind::PRE);
  CHECK(kinds[1] == CommandKind::ACT);
  CHECK(kinds[2] == CommandKind::WRITE);
}

TEST_CASE("reads are prioritized until the write high watermark") {
  Rig rig;
  // 31 writes (below high watermark of 32) and one read: read goes first
  for (int i = 0; i < 31; ++i)
    rig.ctrl.try_enqueue(rig.req(ReqKind::Write, i % 8, 10 + i, 0, 0, 0));
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 500, 1));
  rig.drive(0, 1);
  CHECK(rig.rec.cmds[0].cmd.kind == CommandKind::ACT);
  CHECK(rig.rec.cmds[0].cmd.row == 500);

  // one more write trips the watermark: writes drain to the low mark
  rig.ctrl.try_enqueue(rig.req(ReqKind::Write, 7, 99, 2));
  Cycle now = rig.drive(1, 1);
  while (rig.ctrl.write_queue_depth() > 16 && now < 4000) now = rig.drive(now, 1);
  CHECK(rig.ctrl.write_queue_depth() == 16);
  CHECK(rig.ctrl.read_queue_depth() == 1);  // the read waited out the drain
  // after the drain the read is served again
  rig.drive(now, 200);
  CHECK(rig.ctrl.read_queue_depth() == 0);
}

TEST_CASE("closed-row policy precharges once no hit is pending") {
  Rig rig(RowPolicy::ClosedRow);
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0));
  Cycle now = rig.drive(0, 12);  // ACT@0, READ@11
  // queue is now empty; the bank must be precharged right at tRAS
  while (rig.dram.bank(0, 0, 0).open_row && now < 200) now = rig.drive(now, 1);
  bool saw_pre = false;
  for (const auto& c : rig.rec.cmds)
    if (c.cmd.kind == CommandKind::PRE) {
      saw_pre = true;
      CHECK(c.cmd.issue_cycle == rig.timing.tras);  // first legal cycle
    }
  CHECK(saw_pre);
  CHECK(rig.advisor.inserts == 1);
}

TEST_CASE("open-row policy keeps the row open with no pending requests") {
  Rig rig(RowPolicy::OpenRow);
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0));
  rig.drive(0, 100);
  REQUIRE(rig.dram.bank(0, 0, 0).open_row.has_value());
  CHECK(*rig.dram.bank(0, 0, 0).open_row == 100);
}

TEST_CASE("closed-row policy waits for a queued hit before precharging") {
  Rig rig(RowPolicy::ClosedRow);
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0, 0, 1));
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0, 0, 2));
  rig.drive(0, 16);  // ACT, READ, READ (data bus gap), no PRE yet
  int reads = 0;
  for (const auto& c : rig.rec.cmds) {
    CHECK(c.cmd.kind != CommandKind::PRE);
    if (c.cmd.kind == CommandKind::READ) reads++;
  }
  CHECK(reads == 2);
}

TEST_CASE("queue capacity is enforced") {
  Rig rig(RowPolicy::OpenRow, 2);
  CHECK(rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 1, 0)));
  CHECK(rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 2, 0)));
  CHECK_FALSE(rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 3, 0)));
  CHECK(rig.ctrl.can_accept(ReqKind::Write));
}

TEST_CASE("refresh uses PREA when several banks are open") {
  Rig rig;
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0));
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 1, 200, 0));
  Cycle now = rig.drive(0, 20);  // both rows opened and read
  CHECK(rig.dram.bank(0, 0, 0).open_row.has_value());
  CHECK(rig.dram.bank(0, 0, 1).open_row.has_value());
  now = rig.drive(now, rig.timing.trefi);
  bool saw_prea = false, saw_ref = false;
  Cycle prea_cycle = -1;
  for (const auto& c : rig.rec.cmds) {
    if (c.cmd.kind == CommandKind::PREA) {
      saw_prea = true;
      prea_cycle = c.cmd.issue_cycle;
    }
    if (c.cmd.kind == CommandKind::REF && saw_prea) {
      saw_ref = true;
      CHECK(c.cmd.issue_cycle >= prea_cycle + rig.timing.trp);
    }
  }
  CHECK(saw_prea);
  CHECK(saw_ref);
  CHECK(rig.advisor.inserts == 2);  // both closed rows entered the advisor
}

TEST_CASE("refresh takes over the rank and the advisor sees forced closes") {
  Rig rig;
  // keep a stream of row hits alive in bank 0 across the first tREFI
  const Cycle due = rig.timing.trefi;
  rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, 0));
  Cycle now = rig.drive(0, 12);
  for (int i = 0; now < due + 400; ++i) {
    if (rig.ctrl.read_queue_depth() < 2)
      rig.ctrl.try_enqueue(rig.req(ReqKind::Read, 0, 100, now, 0, i % 64));
    now = rig.drive(now, 1);
  }
  bool saw_ref = false;
  Cycle pre_cycle = -1, ref_cycle = -1;
  for (const auto& c : rig.rec.cmds) {
    if (c.cmd.kind == CommandKind::PRE && ref_cycle < 0)
      pre_cycle = c.cmd.issue_cycle;
    if (c.cmd.kind == CommandKind::REF && !saw_ref) {
      saw_ref = true;
      ref_cycle = c.cmd.issue_cycle;
    }
  }
  REQUIRE(saw_ref);
  // the forced PRE lands between the due time and the REF
  CHECK(pre_cycle >= due);
  CHECK(pre_cycle < ref_cycle);
  CHECK(ref_cycle >= pre_cycle + rig.timing.trp);
}
