#include "doctest.h"

#include "ccsim/core.hpp"

using namespace ccsim;

namespace {

// Memory stub: reads complete instantly (ready before the next tick),
// writes always accepted. Records submit cycles.
struct InstantMemory final : CoreMemory {
  Core* core = nullptr;
  std::vector<Cycle> read_cycles;
  std::vector<Cycle> write_cycles;
  bool accept_reads = true;
  bool accept_writes = true;

  bool submit_read(int, uint64_t, uint64_t token, Cycle now) override {
    if (!accept_reads) return false;
    read_cycles.push_back(now);
    core->on_read_complete(token);
    return true;
  }
  bool submit_write(int, uint64_t, Cycle now) override {
    if (!accept_writes) return false;
    write_cycles.push_back(now);
    return true;
  }
};

// Never completes a read.
struct BlackHoleMemory final : CoreMemory {
  int reads = 0;
  bool submit_read(int, uint64_t, uint64_t, Cycle) override {
    reads++;
    return true;
  }
  bool submit_write(int, uint64_t, Cycle) override { return true; }
};

CoreParams params(int width = 3, int window = 128, int mshrs = 8,
                  int64_t quota = 0) {
  CoreParams p;
  p.issue_width = width;
  p.window_capacity = window;
  p.mshr_capacity = mshrs;
  p.quota = quota;
  return p;
}

}  // namespace

TEST_CASE("six bubbles at width 3 take two cycles, the read issues on the third") {
  Core core(0, params(), {{6, false, 0x1000}});
  InstantMemory mem;
  mem.core = &core;
  for (Cycle c = 1; c <= 3; ++c) core.tick(c, mem);
  REQUIRE(mem.read_cycles.size() == 1);
  CHECK(mem.read_cycles[0] == 3);
}

TEST_CASE("a ninth outstanding read stalls on the MSHRs") {
  std::vector<TraceRecord> trace;
  for (int i = 0; i < 9; ++i) trace.push_back({0, false, uint64_t(i) * 64});
  Core core(0, params(3, 128, 8), trace);
  BlackHoleMemory mem;
  for (Cycle c = 1; c <= 20; ++c) core.tick(c, mem);
  CHECK(mem.reads == 8);
  CHECK(core.outstanding_reads() == 8);
}

TEST_CASE("writes retire at dispatch without waiting") {
  Core core(0, params(), {{0, true, 0x40}, {0, true, 0x80}});
  InstantMemory mem;
  mem.core = &core;
  core.tick(1, mem);
  CHECK(core.retired_total() == 2);
  CHECK(mem.write_cycles.size() == 2);
  CHECK(core.outstanding_reads() == 0);
}

TEST_CASE("a full write queue stalls the core") {
  Core core(0, params(), {{0, true, 0x40}});
  InstantMemory mem;
  mem.core = &core;
  mem.accept_writes = false;
  for (Cycle c = 1; c <= 5; ++c) core.tick(c, mem);
  CHECK(core.retired_total() == 0);
  mem.accept_writes = true;
  core.tick(6, mem);
  CHECK(core.retired_total() == 1);
  CHECK(core.finished());
}

TEST_CASE("instruction conservation: retired = bubbles + memory records") {
  std::vector<TraceRecord> trace;
  int64_t bubbles = 0;
  for (int i = 0; i < 200; ++i) {
    const int64_t b = (i * 7) % 11;
    trace.push_back({b, i % 3 == 0, uint64_t(i) * 64});
    bubbles += b;
  }
  Core core(0, params(), trace);
  InstantMemory mem;
  mem.core = &core;
  Cycle c = 1;
  while (!core.finished() && c < 100000) core.tick(c++, mem);
  REQUIRE(core.finished());
  CHECK(core.retired_total() == bubbles + 200);
  CHECK(core.memory_records_issued() == 200);
}

TEST_CASE("IPC approaches the issue width with instant memory") {
  // bubble-heavy trace: 100k+ instructions, sparse reads
  std::vector<TraceRecord> trace;
  for (int i = 0; i < 100; ++i) trace.push_back({999, false, uint64_t(i) * 64});
  Core core(0, params(3), trace);
  InstantMemory mem;
  mem.core = &core;
  Cycle c = 1;
  while (!core.finished() && c < 200000) core.tick(c++, mem);
  REQUIRE(core.finished());
  const double ipc = double(core.retired_total()) / double(core.finish_cycle());
  CHECK(ipc > 3.0 * 0.99);
  CHECK(ipc <= 3.0);
}

TEST_CASE("quota mode replays the trace until the quota is met") {
  std::vector<TraceRecord> trace = {{3, false, 0x40}, {2, true, 0x80}};
  Core core(0, params(3, 128, 8, 1000), trace);
  InstantMemory mem;
  mem.core = &core;
  Cycle c = 1;
  while (!core.finished() && c < 100000) core.tick(c++, mem);
  REQUIRE(core.finished());
  CHECK(core.retired_measured() >= 1000);
  CHECK(core.trace_passes() > 1);
}

TEST_CASE("an empty trace finishes immediately") {
  Core core(0, params(), {});
  CHECK(core.finished());
}

TEST_CASE("measurement reset zeroes counters but keeps progress") {
  std::vector<TraceRecord> trace;
  for (int i = 0; i < 1000; ++i) trace.push_back({5, false, uint64_t(i) * 64});
  Core core(0, params(3, 128, 8, 60), trace);
  core.set_measuring(false);
  InstantMemory mem;
  mem.core = &core;
  for (Cycle c = 1; c <= 50; ++c) core.tick(c, mem);
  const int64_t before = core.retired_total();
  CHECK(before > 60);
  CHECK_FALSE(core.finished());  // quota ignored while not measuring
  core.reset_measurement(50);
  CHECK(core.retired_measured() == 0);
  CHECK(core.retired_total() == before);
  Cycle c = 51;
  while (!core.finished() && c < 10000) core.tick(c++, mem);
  REQUIRE(core.finished());
  CHECK(core.retired_measured() >= 60);
}
