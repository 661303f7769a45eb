#include "doctest.h"

#include "ccsim/config.hpp"

using namespace ccsim;

TEST_CASE("defaults carry the DDR3-1600 system configuration") {
  RunConfig c;
  CHECK(c.timing.trcd == 11);
  CHECK(c.timing.tras == 28);
  CHECK(c.timing.trp == 11);
  CHECK(c.timing.bus_freq_mhz == 800);
  CHECK(c.cpu_freq_mhz == 4000);
  CHECK(c.clock_ratio() == 5);
  CHECK(c.geometry.banks_per_rank == 8);
  CHECK(c.geometry.rows_per_bank == 65536);
  CHECK(c.geometry.row_buffer_bytes == 8192);
  CHECK(c.controller.read_queue_size == 64);
  CHECK(c.controller.write_queue_size == 64);
  CHECK(c.advisor.entries == 128);
  CHECK(c.advisor.ways == 2);
  CHECK(c.advisor.duration_ms == 1.0);
  CHECK(c.core.issue_width == 3);
  CHECK(c.core.window_capacity == 128);
  CHECK(c.core.mshr_capacity == 8);
  CHECK(c.problems().empty());
}

TEST_CASE("serialize/parse round-trip reproduces the config") {
  RunConfig c;
  c.cores = 8;
  c.geometry.channels = 2;
  c.advisor.kind = AdvisorKind::ChargeCacheNuat;
  c.advisor.entries = 256;
  c.controller.policy = RowPolicy::ClosedRow;
  c.workload = {parse_trace_source("gen:bank_conflict,length=5000,rows=3"),
                parse_trace_source("file:/tmp/some.trace")};
  c.alone_ipc = {0.5, 0.25};
  c.seed = 99;
  // two sources for eight cores is invalid; make them match
  c.workload.resize(1);
  c.alone_ipc = {0.5, 0.25, 0.5, 0.25, 0.5, 0.25, 0.5, 0.25};

  const RunConfig back = parse_config(c.serialize());
  CHECK(back == c);
  CHECK(back.serialize() == c.serialize());
}

TEST_CASE("validation reports every violated constraint at once") {
  const char* text =
      "[geometry]\n"
      "channels = 0\n"
      "rows_per_bank = 1000\n"
      "[timing]\n"
      "trcd = 20\n"
      "tras = 5\n"
      "[cores]\n"
      "cpu_freq_mhz = 900\n";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() >= 4);
    bool saw_channels = false, saw_rows = false, saw_tras = false,
         saw_ratio = false;
    for (const auto& p : e.problems()) {
      if (p.find("channels") != std::string::npos) saw_channels = true;
      if (p.find("rows_per_bank") != std::string::npos) saw_rows = true;
      if (p.find("tras") != std::string::npos) saw_tras = true;
      if (p.find("multiple of bus_freq_mhz") != std::string::npos)
        saw_ratio = true;
    }
    CHECK(saw_channels);
    CHECK(saw_rows);
    CHECK(saw_tras);
    CHECK(saw_ratio);
  }
}

TEST_CASE("unknown sections and keys are rejected with line numbers") {
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[timing]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[timing]\ntrcd eleven\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("x = 1\n"), ConfigError);
}

TEST_CASE("reduction table rows in a config replace the defaults") {
  const char* text =
      "[reduction_table]\n"
      "baseline = 13.75 35\n"
      "row = 2 8 22\n"
      "row = 8 9 24\n";
  const RunConfig c = parse_config(text);
  REQUIRE(c.reduction.rows.size() == 2);
  CHECK(c.reduction.rows[0].duration_ms == 2.0);
  CHECK(c.reduction.rows[1].duration_ms == 8.0);
  // default advisor duration 1 ms no longer matches a row, but the
  // default advisor kind (none) does not use the table
  CHECK(c.advisor.kind == AdvisorKind::None);
}

TEST_CASE("advisor duration must match a table row when the table is used") {
  RunConfig c;
  c.advisor.kind = AdvisorKind::ChargeCache;
  c.advisor.duration_ms = 2.0;
  const auto problems = c.problems();
  bool found = false;
  for (const auto& p : problems)
    if (p.find("duration_ms") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("baseline table row must agree with the cycle timing parameters") {
  RunConfig c;
  c.reduction.baseline_trcd_ns = 10.0;  // converts to 8 cycles, not 11
  const auto problems = c.problems();
  bool found = false;
  for (const auto& p : problems)
    if (p.find("baseline tRCD") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("overrides apply on top of a parsed config") {
  RunConfig c;
  apply_override(c, "advisor.kind=lldram");
  apply_override(c, "cores.count=4");
  apply_override(c, "sim.seed=77");
  CHECK(c.advisor.kind == AdvisorKind::LlDram);
  CHECK(c.cores == 4);
  CHECK(c.seed == 77);
  CHECK_THROWS_AS(apply_override(c, "advisor.bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nonsense"), ConfigError);
}

TEST_CASE("workload sources parse files and generators") {
  const RunConfig c = parse_config(
      "[workload]\n"
      "core = gen:stream,length=100,bubbles=8\n");
  REQUIRE(c.workload.size() == 1);
  CHECK_FALSE(c.workload[0].is_file());
  CHECK(c.workload[0].spec_string() == "gen:stream,length=100,bubbles=8");

  const RunConfig f = parse_config(
      "[workload]\n"
      "core = file:/tmp/a.trace\n");
  CHECK(f.workload[0].is_file());
  CHECK_THROWS_AS(parse_config("[workload]\ncore = nonsense\n"), ConfigError);
}

TEST_CASE("one workload source fans out to all cores") {
  RunConfig c;
  c.cores = 4;
  const auto per_core = c.workload_per_core();
  CHECK(per_core.size() == 4);
}

TEST_CASE("a refresh wheel slower than retention is rejected") {
  RunConfig c;
  c.retention_ms = 32.0;  // the 8192-group wheel needs ~64 ms
  const auto problems = c.problems();
  bool found = false;
  for (const auto& p : problems)
    if (p.find("retention") != std::string::npos) found = true;
  CHECK(found);
}
