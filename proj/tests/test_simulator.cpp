#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "ccsim/simulator.hpp"
#include "ccsim/sweep.hpp"

using namespace ccsim;

namespace {

RunConfig base_config(const std::string& workload, int64_t quota = 10000,
                      Cycle warmup = 50000) {
  RunConfig c;
  c.workload = {parse_trace_source(workload)};
  c.core.quota = quota;
  c.warmup_cycles = warmup;
  c.validate_run = true;  // replay every test run through the validator
  return c;
}

}  // namespace

TEST_CASE("identical config and seed produce byte-identical reports") {
  const RunConfig c =
      base_config("gen:row_reuse,length=20000,bubbles=6,p=0.7,window=24,universe=2048");
  const SimReport a = run_simulate(c);
  const SimReport b = run_simulate(c);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.state_hash == b.state_hash);
}

TEST_CASE("two runs with the same warm-up agree on the post-warm-up state hash") {
  const RunConfig c =
      base_config("gen:row_reuse,length=20000,bubbles=6,p=0.7,window=24,universe=2048");
  const SimOutputs a = run_simulation(c);
  const SimOutputs b = run_simulation(c);
  CHECK(a.boundary_state_hash == b.boundary_state_hash);
  CHECK(a.boundary_state_hash != 0);
}

TEST_CASE("statistics restart at the warm-up boundary, state does not") {
  RunConfig warm =
      base_config("gen:row_reuse,length=30000,bubbles=6,p=0.8,window=16,universe=512",
                  8000, 100000);
  warm.advisor.kind = AdvisorKind::ChargeCache;
  const SimOutputs out = run_simulation(warm);
  // warm-up activity exists in the log but not in the measured counters
  uint64_t warmup_acts = 0;
  for (const auto& r : out.command_log.records)
    if (r.kind == CommandKind::ACT && r.cycle < out.command_log.measure_from)
      warmup_acts++;
  CHECK(warmup_acts > 0);
  CHECK(out.report.commands.act < warmup_acts + out.report.activations);
  CHECK(out.report.activations == out.report.commands.act);
  // a warmed HCRAC keeps hitting right after the boundary
  CHECK(out.report.hit_rate > 0.0);
}

TEST_CASE("zero warm-up equals measuring from cycle zero") {
  RunConfig c = base_config("gen:stream,length=5000,bubbles=4", 4000, 0);
  const SimReport r = run_simulate(c);
  CHECK(r.warmup_cycles == 0);
  CHECK(r.measured_cycles > 0);
  CHECK(r.ipc[0] > 0.0);
}

TEST_CASE("lldram outruns the baseline on a conflict-bound workload") {
  RunConfig c = base_config("gen:bank_conflict,length=8000,bubbles=40,rows=2",
                            8000, 20000);
  const SimReport none = run_simulate(c);
  c.advisor.kind = AdvisorKind::LlDram;
  const SimReport ll = run_simulate(c);
  CHECK(ll.measured_cycles <= none.measured_cycles);
  CHECK(ll.hit_rate == 1.0);
}

TEST_CASE("chargecache is inert on a stream with no row reuse") {
  // The only re-activations a stream sees are rows split by a refresh,
  // so hits are bounded by the REF count and the IPC stays within noise
  // of the baseline.
  RunConfig c = base_config("gen:stream,length=20000,bubbles=4", 15000, 20000);
  const SimReport none = run_simulate(c);
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SimReport cc = run_simulate(c);
  // every hit must stem from a refresh-forced close of the streaming row
  CHECK(cc.hits_chargecache <= cc.commands.ref);
  const double rel =
      std::abs(cc.ipc[0] - none.ipc[0]) / std::max(none.ipc[0], 1e-12);
  CHECK(rel < 0.01);
}

TEST_CASE("reads cannot complete faster than the column access path") {
  RunConfig c = base_config("gen:random_uniform,length=5000,bubbles=2", 4000,
                            10000);
  const SimOutputs out = run_simulation(c);
  // even a row hit pays tCL + tBL after the READ issues
  const Cycle floor = (c.timing.tcl + c.timing.tbl) * c.clock_ratio();
  CHECK(out.report.min_read_latency >= floor);
  CHECK(out.report.max_request_latency >= out.report.min_read_latency);
  bool any_read = false;
  for (const auto& r : out.command_log.records)
    if (r.kind == CommandKind::READ) any_read = true;
  CHECK(any_read);
}

TEST_CASE("multi-core runs complete and report per-core IPC") {
  RunConfig c = base_config("gen:row_reuse,length=8000,bubbles=6,p=0.6,window=16,universe=1024",
                            4000, 20000);
  c.cores = 4;
  c.geometry.channels = 2;
  c.controller.policy = RowPolicy::ClosedRow;
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SimReport r = run_simulate(c);
  REQUIRE(r.ipc.size() == 4);
  for (double ipc : r.ipc) CHECK(ipc > 0.0);
  CHECK(r.hit_rate > 0.0);
  CHECK(r.commands.prea + r.commands.pre > 0);
  // the report's table-storage echo: 4 cores x 2 channels x 128 x 21 bits
  CHECK(r.storage_bits == 4 * 2 * 128 * 21);
  // the config echo reloads to an equivalent config
  CHECK(parse_config(r.config_echo) == c);
}

TEST_CASE("weighted speedup appears when alone IPCs are supplied") {
  RunConfig c = base_config("gen:stream,length=4000,bubbles=8", 3000, 5000);
  c.cores = 2;
  c.workload = {parse_trace_source("gen:stream,length=4000,bubbles=8")};
  c.alone_ipc = {1.0, 1.0};
  const SimReport r = run_simulate(c);
  REQUIRE(r.ws.has_value());
  CHECK(*r.ws == doctest::Approx(r.ipc[0] + r.ipc[1]));
}

TEST_CASE("the emitted command log validates and round-trips through text") {
  RunConfig c = base_config("gen:row_reuse,length=6000,bubbles=4,p=0.7,window=8,universe=256",
                            5000, 10000);
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SimOutputs out = run_simulation(c);
  CHECK(validate_command_log(out.command_log).empty());

  std::ostringstream text;
  write_command_log(text, out.command_log);
  std::istringstream in(text.str());
  const CommandLog back = read_command_log(in);
  CHECK(back.records.size() == out.command_log.records.size());
  CHECK(validate_command_log(back).empty());

  // the RLTL analysis path over the log agrees with the engine's log
  const EventLog replayed = event_log_from_command_log(back);
  const auto direct = compute_rltl(out.event_log, {500000});
  const auto from_log = compute_rltl(replayed, {500000});
  CHECK(direct.total_activations == from_log.total_activations);
  CHECK(direct.qualifying == from_log.qualifying);
}

TEST_CASE("the validator flags a doctored log") {
  RunConfig c = base_config("gen:bank_conflict,length=3000,bubbles=4,rows=2",
                            2500, 5000);
  SimOutputs out = run_simulation(c);
  REQUIRE(validate_command_log(out.command_log).empty());
  // move one READ earlier than its activation allows
  for (auto& r : out.command_log.records) {
    if (r.kind == CommandKind::READ) {
      r.cycle -= c.clock_ratio();
      break;
    }
  }
  CHECK_FALSE(validate_command_log(out.command_log).empty());
}

TEST_CASE("sweeps aggregate the same reports as single runs") {
  RunConfig c = base_config("gen:row_reuse,length=6000,bubbles=6,p=0.7,window=16,universe=512",
                            5000, 10000);
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SweepResult sweep =
      run_sweep(c, SweepAxis::Entries, {"32", "128"}, 2);
  REQUIRE(sweep.rows.size() == 2);
  RunConfig single = c;
  single.advisor.entries = 128;
  const SimReport alone = run_simulate(single);
  CHECK(sweep.rows[1].report.to_json() == alone.to_json());

  // worker counts do not change the aggregated bytes
  const SweepResult serial =
      run_sweep(c, SweepAxis::Entries, {"32", "128"}, 1);
  CHECK(serial.csv() == sweep.csv());
}

TEST_CASE("two ranks per channel refresh independently and validate clean") {
  RunConfig c = base_config("gen:row_reuse,length=12000,bubbles=6,p=0.8,window=24,universe=2048,writes=0.2",
                            6000, 60000);
  c.geometry.ranks_per_channel = 2;
  c.cores = 2;
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SimOutputs out = run_simulation(c);
  CHECK(out.report.measured_cycles > 0);
  CHECK(out.report.commands.ref > 0);
  CHECK(validate_command_log(out.command_log).empty());
}

TEST_CASE("alternative mapping schemes run and validate clean") {
  for (auto scheme : {MappingScheme::RowRankChannelBankColumn,
                      MappingScheme::RowChannelBankRankColumn}) {
    RunConfig c = base_config("gen:random_uniform,length=8000,bubbles=4", 5000,
                              20000);
    c.geometry.channels = 2;
    c.controller.mapping.scheme = scheme;
    c.advisor.kind = AdvisorKind::ChargeCacheNuat;
    c.advisor.shared = true;
    const SimOutputs out = run_simulation(c);
    CHECK(out.report.measured_cycles > 0);
    CHECK(validate_command_log(out.command_log).empty());
  }
}

TEST_CASE("duration sweep: per-hit timing reduction shrinks with duration") {
  RunConfig c = base_config("gen:row_reuse,length=6000,bubbles=6,p=0.8,window=16,universe=512",
                            5000, 10000);
  c.advisor.kind = AdvisorKind::ChargeCache;
  const SweepResult sweep =
      run_sweep(c, SweepAxis::Duration, {"1", "4", "16"}, 2);
  REQUIRE(sweep.rows.size() == 3);
  Cycle prev_save_trcd = std::numeric_limits<Cycle>::max();
  Cycle prev_save_tras = std::numeric_limits<Cycle>::max();
  for (const auto& row : sweep.rows) {
    const RunConfig echo = parse_config(row.report.config_echo);
    const int ti = echo.reduction.row_for_duration(echo.advisor.duration_ms);
    REQUIRE(ti >= 0);
    const ActTiming at = echo.reduction.row_timing(ti, echo.timing.bus_freq_mhz, 1);
    const Cycle save_trcd = echo.timing.trcd - at.trcd;
    const Cycle save_tras = echo.timing.tras - at.tras;
    CHECK(save_trcd > 0);
    CHECK(save_tras > 0);
    CHECK(save_trcd <= prev_save_trcd);
    CHECK(save_tras <= prev_save_tras);
    prev_save_trcd = save_trcd;
    prev_save_tras = save_tras;
  }
}

TEST_CASE("a sweep with a bad value identifies the failing config") {
  RunConfig c = base_config("gen:stream,length=1000,bubbles=4", 500, 1000);
  c.advisor.kind = AdvisorKind::ChargeCache;
  try {
    run_sweep(c, SweepAxis::Duration, {"1", "2"}, 1);  // 2 ms has no table row
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'2'") != std::string::npos);
  }
}
