#include "doctest.h"

#include <cmath>

#include "ccsim/metrics.hpp"
#include "ccsim/trace.hpp"
#include "support/reference_models.hpp"

using namespace ccsim;

namespace {

RowEvent act(Cycle c, int64_t row, int bank = 0, int ch = 0, int rank = 0) {
  return RowEvent{c, RowEventKind::Act, int16_t(ch), int16_t(rank),
                  int16_t(bank), row};
}
RowEvent pre(Cycle c, int64_t row, int bank = 0, int ch = 0, int rank = 0) {
  return RowEvent{c, RowEventKind::Pre, int16_t(ch), int16_t(rank),
                  int16_t(bank), row};
}

}  // namespace

TEST_CASE("an activation qualifies only in windows covering its precharge gap") {
  EventLog log;
  log.events = {act(0, 7), pre(1'000'000, 7), act(2'000'000, 7)};
  // windows at 4 GHz: 0.125 ms = 500k cycles, 1 ms = 4M cycles
  const auto h = compute_rltl(log, {500'000, 4'000'000});
  CHECK(h.total_activations == 2);
  CHECK(h.first_touch == 1);
  CHECK(h.qualifying[0] == 0);  // the 1M-cycle gap misses the 0.125 ms window
  CHECK(h.qualifying[1] == 1);
}

TEST_CASE("single-touch traces have zero RLTL everywhere") {
  EventLog log;
  for (int i = 0; i < 50; ++i) {
    log.events.push_back(act(i * 100, i));
    log.events.push_back(pre(i * 100 + 50, i));
  }
  const auto h = compute_rltl(log, {1000, 100000});
  CHECK(h.total_activations == 50);
  CHECK(h.first_touch == 50);
  CHECK(h.qualifying[0] == 0);
  CHECK(h.qualifying[1] == 0);
}

TEST_CASE("same row id in another bank does not anchor the activation") {
  EventLog log;
  log.events = {pre(0, 7, 1), act(10, 7, 2)};
  const auto h = compute_rltl(log, {100});
  CHECK(h.total_activations == 1);
  CHECK(h.first_touch == 1);
}

TEST_CASE("events before measure_from anchor but are not counted") {
  EventLog log;
  log.measure_from = 100;
  log.events = {act(0, 7), pre(50, 7), act(120, 7)};
  const auto h = compute_rltl(log, {1000});
  CHECK(h.total_activations == 1);  // only the measured ACT
  CHECK(h.qualifying[0] == 1);      // anchored by the warm-up PRE
}

TEST_CASE("unordered logs are rejected") {
  EventLog log;
  log.events = {act(10, 1), act(5, 2)};
  CHECK_THROWS_AS(compute_rltl(log, {100}), InputError);
}

TEST_CASE("compute_rltl matches the backward-scan oracle on random logs") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    EventLog log;
    Cycle now = 0;
    for (int i = 0; i < 20000; ++i) {
      now += Cycle(rng.below(200));
      const int64_t row = int64_t(rng.below(128));
      const int bank = int(rng.below(4));
      const int ch = int(rng.below(2));
      if (rng.below(2) == 0)
        log.events.push_back(act(now, row, bank, ch));
      else
        log.events.push_back(pre(now, row, bank, ch));
    }
    log.measure_from = now / 3;
    const std::vector<Cycle> windows = {500, 5'000, 50'000, 500'000};
    const auto fast = compute_rltl(log, windows);
    const auto slow = testing::rltl_backward_oracle(log, windows);
    CHECK(fast.total_activations == slow.total_activations);
    CHECK(fast.first_touch == slow.first_touch);
    CHECK(fast.qualifying == slow.qualifying);
    for (size_t i = 1; i < windows.size(); ++i)
      CHECK(fast.qualifying[i] >= fast.qualifying[i - 1]);  // monotone
  }
}

// ---------------------------------------------------------------------------
// Refresh-relative locality
// ---------------------------------------------------------------------------

TEST_CASE("activation right after the row's refresh qualifies") {
  RefreshTimeline tl;
  tl.groups = 4;
  tl.rows_per_group = 8;
  tl.trefi = 1000;
  tl.events = {{5000, 0, 0, 1}};  // group 1 refreshed at cycle 5000

  EventLog log;
  log.events = {act(5100, 9)};  // row 9 lives in group 1
  CHECK(compute_refresh_locality(log, tl, 200) == 1.0);
  // the same activation fails a window shorter than its age
  CHECK(compute_refresh_locality(log, tl, 50) == 0.0);
}

TEST_CASE("a full-retention window covers every activation") {
  RefreshTimeline tl;
  tl.groups = 8;
  tl.rows_per_group = 4;
  tl.trefi = 1000;  // seeded pre-run stamps: ages < groups * trefi

  EventLog log;
  for (int i = 0; i < 32; ++i) log.events.push_back(act(i * 10, i % 32));
  CHECK(compute_refresh_locality(log, tl, 8 * 1000) == 1.0);
}

TEST_CASE("refresh events are replayed in order, not applied wholesale") {
  RefreshTimeline tl;
  tl.groups = 2;
  tl.rows_per_group = 1;
  tl.trefi = 100;
  tl.events = {{1000, 0, 0, 0}, {5000, 0, 0, 0}};

  EventLog log;
  log.events = {act(1010, 0), act(3000, 0)};
  // first ACT: age 10 (qualifies at 100); second: age 2000 against the
  // cycle-1000 stamp, the cycle-5000 refresh must not leak backwards
  CHECK(compute_refresh_locality(log, tl, 100) == 0.5);
}

TEST_CASE("missing refresh bookkeeping is an input error") {
  RefreshTimeline tl;
  tl.trefi = 0;
  EventLog log;
  log.events = {act(0, 0)};
  CHECK_THROWS_AS(compute_refresh_locality(log, tl, 100), InputError);
}

// ---------------------------------------------------------------------------
// Weighted speedup
// ---------------------------------------------------------------------------

TEST_CASE("weighted speedup of identical runs equals the core count") {
  CHECK(weighted_speedup({1.5, 2.0, 0.5}, {1.5, 2.0, 0.5}) == 3.0);
}

TEST_CASE("all cores at half their alone IPC give half the core count") {
  std::vector<double> alone(8, 1.2), shared(8, 0.6);
  CHECK(weighted_speedup(shared, alone) == doctest::Approx(4.0));
}

TEST_CASE("mixed weighted speedup equals the hand-computed sum") {
  // 0.5/1.0 + 0.9/1.5 + 2.0/2.5 = 0.5 + 0.6 + 0.8
  CHECK(weighted_speedup({0.5, 0.9, 2.0}, {1.0, 1.5, 2.5}) ==
        doctest::Approx(1.9));
}

TEST_CASE("zero alone-IPC is a metric error") {
  CHECK_THROWS_AS(weighted_speedup({1.0}, {0.0}), InputError);
  CHECK_THROWS_AS(weighted_speedup({1.0, 1.0}, {1.0}), InputError);
}

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

TEST_CASE("an empty command log costs background plus advisor power only") {
  EnergyModel m;
  CommandCounts none;
  // 4M cycles at 4 GHz = 1 ms; 1 rank fully idle
  const auto e = compute_energy(none, 4'000'000, 0, 1, 4000, m);
  CHECK(e.activation_nj == 0.0);
  CHECK(e.read_nj == 0.0);
  CHECK(e.background_standby_nj == doctest::Approx(120'000.0));
  CHECK(e.background_active_nj == 0.0);
  CHECK(e.advisor_nj == doctest::Approx(149.0).epsilon(1e-9));
  CHECK(e.total_nj == e.background_standby_nj + e.advisor_nj);
}

TEST_CASE("command energies add linearly") {
  EnergyModel m;
  m.standby_mw_per_rank = 0;
  m.active_mw_per_rank = 0;
  m.advisor_mw = 0;
  CommandCounts c;
  c.act = 1;
  c.read = 1;
  const auto e = compute_energy(c, 1000, 0, 1, 4000, m);
  CHECK(e.total_nj == doctest::Approx(2.0 + 1.2));
}

TEST_CASE("breakdown components always sum exactly to the total") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    EnergyModel m;
    m.act_pre_nj = double(rng.below(1000)) / 7.0;
    m.read_nj = double(rng.below(1000)) / 11.0;
    m.write_nj = double(rng.below(1000)) / 13.0;
    m.ref_nj = double(rng.below(1000)) / 3.0;
    m.standby_mw_per_rank = double(rng.below(500));
    m.active_mw_per_rank = double(rng.below(500)) + 500.0;
    CommandCounts c;
    c.act = rng.below(100000);
    c.pre = c.act;
    c.read = rng.below(100000);
    c.write = rng.below(100000);
    c.ref = rng.below(1000);
    const Cycle elapsed = Cycle(rng.below(100'000'000)) + 1;
    const Cycle active = Cycle(rng.below(uint64_t(elapsed)));
    const auto e = compute_energy(c, elapsed, active, 2, 4000, m);
    const double sum = e.activation_nj + e.read_nj + e.write_nj + e.refresh_nj +
                       e.background_standby_nj + e.background_active_nj +
                       e.advisor_nj;
    CHECK(e.total_nj == sum);  // bitwise: same order of additions
  }
}

TEST_CASE("active cycles trade standby for active power") {
  EnergyModel m;
  const CommandCounts none;
  const auto idle = compute_energy(none, 1'000'000, 0, 1, 4000, m);
  const auto busy = compute_energy(none, 1'000'000, 1'000'000, 1, 4000, m);
  CHECK(busy.background_active_nj > 0);
  CHECK(busy.background_standby_nj == 0.0);
  CHECK(busy.total_nj > idle.total_nj);  // active rate exceeds standby
}
