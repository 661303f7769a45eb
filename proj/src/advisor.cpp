#include "ccsim/advisor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace ccsim {

// ---------------------------------------------------------------------------
// ReductionTable
// ---------------------------------------------------------------------------

Cycle ReductionTable::ns_to_cycles(double ns, int bus_freq_mhz) {
  // cycle time in ns = 1000 / MHz; round the cycle count up
  const double cycles = ns * double(bus_freq_mhz) / 1000.0;
  return Cycle(std::ceil(cycles - 1e-9));
}

ActTiming ReductionTable::row_timing(int row, int bus_freq_mhz,
                                     Cycle clock_ratio) const {
  const ReductionRow& r = rows[size_t(row)];
  return ActTiming{ns_to_cycles(r.trcd_ns, bus_freq_mhz) * clock_ratio,
                   ns_to_cycles(r.tras_ns, bus_freq_mhz) * clock_ratio};
}

int ReductionTable::row_for_duration(double ms) const {
  for (size_t i = 0; i < rows.size(); ++i)
    if (rows[i].duration_ms == ms) return int(i);
  return -1;
}

int ReductionTable::row_covering_duration(double ms) const {
  for (size_t i = 0; i < rows.size(); ++i)
    if (rows[i].duration_ms >= ms) return int(i);
  return -1;
}

void ReductionTable::collect_problems(
    std::vector<std::string>& out,
    const TimingParams& standard_bus_timing) const {
  if (rows.empty()) {
    out.push_back("reduction_table: at least one row required");
    return;
  }
  const int mhz = standard_bus_timing.bus_freq_mhz;
  if (ns_to_cycles(baseline_trcd_ns, mhz) != standard_bus_timing.trcd)
    out.push_back("reduction_table: baseline tRCD (ns) does not convert to timing.trcd");
  if (ns_to_cycles(baseline_tras_ns, mhz) != standard_bus_timing.tras)
    out.push_back("reduction_table: baseline tRAS (ns) does not convert to timing.tras");
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.duration_ms <= 0)
      out.push_back("reduction_table: durations must be positive");
    if (i > 0 && rows[i - 1].duration_ms >= r.duration_ms)
      out.push_back("reduction_table: durations must be strictly increasing");
    if (i > 0 && (rows[i - 1].trcd_ns > r.trcd_ns || rows[i - 1].tras_ns > r.tras_ns))
      out.push_back("reduction_table: tRCD/tRAS must be non-decreasing with duration");
    if (r.trcd_ns > baseline_trcd_ns || r.tras_ns > baseline_tras_ns)
      out.push_back("reduction_table: reduced timings must not exceed the baseline");
    const Cycle c_trcd = ns_to_cycles(r.trcd_ns, mhz);
    const Cycle c_tras = ns_to_cycles(r.tras_ns, mhz);
    if (c_tras < c_trcd)
      out.push_back("reduction_table: row " + std::to_string(i) +
                    " violates tRAS >= tRCD after cycle conversion");
  }
}

// ---------------------------------------------------------------------------
// Hcrac
// ---------------------------------------------------------------------------

Hcrac::Hcrac(const HcracParams& p)
    : k_(p.entries), ways_(p.ways), invalidate_on_hit_(p.invalidate_on_hit) {
  assert(k_ > 0 && ways_ > 0 && k_ % ways_ == 0);
  sets_ = k_ / ways_;
  assert(is_pow2(uint64_t(sets_)));
  // Round C up to a multiple of k so the per-slot interval stays integral
  // without ever shortening the window.
  window_ = ((p.window + k_ - 1) / k_) * Cycle(k_);
  interval_ = window_ / k_;
  slots_.resize(size_t(k_));
  slot_invalidations_.assign(size_t(k_), 0);
}

int Hcrac::set_of(int bank, int64_t row) const {
  return int(uint64_t(row ^ int64_t(bank)) & uint64_t(sets_ - 1));
}

void Hcrac::invalidate_slot(int slot, Cycle now) {
  Entry& e = slots_[size_t(slot)];
  slot_invalidations_[size_t(slot)]++;
  if (e.valid) {
    e.valid = false;
    invalidations_++;
    max_residency_ = std::max(max_residency_, now - e.inserted);
  }
}

void Hcrac::tick(Cycle now) {
  if (++iic_ >= interval_) {
    invalidate_slot(ec_, now);
    ec_ = (ec_ + 1) % k_;
    iic_ = 0;
  }
}

bool Hcrac::lookup(int rank, int bank, int64_t row, Cycle now) {
  const int set = set_of(bank, row);
  for (int w = 0; w < ways_; ++w) {
    Entry& e = slots_[size_t(set * ways_ + w)];
    if (e.valid && e.rank == rank && e.bank == bank && e.row == row) {
      if (invalidate_on_hit_) {
        e.valid = false;
        max_residency_ = std::max(max_residency_, now - e.inserted);
      } else {
        e.lru = ++lru_clock_;
      }
      return true;
    }
  }
  return false;
}

void Hcrac::insert(int rank, int bank, int64_t row, Cycle now) {
  const int set = set_of(bank, row);
  Entry* victim = nullptr;
  for (int w = 0; w < ways_; ++w) {
    Entry& e = slots_[size_t(set * ways_ + w)];
    if (e.valid && e.rank == rank && e.bank == bank && e.row == row) {
      // already present: refresh recency and the charge window
      e.lru = ++lru_clock_;
      e.inserted = now;
      return;
    }
    if (!e.valid) {
      if (!victim || victim->valid) victim = &e;
    } else if (!victim || (victim->valid && e.lru < victim->lru)) {
      victim = &e;
    }
  }
  if (victim->valid)  // LRU eviction ends that entry's residency
    max_residency_ = std::max(max_residency_, now - victim->inserted);
  victim->valid = true;
  victim->rank = rank;
  victim->bank = bank;
  victim->row = row;
  victim->lru = ++lru_clock_;
  victim->inserted = now;
}

int Hcrac::valid_count() const {
  int n = 0;
  for (const auto& e : slots_) n += e.valid ? 1 : 0;
  return n;
}

uint64_t Hcrac::state_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(uint64_t(iic_));
  mix(uint64_t(ec_));
  for (const auto& e : slots_) {
    mix(e.valid);
    if (e.valid) {
      mix(uint64_t(e.rank));
      mix(uint64_t(e.bank));
      mix(uint64_t(e.row));
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Advisors
// ---------------------------------------------------------------------------

const char* to_string(AdvisorKind k) {
  switch (k) {
    case AdvisorKind::None: return "none";
    case AdvisorKind::ChargeCache: return "chargecache";
    case AdvisorKind::Nuat: return "nuat";
    case AdvisorKind::ChargeCacheNuat: return "chargecache+nuat";
    case AdvisorKind::LlDram: return "lldram";
  }
  return "?";
}

std::optional<AdvisorKind> advisor_kind_from_string(const std::string& s) {
  if (s == "none") return AdvisorKind::None;
  if (s == "chargecache") return AdvisorKind::ChargeCache;
  if (s == "nuat") return AdvisorKind::Nuat;
  if (s == "chargecache+nuat") return AdvisorKind::ChargeCacheNuat;
  if (s == "lldram") return AdvisorKind::LlDram;
  return std::nullopt;
}

void AdvisorConfig::collect_problems(std::vector<std::string>& out,
                                     const ReductionTable& table) const {
  if (entries < 1) out.push_back("advisor.entries must be >= 1");
  if (ways < 1) out.push_back("advisor.ways must be >= 1");
  if (entries >= 1 && ways >= 1) {
    if (entries % ways != 0)
      out.push_back("advisor.entries must be a multiple of advisor.ways");
    else if (!is_pow2(uint64_t(entries / ways)))
      out.push_back("advisor.entries/ways (set count) must be a power of two");
  }
  if (duration_ms <= 0) out.push_back("advisor.duration_ms must be positive");
  const bool uses_table = kind == AdvisorKind::ChargeCache ||
                          kind == AdvisorKind::ChargeCacheNuat ||
                          kind == AdvisorKind::LlDram;
  if (uses_table && table.row_for_duration(duration_ms) < 0)
    out.push_back("advisor.duration_ms has no matching reduction_table row");
  const bool uses_nuat =
      kind == AdvisorKind::Nuat || kind == AdvisorKind::ChargeCacheNuat;
  if (uses_nuat) {
    if (nuat_bins_ms.empty())
      out.push_back("advisor.nuat_bins_ms must not be empty for NUAT");
    for (size_t i = 0; i < nuat_bins_ms.size(); ++i) {
      if (nuat_bins_ms[i] <= 0)
        out.push_back("advisor.nuat_bins_ms entries must be positive");
      if (i > 0 && nuat_bins_ms[i - 1] >= nuat_bins_ms[i])
        out.push_back("advisor.nuat_bins_ms must be strictly increasing");
      if (table.row_covering_duration(nuat_bins_ms[i]) < 0)
        out.push_back("advisor.nuat_bins_ms: no reduction_table row covers bin " +
                      std::to_string(nuat_bins_ms[i]) + " ms");
    }
  }
}

namespace {

class NullAdvisor final : public LatencyAdvisor {
public:
  AdvisorVerdict on_activate(int, const AddressParts&, Cycle) override {
    stats_.activations++;
    return {};
  }
  void on_precharge(int, const AddressParts&, Cycle) override {}
  void tick(Cycle) override {}
  AdvisorKind kind() const override { return AdvisorKind::None; }
};

class LlDramAdvisor final : public LatencyAdvisor {
public:
  explicit LlDramAdvisor(int table_row) : row_(table_row) {}
  AdvisorVerdict on_activate(int, const AddressParts&, Cycle) override {
    stats_.activations++;
    stats_.hits_lldram++;
    return AdvisorVerdict{row_};
  }
  void on_precharge(int, const AddressParts&, Cycle) override {}
  void tick(Cycle) override {}
  AdvisorKind kind() const override { return AdvisorKind::LlDram; }

private:
  int row_;
};

// Per-core, per-channel HCRAC bank. Shared mode collapses the core axis.
class HcracBank {
public:
  HcracBank(const AdvisorConfig& cfg, const AdvisorEnv& env) {
    cores_ = cfg.shared ? 1 : env.cores;
    channels_ = env.geometry->channels;
    HcracParams p;
    p.entries = cfg.entries;
    p.ways = cfg.ways;
    p.window = Cycle(cfg.duration_ms * double(env.cpu_cycles_per_ms) + 0.5);
    p.invalidate_on_hit = cfg.invalidate_on_hit;
    for (int i = 0; i < cores_ * channels_; ++i) instances_.emplace_back(p);
  }

  Hcrac& at(int core, int channel) {
    const int c = cores_ == 1 ? 0 : core;
    return instances_[size_t(c * channels_ + channel)];
  }

  void tick(Cycle now) {
    for (auto& h : instances_) h.tick(now);
  }

  Cycle max_residency() const {
    Cycle m = 0;
    for (const auto& h : instances_) m = std::max(m, h.max_residency());
    return m;
  }
  Cycle window() const { return instances_.front().window(); }
  uint64_t state_hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (const auto& i : instances_) h = h * 0x100000001b3ULL ^ i.state_hash();
    return h;
  }

private:
  int cores_;
  int channels_;
  std::vector<Hcrac> instances_;
};

class ChargeCacheAdvisor final : public LatencyAdvisor {
public:
  ChargeCacheAdvisor(const AdvisorConfig& cfg, const AdvisorEnv& env)
      : bank_(cfg, env), row_(env.table->row_for_duration(cfg.duration_ms)) {
    assert(row_ >= 0);
  }

  AdvisorVerdict on_activate(int core, const AddressParts& w, Cycle now) override {
    stats_.activations++;
    if (bank_.at(core, w.channel).lookup(w.rank, w.bank, w.row, now)) {
      stats_.hits_chargecache++;
      return AdvisorVerdict{row_};
    }
    return {};
  }

  void on_precharge(int core, const AddressParts& w, Cycle now) override {
    stats_.insertions++;
    bank_.at(core, w.channel).insert(w.rank, w.bank, w.row, now);
  }

  void tick(Cycle now) override { bank_.tick(now); }
  AdvisorKind kind() const override { return AdvisorKind::ChargeCache; }
  Cycle max_entry_residency() const override { return bank_.max_residency(); }
  Cycle effective_window() const override { return bank_.window(); }
  uint64_t state_hash() const override { return bank_.state_hash(); }

private:
  HcracBank bank_;
  int row_;
};

struct NuatBins {
  // (age upper bound in cycles, reduction-table row), ordered by bound
  std::vector<std::pair<Cycle, int>> bins;

  NuatBins(const AdvisorConfig& cfg, const AdvisorEnv& env) {
    for (double ms : cfg.nuat_bins_ms) {
      const int row = env.table->row_covering_duration(ms);
      bins.emplace_back(Cycle(ms * double(env.cpu_cycles_per_ms) + 0.5), row);
    }
  }

  std::optional<int> classify(Cycle age) const {
    for (const auto& [bound, row] : bins)
      if (age < bound) return row;
    return std::nullopt;
  }
};

class NuatAdvisor final : public LatencyAdvisor {
public:
  NuatAdvisor(const AdvisorConfig& cfg, const AdvisorEnv& env)
      : bins_(cfg, env), book_(env.refresh) {
    assert(book_ != nullptr);
  }

  AdvisorVerdict on_activate(int, const AddressParts& w, Cycle now) override {
    stats_.activations++;
    const Cycle age = now - book_->last_refresh(w.channel, w.rank, w.row);
    if (auto row = bins_.classify(age)) {
      stats_.hits_nuat++;
      return AdvisorVerdict{*row};
    }
    return {};
  }

  void on_precharge(int, const AddressParts&, Cycle) override {}
  void tick(Cycle) override {}
  AdvisorKind kind() const override { return AdvisorKind::Nuat; }

private:
  NuatBins bins_;
  const RefreshBook* book_;
};

class CombinedAdvisor final : public LatencyAdvisor {
public:
  CombinedAdvisor(const AdvisorConfig& cfg, const AdvisorEnv& env)
      : bank_(cfg, env), cc_row_(env.table->row_for_duration(cfg.duration_ms)),
        bins_(cfg, env), book_(env.refresh) {
    assert(cc_row_ >= 0 && book_ != nullptr);
  }

  AdvisorVerdict on_activate(int core, const AddressParts& w, Cycle now) override {
    stats_.activations++;
    if (bank_.at(core, w.channel).lookup(w.rank, w.bank, w.row, now)) {
      stats_.hits_chargecache++;
      return AdvisorVerdict{cc_row_};
    }
    const Cycle age = now - book_->last_refresh(w.channel, w.rank, w.row);
    if (auto row = bins_.classify(age)) {
      stats_.hits_nuat++;
      return AdvisorVerdict{*row};
    }
    return {};
  }

  void on_precharge(int core, const AddressParts& w, Cycle now) override {
    stats_.insertions++;
    bank_.at(core, w.channel).insert(w.rank, w.bank, w.row, now);
  }

  void tick(Cycle now) override { bank_.tick(now); }
  AdvisorKind kind() const override { return AdvisorKind::ChargeCacheNuat; }
  Cycle max_entry_residency() const override { return bank_.max_residency(); }
  Cycle effective_window() const override { return bank_.window(); }
  uint64_t state_hash() const override { return bank_.state_hash(); }

private:
  HcracBank bank_;
  int cc_row_;
  NuatBins bins_;
  const RefreshBook* book_;
};

}  // namespace

std::unique_ptr<LatencyAdvisor> make_advisor(const AdvisorConfig& cfg,
                                             const AdvisorEnv& env) {
  switch (cfg.kind) {
    case AdvisorKind::None:
      return std::make_unique<NullAdvisor>();
    case AdvisorKind::ChargeCache:
      return std::make_unique<ChargeCacheAdvisor>(cfg, env);
    case AdvisorKind::Nuat:
      return std::make_unique<NuatAdvisor>(cfg, env);
    case AdvisorKind::ChargeCacheNuat:
      return std::make_unique<CombinedAdvisor>(cfg, env);
    case AdvisorKind::LlDram:
      return std::make_unique<LlDramAdvisor>(
          env.table->row_for_duration(cfg.duration_ms));
  }
  throw InternalError("unknown advisor kind");
}

uint64_t storage_cost_bits(int cores, int channels, int entries,
                           const DramGeometry& geometry, int associativity) {
  if (cores < 1 || channels < 1 || entries < 1 || associativity < 1)
    throw ConfigError("storage_cost: all counts must be >= 1");
  const uint64_t entry_bits = uint64_t(log2_exact(uint64_t(geometry.ranks_per_channel))) +
                              uint64_t(log2_exact(uint64_t(geometry.banks_per_rank))) +
                              uint64_t(log2_exact(uint64_t(geometry.rows_per_bank))) + 1;
  const uint64_t lru_bits = uint64_t(log2_exact(uint64_t(associativity)));
  return uint64_t(cores) * uint64_t(channels) * uint64_t(entries) *
         (entry_bits + lru_bits);
}

}  // namespace ccsim
