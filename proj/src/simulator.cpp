#include "ccsim/simulator.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "ccsim/controller.hpp"
#include "ccsim/core.hpp"
#include "ccsim/dram.hpp"

namespace ccsim {

namespace {

constexpr Cycle kCycleSafetyBound = 100'000'000'000;

class SimEngine final : public ControllerHooks,
                        public CoreMemory,
                        public RefreshBook {
public:
  explicit SimEngine(const RunConfig& cfg)
      : cfg_(cfg), ratio_(cfg.clock_ratio()), timing_cpu_(cfg.timing_cpu()),
        dram_(cfg.geometry, timing_cpu_, ratio_,
              cfg.ms_to_cycles(cfg.retention_ms), cfg.ref_groups) {
    env_.geometry = &cfg_.geometry;
    env_.table = &cfg_.reduction;
    env_.bus_freq_mhz = cfg_.timing.bus_freq_mhz;
    env_.clock_ratio = ratio_;
    env_.cpu_cycles_per_ms = cfg_.cpu_cycles_per_ms();
    env_.cores = cfg_.cores;
    env_.refresh = this;
    advisor_ = make_advisor(cfg_.advisor, env_);

    const auto variants = cfg_.variant_timings_cpu();
    controllers_.reserve(size_t(cfg_.geometry.channels));
    for (int ch = 0; ch < cfg_.geometry.channels; ++ch)
      controllers_.emplace_back(ch, cfg_.controller, dram_, *advisor_, *this,
                                variants);

    const auto sources = cfg_.workload_per_core();
    cores_.reserve(size_t(cfg_.cores));
    for (int i = 0; i < cfg_.cores; ++i) {
      std::vector<TraceRecord> records;
      if (sources[size_t(i)].is_file()) {
        records =
            parse_trace_file(std::get<std::string>(sources[size_t(i)].source));
      } else {
        records = gen_synthetic(
            std::get<GeneratorParams>(sources[size_t(i)].source),
            cfg_.geometry, cfg_.controller.mapping,
            mix_seed(cfg_.seed, uint64_t(i)));
      }
      cores_.emplace_back(i, cfg_.core, std::move(records));
      if (cfg_.warmup_cycles > 0) cores_.back().set_measuring(false);
    }

    out_.command_log.geometry = cfg_.geometry;
    out_.command_log.timing = timing_cpu_;
    out_.command_log.clock_ratio = ratio_;
    out_.refresh.channels = cfg_.geometry.channels;
    out_.refresh.ranks = cfg_.geometry.ranks_per_channel;
    out_.refresh.groups = dram_.refresh_groups();
    out_.refresh.rows_per_group = dram_.rows_per_ref();
    out_.refresh.trefi = timing_cpu_.trefi;
  }

  // --- ControllerHooks -----------------------------------------------------

  void on_command(const DramCommand& cmd, const ActTiming* act, int reduced_row,
                  int core_id) override {
    CommandRecord r;
    r.cycle = cmd.issue_cycle;
    r.kind = cmd.kind;
    r.channel = cmd.channel;
    r.rank = cmd.rank;
    r.bank = cmd.bank;
    r.row = cmd.row;
    r.column = cmd.column;
    r.reduced_row = reduced_row;
    r.core = core_id;
    if (cmd.kind == CommandKind::ACT && act) {
      r.act_trcd = act->trcd;
      r.act_tras = act->tras;
    }
    if (cmd.kind == CommandKind::REF) {
      const RankState& rk = dram_.rank(cmd.channel, cmd.rank);
      const int64_t group =
          (rk.group_ptr - 1 + dram_.refresh_groups()) % dram_.refresh_groups();
      r.row = group;
      out_.refresh.events.push_back(
          {cmd.issue_cycle, int16_t(cmd.channel), int16_t(cmd.rank), group});
    }
    out_.command_log.records.push_back(r);

    if (cmd.issue_cycle >= measure_from_) {
      switch (cmd.kind) {
        case CommandKind::ACT: counts_.act++; break;
        case CommandKind::PRE: counts_.pre++; break;
        case CommandKind::PREA: counts_.prea++; break;
        case CommandKind::READ: counts_.read++; break;
        case CommandKind::WRITE: counts_.write++; break;
        case CommandKind::REF: counts_.ref++; break;
      }
    }
    if (cmd.kind == CommandKind::ACT)
      out_.event_log.events.push_back({cmd.issue_cycle, RowEventKind::Act,
                                       int16_t(cmd.channel), int16_t(cmd.rank),
                                       int16_t(cmd.bank), cmd.row});
  }

  void on_row_closed(const DramCommand& cmd, int bank, int64_t row,
                     int) override {
    out_.event_log.events.push_back({cmd.issue_cycle, RowEventKind::Pre,
                                     int16_t(cmd.channel), int16_t(cmd.rank),
                                     int16_t(bank), row});
    if (cmd.issue_cycle >= measure_from_) counts_.rows_closed++;
  }

  void on_read_done(const MemoryRequest& req, Cycle done) override {
    completions_.push({done, req.core_id, req.token});
  }

  // --- CoreMemory ----------------------------------------------------------

  bool submit_read(int core, uint64_t address, uint64_t token,
                   Cycle now) override {
    MemoryRequest req;
    req.kind = ReqKind::Read;
    req.address = address;
    req.parts = map_address(address, cfg_.geometry, cfg_.controller.mapping);
    req.core_id = core;
    req.arrival = now;
    req.token = token;
    return controllers_[size_t(req.parts.channel)].try_enqueue(req);
  }

  bool submit_write(int core, uint64_t address, Cycle now) override {
    MemoryRequest req;
    req.kind = ReqKind::Write;
    req.address = address;
    req.parts = map_address(address, cfg_.geometry, cfg_.controller.mapping);
    req.core_id = core;
    req.arrival = now;
    return controllers_[size_t(req.parts.channel)].try_enqueue(req);
  }

  // --- RefreshBook ---------------------------------------------------------

  Cycle last_refresh(int channel, int rank, int64_t row) const override {
    return dram_.last_refresh(channel, rank, row);
  }

  // --- run -----------------------------------------------------------------

  SimOutputs run() {
    measure_from_ = cfg_.warmup_cycles;
    out_.command_log.measure_from = measure_from_;
    out_.event_log.measure_from = measure_from_;

    Cycle now = 0;
    bool boundary_done = measure_from_ == 0;
    if (boundary_done) out_.boundary_state_hash = state_hash();

    for (;; ++now) {
      if (!boundary_done && now == measure_from_) {
        warmup_boundary(now);
        boundary_done = true;
      }
      advisor_->tick(now);
      deliver_completions(now);
      if (now % ratio_ == 0)
        for (auto& ctrl : controllers_) ctrl.tick(now);
      bool all_done = true;
      for (auto& core : cores_) {
        core.tick(now, *this);
        all_done = all_done && core.finished();
      }
      if (all_done && boundary_done) break;
      if (now > measure_from_ + kCycleSafetyBound)
        throw InternalError("simulation exceeded the cycle safety bound");
    }

    finalize(now);
    return std::move(out_);
  }

private:
  void warmup_boundary(Cycle now) {
    for (auto& core : cores_) core.reset_measurement(now);
    advisor_->reset_stats();
    dram_.settle_active_time(now);
    warmup_active_cycles_ = total_active_cycles();
    out_.boundary_state_hash = state_hash();
  }

  void deliver_completions(Cycle now) {
    while (!completions_.empty() && std::get<0>(completions_.top()) <= now) {
      auto [cycle, core, token] = completions_.top();
      if (cycle < now)
        throw InternalError("missed a read completion cycle");
      completions_.pop();
      cores_[size_t(core)].on_read_complete(token);
    }
  }

  Cycle total_active_cycles() const {
    Cycle total = 0;
    for (int ch = 0; ch < cfg_.geometry.channels; ++ch)
      for (int rk = 0; rk < cfg_.geometry.ranks_per_channel; ++rk)
        total += dram_.rank(ch, rk).active_cycles;
    return total;
  }

  uint64_t state_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ULL;
    };
    for (int ch = 0; ch < cfg_.geometry.channels; ++ch)
      for (int rk = 0; rk < cfg_.geometry.ranks_per_channel; ++rk) {
        const RankState& r = dram_.rank(ch, rk);
        mix(uint64_t(r.pending_refs));
        mix(uint64_t(r.group_ptr));
        for (const auto& b : r.banks) {
          mix(uint64_t(b.phase));
          mix(b.open_row ? uint64_t(*b.open_row) + 1 : 0);
          mix(uint64_t(b.last_act));
          mix(uint64_t(b.last_pre));
          mix(uint64_t(b.last_rdwr));
          mix(uint64_t(b.active_timing.trcd));
          mix(uint64_t(b.active_timing.tras));
        }
      }
    for (const auto& c : cores_) mix(c.state_hash());
    mix(advisor_->state_hash());
    for (const auto& ctrl : controllers_) {
      mix(uint64_t(ctrl.read_queue_depth()));
      mix(uint64_t(ctrl.write_queue_depth()));
    }
    return h;
  }

  void finalize(Cycle end) {
    SimReport& rep = out_.report;
    rep.measured_cycles = std::max<Cycle>(0, end - measure_from_);
    rep.warmup_cycles = measure_from_;
    rep.seed = cfg_.seed;
    rep.advisor_name = to_string(cfg_.advisor.kind);
    rep.config_echo = cfg_.serialize();

    for (auto& core : cores_) rep.ipc.push_back(core.ipc(measure_from_));
    if (!cfg_.alone_ipc.empty())
      rep.ws = weighted_speedup(rep.ipc, cfg_.alone_ipc);

    const auto& st = advisor_->stats();
    rep.activations = st.activations;
    rep.hits_chargecache = st.hits_chargecache;
    rep.hits_nuat = st.hits_nuat;
    rep.hits_lldram = st.hits_lldram;
    rep.hit_rate = st.activations == 0
                       ? 0.0
                       : double(st.hits_total()) / double(st.activations);
    rep.rmpkc = rep.measured_cycles == 0
                    ? 0.0
                    : 1000.0 * double(counts_.act) / double(rep.measured_cycles);

    rep.rltl_windows_ms = cfg_.rltl_windows_ms;
    std::vector<Cycle> windows;
    for (double ms : cfg_.rltl_windows_ms)
      windows.push_back(cfg_.ms_to_cycles(ms));
    rep.rltl = compute_rltl(out_.event_log, windows);

    rep.refresh_locality_window_ms = cfg_.refresh_window_ms;
    rep.refresh_locality = compute_refresh_locality(
        out_.event_log, out_.refresh, cfg_.ms_to_cycles(cfg_.refresh_window_ms));

    rep.commands = counts_;
    dram_.settle_active_time(end);
    const Cycle active_measured =
        std::max<Cycle>(0, total_active_cycles() - warmup_active_cycles_);
    rep.energy = compute_energy(
        counts_, rep.measured_cycles, active_measured,
        cfg_.geometry.channels * cfg_.geometry.ranks_per_channel,
        cfg_.cpu_freq_mhz, cfg_.energy);

    rep.storage_bits =
        storage_cost_bits(cfg_.cores, cfg_.geometry.channels,
                          cfg_.advisor.entries, cfg_.geometry, cfg_.advisor.ways);
    rep.max_entry_residency = advisor_->max_entry_residency();
    rep.advisor_window_cycles = advisor_->effective_window();
    Cycle min_read = std::numeric_limits<Cycle>::max();
    for (const auto& ctrl : controllers_) {
      rep.max_request_latency =
          std::max(rep.max_request_latency, ctrl.max_request_latency());
      min_read = std::min(min_read, ctrl.min_read_latency());
    }
    rep.min_read_latency =
        min_read == std::numeric_limits<Cycle>::max() ? 0 : min_read;
    rep.refresh_deferral_warnings = dram_.total_deferral_warnings();
    rep.state_hash = state_hash();

    run_invariant_checks(rep);
  }

  void run_invariant_checks(const SimReport& rep) {
    // Residency bound: every table entry lives strictly less than C.
    if (rep.advisor_window_cycles > 0 &&
        rep.max_entry_residency >= rep.advisor_window_cycles)
      throw InternalError("HCRAC residency bound violated: " +
                          std::to_string(rep.max_entry_residency) + " >= " +
                          std::to_string(rep.advisor_window_cycles));

    // A ChargeCache hit implies the row was precharged within C.
    if (rep.advisor_window_cycles > 0 && rep.hits_chargecache > 0) {
      const auto h = compute_rltl(out_.event_log, {rep.advisor_window_cycles});
      if (rep.hits_chargecache > h.qualifying[0])
        throw InternalError("hit rate exceeds RLTL at the caching duration");
    }

    // RLTL must be monotone in the window size.
    for (size_t i = 1; i < rep.rltl.qualifying.size(); ++i)
      if (rep.rltl.qualifying[i] < rep.rltl.qualifying[i - 1])
        throw InternalError("RLTL histogram is not monotone in window size");

    if (cfg_.validate_run) {
      const auto violations = validate_command_log(out_.command_log);
      if (!violations.empty())
        throw InternalError("command-log validation failed at cycle " +
                            std::to_string(violations[0].cycle) + ": " +
                            violations[0].what);
    }
  }

  RunConfig cfg_;
  Cycle ratio_;
  TimingParams timing_cpu_;
  DramSystem dram_;
  AdvisorEnv env_;
  std::unique_ptr<LatencyAdvisor> advisor_;
  std::vector<ChannelController> controllers_;
  std::vector<Core> cores_;

  using Completion = std::tuple<Cycle, int, uint64_t>;
  std::priority_queue<Completion, std::vector<Completion>,
                      std::greater<Completion>>
      completions_;

  CommandCounts counts_;
  Cycle measure_from_ = 0;
  Cycle warmup_active_cycles_ = 0;
  SimOutputs out_;
};

}  // namespace

SimOutputs run_simulation(const RunConfig& cfg) {
  cfg.validate();
  SimEngine engine(cfg);
  return engine.run();
}

}  // namespace ccsim
