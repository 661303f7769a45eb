#include "ccsim/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "json.hpp"

namespace ccsim {

namespace {

// (channel, rank, bank, row) packed for map keys
uint64_t row_key(const RowEvent& e) {
  return (uint64_t(uint16_t(e.channel)) << 48) ^
         (uint64_t(uint16_t(e.rank)) << 40) ^ (uint64_t(uint16_t(e.bank)) << 32) ^
         uint64_t(e.row);
}

}  // namespace

RltlHistogram compute_rltl(const EventLog& log,
                           const std::vector<Cycle>& windows) {
  RltlHistogram h;
  h.windows = windows;
  h.qualifying.assign(windows.size(), 0);

  std::unordered_map<uint64_t, Cycle> last_pre;
  last_pre.reserve(1024);

  Cycle prev_cycle = kNever;
  for (const auto& ev : log.events) {
    if (ev.cycle < prev_cycle)
      throw InputError("event log is not cycle-ordered");
    prev_cycle = ev.cycle;

    const uint64_t key = row_key(ev);
    if (ev.kind == RowEventKind::Pre) {
      last_pre[key] = ev.cycle;
      continue;
    }
    if (ev.cycle < log.measure_from) continue;  // context only

    h.total_activations++;
    auto it = last_pre.find(key);
    if (it == last_pre.end()) {
      h.first_touch++;
      continue;
    }
    const Cycle gap = ev.cycle - it->second;
    for (size_t i = 0; i < windows.size(); ++i)
      if (gap <= windows[i]) h.qualifying[i]++;
  }
  return h;
}

double compute_refresh_locality(const EventLog& log,
                                const RefreshTimeline& refresh, Cycle window) {
  if (refresh.trefi <= 0)
    throw InputError("refresh bookkeeping missing (trefi unset)");

  // current timestamp per (channel, rank, group), replayed in cycle order
  const size_t n_ranks = size_t(refresh.channels) * size_t(refresh.ranks);
  std::vector<std::vector<Cycle>> stamp(n_ranks);
  for (auto& v : stamp) {
    v.resize(size_t(refresh.groups));
    for (int64_t g = 0; g < refresh.groups; ++g)
      v[size_t(g)] = refresh.initial_timestamp(g);
  }

  size_t ri = 0;
  uint64_t acts = 0, qualifying = 0;
  for (const auto& ev : log.events) {
    while (ri < refresh.events.size() &&
           refresh.events[ri].cycle <= ev.cycle) {
      const auto& re = refresh.events[ri];
      stamp[size_t(re.channel) * size_t(refresh.ranks) + size_t(re.rank)]
           [size_t(re.group)] = re.cycle;
      ri++;
    }
    if (ev.kind != RowEventKind::Act || ev.cycle < log.measure_from) continue;
    acts++;
    const Cycle last =
        stamp[size_t(ev.channel) * size_t(refresh.ranks) + size_t(ev.rank)]
             [size_t(ev.row / refresh.rows_per_group)];
    if (ev.cycle - last <= window) qualifying++;
  }
  return acts == 0 ? 0.0 : double(qualifying) / double(acts);
}

double weighted_speedup(const std::vector<double>& shared_ipc,
                        const std::vector<double>& alone_ipc) {
  if (shared_ipc.size() != alone_ipc.size())
    throw InputError("weighted_speedup: per-core IPC lists differ in length");
  double ws = 0;
  for (size_t i = 0; i < shared_ipc.size(); ++i) {
    if (alone_ipc[i] <= 0.0)
      throw InputError("weighted_speedup: alone IPC of core " +
                       std::to_string(i) + " is not positive");
    ws += shared_ipc[i] / alone_ipc[i];
  }
  return ws;
}

void EnergyModel::collect_problems(std::vector<std::string>& out) const {
  auto chk = [&](double v, const char* name) {
    if (v < 0) out.push_back(std::string("energy.") + name + " must be >= 0");
  };
  chk(act_pre_nj, "act_pre_nj");
  chk(read_nj, "read_nj");
  chk(write_nj, "write_nj");
  chk(ref_nj, "ref_nj");
  chk(standby_mw_per_rank, "standby_mw_per_rank");
  chk(active_mw_per_rank, "active_mw_per_rank");
  chk(advisor_mw, "advisor_mw");
}

EnergyBreakdown compute_energy(const CommandCounts& counts,
                               Cycle elapsed_cycles, Cycle rank_active_cycles,
                               int total_ranks, int cpu_mhz,
                               const EnergyModel& model) {
  EnergyBreakdown e;
  // cycle time in us is 1/cpu_mhz; mW * us = nJ
  const double us_per_cycle = 1.0 / double(cpu_mhz);
  const double elapsed_us = double(elapsed_cycles) * us_per_cycle;
  const double active_us = double(rank_active_cycles) * us_per_cycle;
  const double standby_us = double(total_ranks) * elapsed_us - active_us;

  e.activation_nj = double(counts.act) * model.act_pre_nj;
  e.read_nj = double(counts.read) * model.read_nj;
  e.write_nj = double(counts.write) * model.write_nj;
  e.refresh_nj = double(counts.ref) * model.ref_nj;
  e.background_standby_nj = standby_us * model.standby_mw_per_rank;
  e.background_active_nj = active_us * model.active_mw_per_rank;
  e.advisor_nj = elapsed_us * model.advisor_mw;
  e.total_nj = e.activation_nj + e.read_nj + e.write_nj + e.refresh_nj +
               e.background_standby_nj + e.background_active_nj + e.advisor_nj;
  return e;
}

std::string SimReport::to_json() const {
  using json = nlohmann::ordered_json;
  json j;
  j["measured_cycles"] = measured_cycles;
  j["warmup_cycles"] = warmup_cycles;
  j["advisor"] = advisor_name;
  j["seed"] = seed;
  j["ipc"] = ipc;
  if (ws)
    j["weighted_speedup"] = *ws;
  else
    j["weighted_speedup"] = nullptr;
  j["rmpkc"] = rmpkc;
  j["hit_rate"] = hit_rate;
  j["activations"] = activations;
  j["hits"] = {{"chargecache", hits_chargecache},
               {"nuat", hits_nuat},
               {"lldram", hits_lldram}};
  {
    json r;
    r["windows_ms"] = rltl_windows_ms;
    r["windows_cycles"] = rltl.windows;
    r["qualifying"] = rltl.qualifying;
    r["fractions"] = json::array();
    for (size_t i = 0; i < rltl.windows.size(); ++i)
      r["fractions"].push_back(rltl.fraction(i));
    r["total_activations"] = rltl.total_activations;
    r["first_touch"] = rltl.first_touch;
    j["rltl"] = r;
  }
  j["refresh_locality"] = {{"window_ms", refresh_locality_window_ms},
                           {"fraction", refresh_locality}};
  j["commands"] = {{"ACT", commands.act},   {"PRE", commands.pre},
                   {"PREA", commands.prea}, {"READ", commands.read},
                   {"WRITE", commands.write}, {"REF", commands.ref},
                   {"rows_closed", commands.rows_closed}};
  j["energy_nj"] = {{"activation", energy.activation_nj},
                    {"read", energy.read_nj},
                    {"write", energy.write_nj},
                    {"refresh", energy.refresh_nj},
                    {"background_standby", energy.background_standby_nj},
                    {"background_active", energy.background_active_nj},
                    {"advisor", energy.advisor_nj},
                    {"total", energy.total_nj}};
  j["storage_bits"] = storage_bits;
  j["max_entry_residency"] = max_entry_residency;
  j["advisor_window_cycles"] = advisor_window_cycles;
  j["max_request_latency"] = max_request_latency;
  j["min_read_latency"] = min_read_latency;
  j["refresh_deferral_warnings"] = refresh_deferral_warnings;
  j["state_hash"] = state_hash;
  j["config"] = config_echo;
  return j.dump(2) + "\n";
}

}  // namespace ccsim
