#include "ccsim/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ccsim {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct KV {
  std::string section;
  std::string key;
  std::string value;
  size_t line;
};

std::vector<KV> parse_kv_lines(const std::string& text,
                               std::vector<std::string>& errors) {
  std::vector<KV> out;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) +
                         ": unterminated section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) +
                       ": expected `key = value`");
      continue;
    }
    if (section.empty()) {
      errors.push_back("line " + std::to_string(lineno) +
                       ": key outside of any [section]");
      continue;
    }
    out.push_back(
        {section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
  }
  return out;
}

struct Binder {
  std::vector<std::string>& errors;

  bool to_i64(const KV& kv, int64_t& out) {
    auto [p, ec] =
        std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), out);
    if (ec != std::errc() || p != kv.value.data() + kv.value.size()) {
      fail(kv, "expected integer");
      return false;
    }
    return true;
  }
  bool to_int(const KV& kv, int& out) {
    int64_t v;
    if (!to_i64(kv, v)) return false;
    out = int(v);
    return true;
  }
  bool to_u64(const KV& kv, uint64_t& out) {
    auto [p, ec] =
        std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), out);
    if (ec != std::errc() || p != kv.value.data() + kv.value.size()) {
      fail(kv, "expected unsigned integer");
      return false;
    }
    return true;
  }
  bool to_f64(const KV& kv_like, const std::string& token, double& out) {
    try {
      size_t pos = 0;
      out = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      return true;
    } catch (const std::exception&) {
      fail(kv_like, "expected number, got '" + token + "'");
      return false;
    }
  }
  bool to_bool(const KV& kv, bool& out) {
    if (kv.value == "true" || kv.value == "1") {
      out = true;
      return true;
    }
    if (kv.value == "false" || kv.value == "0") {
      out = false;
      return true;
    }
    fail(kv, "expected true/false");
    return false;
  }
  std::vector<std::string> tokens(const KV& kv) {
    std::vector<std::string> out;
    std::istringstream is(kv.value);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
  }
  bool to_f64_list(const KV& kv, std::vector<double>& out) {
    out.clear();
    for (const auto& t : tokens(kv)) {
      double v;
      if (!to_f64(kv, t, v)) return false;
      out.push_back(v);
    }
    return true;
  }
  void fail(const KV& kv, const std::string& why) {
    errors.push_back("line " + std::to_string(kv.line) + " [" + kv.section +
                     "] " + kv.key + ": " + why);
  }
};

}  // namespace

std::vector<TraceSource> RunConfig::workload_per_core() const {
  if (workload.empty())
    throw ConfigError("workload has no trace sources");
  if (int(workload.size()) == cores) return workload;
  if (workload.size() == 1)
    return std::vector<TraceSource>(size_t(cores), workload[0]);
  throw ConfigError("workload source count does not match core count");
}

std::vector<ActTiming> RunConfig::variant_timings_cpu() const {
  std::vector<ActTiming> out;
  for (size_t i = 0; i < reduction.rows.size(); ++i)
    out.push_back(
        reduction.row_timing(int(i), timing.bus_freq_mhz, clock_ratio()));
  return out;
}

std::vector<std::string> RunConfig::problems() const {
  std::vector<std::string> out;
  geometry.collect_problems(out);
  timing.collect_problems(out);
  reduction.collect_problems(out, timing);
  controller.collect_problems(out);
  advisor.collect_problems(out, reduction);
  core.collect_problems(out);
  energy.collect_problems(out);

  if (cores < 1) out.push_back("cores.count must be >= 1");
  if (cpu_freq_mhz < 1) out.push_back("cores.cpu_freq_mhz must be >= 1");
  if (timing.bus_freq_mhz >= 1 && cpu_freq_mhz >= 1) {
    if (cpu_freq_mhz % timing.bus_freq_mhz != 0)
      out.push_back("cpu_freq_mhz must be an integer multiple of bus_freq_mhz");
    else if (cpu_freq_mhz / timing.bus_freq_mhz < 1)
      out.push_back("cpu_freq_mhz must be >= bus_freq_mhz");
  }
  if (warmup_cycles < 0) out.push_back("cores.warmup_cycles must be >= 0");

  if (workload.empty()) {
    out.push_back("workload needs at least one `core = ...` source");
  } else if (int(workload.size()) != cores && workload.size() != 1) {
    out.push_back("workload has " + std::to_string(workload.size()) +
                  " sources for " + std::to_string(cores) + " cores");
  }
  for (const auto& src : workload) {
    if (!src.is_file()) {
      std::vector<std::string> gp;
      std::get<GeneratorParams>(src.source).collect_problems(gp, "workload");
      out.insert(out.end(), gp.begin(), gp.end());
    }
  }
  if (!alone_ipc.empty() && int(alone_ipc.size()) != cores)
    out.push_back("workload.alone_ipc length must equal core count");
  for (double v : alone_ipc)
    if (v <= 0) out.push_back("workload.alone_ipc values must be positive");

  if (rltl_windows_ms.empty())
    out.push_back("metrics.rltl_windows_ms must not be empty");
  for (size_t i = 0; i < rltl_windows_ms.size(); ++i) {
    if (rltl_windows_ms[i] <= 0)
      out.push_back("metrics.rltl_windows_ms values must be positive");
    if (i > 0 && rltl_windows_ms[i - 1] >= rltl_windows_ms[i])
      out.push_back("metrics.rltl_windows_ms must be strictly increasing");
  }
  if (refresh_window_ms <= 0)
    out.push_back("metrics.refresh_window_ms must be positive");

  if (retention_ms <= 0) out.push_back("sim.retention_ms must be positive");
  if (ref_groups < 1 || !is_pow2(uint64_t(ref_groups)))
    out.push_back("sim.ref_groups must be a power of two >= 1");

  // The refresh wheel must cover every row within the retention window.
  if (timing.trefi >= 1 && timing.bus_freq_mhz >= 1 && cpu_freq_mhz >= 1 &&
      cpu_freq_mhz % timing.bus_freq_mhz == 0 && ref_groups >= 1 &&
      geometry.rows_per_bank >= 1 && is_pow2(uint64_t(ref_groups)) &&
      is_pow2(uint64_t(geometry.rows_per_bank)) && retention_ms > 0) {
    int64_t rows_per_ref = geometry.rows_per_bank / ref_groups;
    if (rows_per_ref < 1) rows_per_ref = 1;
    const int64_t groups = geometry.rows_per_bank / rows_per_ref;
    const Cycle wheel = timing.trefi * clock_ratio() * groups;
    if (wheel > ms_to_cycles(retention_ms))
      out.push_back("refresh wheel (trefi * groups) exceeds the retention window");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string RunConfig::serialize() const {
  std::ostringstream o;
  o << "[geometry]\n";
  o << "channels = " << geometry.channels << "\n";
  o << "ranks_per_channel = " << geometry.ranks_per_channel << "\n";
  o << "banks_per_rank = " << geometry.banks_per_rank << "\n";
  o << "rows_per_bank = " << geometry.rows_per_bank << "\n";
  o << "columns_per_row = " << geometry.columns_per_row << "\n";
  o << "row_buffer_bytes = " << geometry.row_buffer_bytes << "\n";
  o << "\n[timing]\n";
  o << "# bus cycles at bus_freq_mhz\n";
  o << "trcd = " << timing.trcd << "\n";
  o << "tras = " << timing.tras << "\n";
  o << "trp = " << timing.trp << "\n";
  o << "tcl = " << timing.tcl << "\n";
  o << "tcwl = " << timing.tcwl << "\n";
  o << "tbl = " << timing.tbl << "\n";
  o << "trfc = " << timing.trfc << "\n";
  o << "trefi = " << timing.trefi << "\n";
  o << "bus_freq_mhz = " << timing.bus_freq_mhz << "\n";
  o << "\n[reduction_table]\n";
  o << "# ns values, converted to cycles rounding up\n";
  o << "baseline = " << fmt_double(reduction.baseline_trcd_ns) << " "
    << fmt_double(reduction.baseline_tras_ns) << "\n";
  for (const auto& r : reduction.rows)
    o << "row = " << fmt_double(r.duration_ms) << " " << fmt_double(r.trcd_ns)
      << " " << fmt_double(r.tras_ns) << "\n";
  o << "\n[controller]\n";
  o << "policy = " << to_string(controller.policy) << "\n";
  o << "read_queue = " << controller.read_queue_size << "\n";
  o << "write_queue = " << controller.write_queue_size << "\n";
  o << "write_high_watermark = " << controller.write_high_watermark << "\n";
  o << "write_low_watermark = " << controller.write_low_watermark << "\n";
  o << "mapping = " << to_string(controller.mapping.scheme) << "\n";
  o << "\n[advisor]\n";
  o << "kind = " << to_string(advisor.kind) << "\n";
  o << "entries = " << advisor.entries << "\n";
  o << "ways = " << advisor.ways << "\n";
  o << "duration_ms = " << fmt_double(advisor.duration_ms) << "\n";
  o << "invalidate_on_hit = " << (advisor.invalidate_on_hit ? "true" : "false")
    << "\n";
  o << "shared = " << (advisor.shared ? "true" : "false") << "\n";
  o << "nuat_bins_ms =";
  for (double b : advisor.nuat_bins_ms) o << " " << fmt_double(b);
  o << "\n";
  o << "\n[cores]\n";
  o << "count = " << cores << "\n";
  o << "issue_width = " << core.issue_width << "\n";
  o << "window = " << core.window_capacity << "\n";
  o << "mshrs = " << core.mshr_capacity << "\n";
  o << "quota = " << core.quota << "\n";
  o << "cpu_freq_mhz = " << cpu_freq_mhz << "\n";
  o << "warmup_cycles = " << warmup_cycles << "\n";
  o << "\n[workload]\n";
  for (const auto& src : workload) o << "core = " << src.spec_string() << "\n";
  if (!alone_ipc.empty()) {
    o << "alone_ipc =";
    for (double v : alone_ipc) o << " " << fmt_double(v);
    o << "\n";
  }
  o << "\n[energy]\n";
  o << "act_pre_nj = " << fmt_double(energy.act_pre_nj) << "\n";
  o << "read_nj = " << fmt_double(energy.read_nj) << "\n";
  o << "write_nj = " << fmt_double(energy.write_nj) << "\n";
  o << "ref_nj = " << fmt_double(energy.ref_nj) << "\n";
  o << "standby_mw_per_rank = " << fmt_double(energy.standby_mw_per_rank) << "\n";
  o << "active_mw_per_rank = " << fmt_double(energy.active_mw_per_rank) << "\n";
  o << "advisor_mw = " << fmt_double(energy.advisor_mw) << "\n";
  o << "\n[metrics]\n";
  o << "rltl_windows_ms =";
  for (double w : rltl_windows_ms) o << " " << fmt_double(w);
  o << "\n";
  o << "refresh_window_ms = " << fmt_double(refresh_window_ms) << "\n";
  o << "\n[sim]\n";
  o << "seed = " << seed << "\n";
  o << "retention_ms = " << fmt_double(retention_ms) << "\n";
  o << "ref_groups = " << ref_groups << "\n";
  o << "validate = " << (validate_run ? "true" : "false") << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

bool bind_kv(RunConfig& c, const KV& kv, Binder& b, bool& workload_cleared) {
  const std::string& s = kv.section;
  const std::string& k = kv.key;
  if (s == "geometry") {
    if (k == "channels") return b.to_int(kv, c.geometry.channels);
    if (k == "ranks_per_channel") return b.to_int(kv, c.geometry.ranks_per_channel);
    if (k == "banks_per_rank") return b.to_int(kv, c.geometry.banks_per_rank);
    if (k == "rows_per_bank") return b.to_i64(kv, c.geometry.rows_per_bank);
    if (k == "columns_per_row") return b.to_int(kv, c.geometry.columns_per_row);
    if (k == "row_buffer_bytes") return b.to_int(kv, c.geometry.row_buffer_bytes);
  } else if (s == "timing") {
    if (k == "trcd") return b.to_i64(kv, c.timing.trcd);
    if (k == "tras") return b.to_i64(kv, c.timing.tras);
    if (k == "trp") return b.to_i64(kv, c.timing.trp);
    if (k == "tcl") return b.to_i64(kv, c.timing.tcl);
    if (k == "tcwl") return b.to_i64(kv, c.timing.tcwl);
    if (k == "tbl") return b.to_i64(kv, c.timing.tbl);
    if (k == "trfc") return b.to_i64(kv, c.timing.trfc);
    if (k == "trefi") return b.to_i64(kv, c.timing.trefi);
    if (k == "bus_freq_mhz") return b.to_int(kv, c.timing.bus_freq_mhz);
  } else if (s == "reduction_table") {
    const auto toks = b.tokens(kv);
    if (k == "baseline") {
      if (toks.size() != 2) {
        b.fail(kv, "expected `<trcd_ns> <tras_ns>`");
        return false;
      }
      return b.to_f64(kv, toks[0], c.reduction.baseline_trcd_ns) &&
             b.to_f64(kv, toks[1], c.reduction.baseline_tras_ns);
    }
    if (k == "row") {
      if (toks.size() != 3) {
        b.fail(kv, "expected `<duration_ms> <trcd_ns> <tras_ns>`");
        return false;
      }
      ReductionRow r;
      if (!b.to_f64(kv, toks[0], r.duration_ms) ||
          !b.to_f64(kv, toks[1], r.trcd_ns) || !b.to_f64(kv, toks[2], r.tras_ns))
        return false;
      c.reduction.rows.push_back(r);
      return true;
    }
  } else if (s == "controller") {
    if (k == "policy") {
      auto p = row_policy_from_string(kv.value);
      if (!p) {
        b.fail(kv, "expected open|closed");
        return false;
      }
      c.controller.policy = *p;
      return true;
    }
    if (k == "read_queue") return b.to_int(kv, c.controller.read_queue_size);
    if (k == "write_queue") return b.to_int(kv, c.controller.write_queue_size);
    if (k == "write_high_watermark")
      return b.to_int(kv, c.controller.write_high_watermark);
    if (k == "write_low_watermark")
      return b.to_int(kv, c.controller.write_low_watermark);
    if (k == "mapping") {
      auto m = mapping_scheme_from_string(kv.value);
      if (!m) {
        b.fail(kv, "unknown mapping scheme");
        return false;
      }
      c.controller.mapping.scheme = *m;
      return true;
    }
  } else if (s == "advisor") {
    if (k == "kind") {
      auto a = advisor_kind_from_string(kv.value);
      if (!a) {
        b.fail(kv, "expected none|chargecache|nuat|chargecache+nuat|lldram");
        return false;
      }
      c.advisor.kind = *a;
      return true;
    }
    if (k == "entries") return b.to_int(kv, c.advisor.entries);
    if (k == "ways") return b.to_int(kv, c.advisor.ways);
    if (k == "duration_ms") return b.to_f64(kv, kv.value, c.advisor.duration_ms);
    if (k == "invalidate_on_hit") return b.to_bool(kv, c.advisor.invalidate_on_hit);
    if (k == "shared") return b.to_bool(kv, c.advisor.shared);
    if (k == "nuat_bins_ms") return b.to_f64_list(kv, c.advisor.nuat_bins_ms);
  } else if (s == "cores") {
    if (k == "count") return b.to_int(kv, c.cores);
    if (k == "issue_width") return b.to_int(kv, c.core.issue_width);
    if (k == "window") return b.to_int(kv, c.core.window_capacity);
    if (k == "mshrs") return b.to_int(kv, c.core.mshr_capacity);
    if (k == "quota") return b.to_i64(kv, c.core.quota);
    if (k == "cpu_freq_mhz") return b.to_int(kv, c.cpu_freq_mhz);
    if (k == "warmup_cycles") return b.to_i64(kv, c.warmup_cycles);
  } else if (s == "workload") {
    if (k == "core") {
      if (!workload_cleared) {
        c.workload.clear();
        workload_cleared = true;
      }
      try {
        c.workload.push_back(parse_trace_source(kv.value));
      } catch (const ConfigError& e) {
        b.fail(kv, e.what());
        return false;
      }
      return true;
    }
    if (k == "alone_ipc") return b.to_f64_list(kv, c.alone_ipc);
  } else if (s == "energy") {
    if (k == "act_pre_nj") return b.to_f64(kv, kv.value, c.energy.act_pre_nj);
    if (k == "read_nj") return b.to_f64(kv, kv.value, c.energy.read_nj);
    if (k == "write_nj") return b.to_f64(kv, kv.value, c.energy.write_nj);
    if (k == "ref_nj") return b.to_f64(kv, kv.value, c.energy.ref_nj);
    if (k == "standby_mw_per_rank")
      return b.to_f64(kv, kv.value, c.energy.standby_mw_per_rank);
    if (k == "active_mw_per_rank")
      return b.to_f64(kv, kv.value, c.energy.active_mw_per_rank);
    if (k == "advisor_mw") return b.to_f64(kv, kv.value, c.energy.advisor_mw);
  } else if (s == "metrics") {
    if (k == "rltl_windows_ms") return b.to_f64_list(kv, c.rltl_windows_ms);
    if (k == "refresh_window_ms")
      return b.to_f64(kv, kv.value, c.refresh_window_ms);
  } else if (s == "sim") {
    if (k == "seed") return b.to_u64(kv, c.seed);
    if (k == "retention_ms") return b.to_f64(kv, kv.value, c.retention_ms);
    if (k == "ref_groups") return b.to_i64(kv, c.ref_groups);
    if (k == "validate") return b.to_bool(kv, c.validate_run);
  } else {
    b.fail(kv, "unknown section");
    return false;
  }
  b.fail(kv, "unknown key");
  return false;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  const auto kvs = parse_kv_lines(text, errors);

  RunConfig cfg;
  bool workload_cleared = false;
  bool reduction_cleared = false;
  Binder binder{errors};
  for (const auto& kv : kvs) {
    // Replace (not append to) the default reduction rows on first mention.
    if (kv.section == "reduction_table" && kv.key == "row" &&
        !reduction_cleared) {
      cfg.reduction.rows.clear();
      reduction_cleared = true;
    }
    bind_kv(cfg, kv, binder, workload_cleared);
  }
  if (!errors.empty()) throw ConfigError(errors);

  auto problems = cfg.problems();
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const size_t dot = assignment.find('.');
  const size_t eq = assignment.find('=');
  if (dot == std::string::npos || eq == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value: " +
                      assignment);
  std::vector<std::string> errors;
  KV kv{assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
        assignment.substr(eq + 1), 0};
  kv.key = trim(kv.key);
  kv.value = trim(kv.value);
  Binder binder{errors};
  bool workload_cleared = false;
  if (kv.section == "reduction_table" && kv.key == "row")
    throw ConfigError("reduction_table rows cannot be overridden on the command line");
  bind_kv(cfg, kv, binder, workload_cleared);
  if (!errors.empty()) throw ConfigError(errors);
}

}  // namespace ccsim
