#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccsim/config.hpp"
#include "ccsim/simulator.hpp"
#include "ccsim/sweep.hpp"
#include "ccsim/trace.hpp"
#include "ccsim/validator.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

ccsim::RunConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             std::optional<uint64_t> seed) {
  ccsim::RunConfig cfg;
  if (!path.empty()) cfg = ccsim::parse_config_file(path);
  for (const auto& ov : overrides) ccsim::apply_override(cfg, ov);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ccsim::InputError("cannot write " + path.string());
  out << content;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int cmd_simulate(const std::string& config_path,
                 const std::vector<std::string>& overrides,
                 std::optional<uint64_t> seed, const std::string& out_dir,
                 bool emit_log, bool validate) {
  ccsim::RunConfig cfg = load_config(config_path, overrides, seed);
  if (validate) cfg.validate_run = true;
  if (emit_log && out_dir.empty())
    throw ccsim::ConfigError("--emit-command-log requires --out <dir>");

  ccsim::SimOutputs out = ccsim::run_simulation(cfg);
  const std::string report = out.report.to_json();
  std::cout << report;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "report.json", report);
    write_file(fs::path(out_dir) / "config.ini", cfg.serialize());
    if (emit_log) {
      std::ofstream log(fs::path(out_dir) / "command_log.txt",
                        std::ios::binary);
      ccsim::write_command_log(log, out.command_log);
    }
  }
  return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& overrides,
              std::optional<uint64_t> seed, const std::string& out_dir,
              const std::string& axis_s, const std::string& values_s,
              int workers) {
  auto axis = ccsim::sweep_axis_from_string(axis_s);
  if (!axis)
    throw ccsim::ConfigError("--axis must be entries|duration|advisor");
  const auto values = split_csv(values_s);

  ccsim::RunConfig base = load_config(config_path, overrides, seed);
  ccsim::SweepResult result = ccsim::run_sweep(base, *axis, values, workers);
  const std::string csv = result.csv();
  std::cout << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "sweep.csv", csv);
    for (const auto& row : result.rows)
      write_file(fs::path(out_dir) /
                     ("report_" + axis_s + "_" + row.value + ".json"),
                 row.report.to_json());
  }
  return 0;
}

int cmd_rltl(const std::string& config_path,
             const std::vector<std::string>& overrides,
             std::optional<uint64_t> seed, const std::string& out_dir,
             const std::string& trace_path, const std::string& cmdlog_path,
             const std::string& windows_s) {
  ccsim::RunConfig cfg = load_config(config_path, overrides, seed);
  if (!windows_s.empty()) {
    cfg.rltl_windows_ms.clear();
    for (const auto& tok : split_csv(windows_s))
      cfg.rltl_windows_ms.push_back(std::stod(tok));
    cfg.validate();
  }

  ccsim::RltlHistogram hist;
  if (!cmdlog_path.empty()) {
    // analysis-only path: no timing simulation
    const auto log = ccsim::read_command_log_file(cmdlog_path);
    const auto events = ccsim::event_log_from_command_log(log);
    std::vector<ccsim::Cycle> windows;
    for (double ms : cfg.rltl_windows_ms)
      windows.push_back(cfg.ms_to_cycles(ms));
    hist = ccsim::compute_rltl(events, windows);
  } else if (!trace_path.empty()) {
    cfg.advisor.kind = ccsim::AdvisorKind::None;
    cfg.cores = 1;
    cfg.workload = {ccsim::parse_trace_source("file:" + trace_path)};
    cfg.validate();
    hist = ccsim::run_simulate(cfg).rltl;
  } else {
    throw ccsim::ConfigError("rltl needs --trace or --cmdlog");
  }

  ordered_json j;
  j["windows_ms"] = cfg.rltl_windows_ms;
  j["fractions"] = ordered_json::array();
  for (size_t i = 0; i < hist.windows.size(); ++i)
    j["fractions"].push_back(hist.fraction(i));
  j["qualifying"] = hist.qualifying;
  j["total_activations"] = hist.total_activations;
  j["first_touch"] = hist.first_touch;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "rltl.json", text);
  }
  return 0;
}

int cmd_gen_trace(const std::string& config_path,
                  const std::vector<std::string>& overrides,
                  std::optional<uint64_t> seed, const std::string& spec,
                  const std::string& out_file) {
  ccsim::RunConfig cfg = load_config(config_path, overrides, seed);
  const auto params = ccsim::parse_generator_spec(spec);
  const auto records = ccsim::gen_synthetic(params, cfg.geometry,
                                            cfg.controller.mapping, cfg.seed);
  ccsim::write_trace_file(out_file, records);
  std::cout << "wrote " << records.size() << " records to " << out_file
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ccsim: trace-driven DDR3 simulator with reduced-latency "
               "activation mechanisms"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  app.add_option("--config", config_path, "run configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override [sim] seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides,
                 "config override, section.key=value (repeatable)");

  auto* sim = app.add_subcommand("simulate", "run one simulation");
  bool emit_log = false, validate = false;
  sim->add_flag("--emit-command-log", emit_log,
                "write the full command log next to the report");
  sim->add_flag("--validate", validate,
                "replay the command log through the protocol validator");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  std::string axis_s, values_s;
  int workers = 0;
  sweep->add_option("--axis", axis_s, "entries|duration|advisor")->required();
  sweep->add_option("--values", values_s, "comma-separated axis values")
      ->required();
  sweep->add_option("--workers", workers, "parallel runs (0 = one per CPU)");

  auto* rltl = app.add_subcommand("rltl", "row-locality analysis");
  std::string trace_path, cmdlog_path, windows_s;
  rltl->add_option("--trace", trace_path, "CPU trace to simulate and analyze");
  rltl->add_option("--cmdlog", cmdlog_path, "command log to analyze directly");
  rltl->add_option("--windows", windows_s, "comma-separated windows in ms");

  auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace");
  std::string spec, out_file;
  gen->add_option("--spec", spec, "generator spec, e.g. gen:row_reuse,length=10000")
      ->required();
  gen->add_option("--out-file", out_file, "trace file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, overrides, seed, out_dir, emit_log,
                          validate);
    if (sweep->parsed())
      return cmd_sweep(config_path, overrides, seed, out_dir, axis_s, values_s,
                       workers);
    if (rltl->parsed())
      return cmd_rltl(config_path, overrides, seed, out_dir, trace_path,
                      cmdlog_path, windows_s);
    if (gen->parsed())
      return cmd_gen_trace(config_path, overrides, seed, spec, out_file);
  } catch (const ccsim::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const ccsim::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ccsim::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
