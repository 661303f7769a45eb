#include "ccsim/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ccsim/controller.hpp"

namespace ccsim {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(const std::string& name, size_t lineno,
                             const std::string& why) {
  throw InputError(name + ":" + std::to_string(lineno) + ": " + why);
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in,
                                     const std::string& name) {
  std::vector<TraceRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;

    const auto toks = split_ws(line);
    if (toks.size() != 3)
      parse_fail(name, lineno, "expected `<bubbles> <R|W> <0xaddr>`, got " +
                                   std::to_string(toks.size()) + " fields");
    TraceRecord rec;
    {
      const auto& t = toks[0];
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(),
                                     rec.bubble_count);
      if (ec != std::errc() || p != t.data() + t.size() || rec.bubble_count < 0)
        parse_fail(name, lineno, "bad bubble count '" + t + "'");
    }
    if (toks[1] == "R") {
      rec.is_write = false;
    } else if (toks[1] == "W") {
      rec.is_write = true;
    } else {
      parse_fail(name, lineno, "bad access kind '" + toks[1] + "'");
    }
    {
      const auto& t = toks[2];
      if (t.size() < 3 || t[0] != '0' || (t[1] != 'x' && t[1] != 'X'))
        parse_fail(name, lineno, "address must be 0x-prefixed hex, got '" + t + "'");
      auto [p, ec] =
          std::from_chars(t.data() + 2, t.data() + t.size(), rec.address, 16);
      if (ec != std::errc() || p != t.data() + t.size())
        parse_fail(name, lineno, "bad hex address '" + t + "'");
    }
    records.push_back(rec);
  }
  return records;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file: " + path);
  return parse_trace(in, path);
}

std::string serialize_trace(const std::vector<TraceRecord>& records) {
  std::string out;
  char buf[64];
  for (const auto& r : records) {
    snprintf(buf, sizeof buf, "%lld %c 0x%llx\n",
             (long long)r.bubble_count, r.is_write ? 'W' : 'R',
             (unsigned long long)r.address);
    out += buf;
  }
  return out;
}

void write_trace_file(const std::string& path,
                      const std::vector<TraceRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output trace file: " + path);
  out << serialize_trace(records);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Stream: return "stream";
    case GeneratorKind::RandomUniform: return "random_uniform";
    case GeneratorKind::BankConflict: return "bank_conflict";
    case GeneratorKind::RowReuse: return "row_reuse";
  }
  return "?";
}

namespace {

std::optional<GeneratorKind> kind_from_string(const std::string& s) {
  if (s == "stream") return GeneratorKind::Stream;
  if (s == "random_uniform") return GeneratorKind::RandomUniform;
  if (s == "bank_conflict") return GeneratorKind::BankConflict;
  if (s == "row_reuse") return GeneratorKind::RowReuse;
  return std::nullopt;
}

int64_t to_i64(const std::string& key, const std::string& v) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("generator spec: bad integer for '" + key + "': " + v);
  return out;
}

double to_f64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("generator spec: bad number for '" + key + "': " + v);
  }
}

}  // namespace

void GeneratorParams::collect_problems(std::vector<std::string>& out,
                                       const std::string& label) const {
  if (length < 1) out.push_back(label + ": length must be >= 1");
  if (bubbles < 0) out.push_back(label + ": bubbles must be >= 0");
  if (bubble_jitter < 0) out.push_back(label + ": jitter must be >= 0");
  if (write_fraction < 0.0 || write_fraction > 1.0)
    out.push_back(label + ": writes must be within [0,1]");
  if (kind == GeneratorKind::BankConflict && conflict_rows < 2)
    out.push_back(label + ": bank_conflict needs rows >= 2");
  if (kind == GeneratorKind::RowReuse) {
    if (reuse_probability < 0.0 || reuse_probability > 1.0)
      out.push_back(label + ": p must be within [0,1]");
    if (reuse_window < 1) out.push_back(label + ": window must be >= 1");
    if (row_universe < 1) out.push_back(label + ": universe must be >= 1");
    if (banks_touched < 0) out.push_back(label + ": banks must be >= 0");
  }
}

GeneratorParams parse_generator_spec(const std::string& spec) {
  std::string body = spec;
  if (body.rfind("gen:", 0) == 0) body = body.substr(4);

  std::vector<std::string> parts;
  std::string cur;
  for (char c : body) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.empty() || parts[0].empty())
    throw ConfigError("generator spec: missing kind in '" + spec + "'");

  GeneratorParams p;
  auto kind = kind_from_string(parts[0]);
  if (!kind)
    throw ConfigError("generator spec: unknown kind '" + parts[0] + "'");
  p.kind = *kind;

  for (size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos)
      throw ConfigError("generator spec: expected key=value, got '" + parts[i] + "'");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "length") p.length = to_i64(key, val);
    else if (key == "range") p.address_range = uint64_t(to_i64(key, val));
    else if (key == "bubbles") p.bubbles = to_i64(key, val);
    else if (key == "jitter") p.bubble_jitter = to_i64(key, val);
    else if (key == "writes") p.write_fraction = to_f64(key, val);
    else if (key == "rows") p.conflict_rows = to_i64(key, val);
    else if (key == "p") p.reuse_probability = to_f64(key, val);
    else if (key == "window") p.reuse_window = to_i64(key, val);
    else if (key == "universe") p.row_universe = to_i64(key, val);
    else if (key == "banks") p.banks_touched = int(to_i64(key, val));
    else throw ConfigError("generator spec: unknown key '" + key + "'");
  }

  std::vector<std::string> problems;
  p.collect_problems(problems, "generator spec '" + spec + "'");
  if (!problems.empty()) throw ConfigError(problems);
  return p;
}

std::string serialize_generator_spec(const GeneratorParams& p) {
  std::string s = "gen:";
  s += to_string(p.kind);
  char buf[96];
  auto add_i = [&](const char* k, int64_t v) {
    snprintf(buf, sizeof buf, ",%s=%lld", k, (long long)v);
    s += buf;
  };
  auto add_f = [&](const char* k, double v) {
    snprintf(buf, sizeof buf, ",%s=%.6g", k, v);
    s += buf;
  };
  add_i("length", p.length);
  if (p.address_range) add_i("range", int64_t(p.address_range));
  add_i("bubbles", p.bubbles);
  if (p.bubble_jitter) add_i("jitter", p.bubble_jitter);
  if (p.write_fraction > 0) add_f("writes", p.write_fraction);
  if (p.kind == GeneratorKind::BankConflict) add_i("rows", p.conflict_rows);
  if (p.kind == GeneratorKind::RowReuse) {
    add_f("p", p.reuse_probability);
    add_i("window", p.reuse_window);
    add_i("universe", p.row_universe);
    if (p.banks_touched) add_i("banks", p.banks_touched);
  }
  return s;
}

std::string TraceSource::spec_string() const {
  if (is_file()) return "file:" + std::get<std::string>(source);
  return serialize_generator_spec(std::get<GeneratorParams>(source));
}

TraceSource parse_trace_source(const std::string& text) {
  TraceSource src;
  if (text.rfind("file:", 0) == 0) {
    src.source = text.substr(5);
  } else if (text.rfind("gen:", 0) == 0) {
    src.source = parse_generator_spec(text);
  } else {
    throw ConfigError("trace source must start with file: or gen:, got '" +
                      text + "'");
  }
  return src;
}

TraceSource default_trace_source() {
  return parse_trace_source(
      "gen:row_reuse,length=50000,bubbles=8,p=0.6,window=32,universe=4096");
}

std::vector<TraceRecord> gen_synthetic(const GeneratorParams& params,
                                       const DramGeometry& geometry,
                                       const MappingConfig& mapping,
                                       uint64_t seed) {
  std::vector<std::string> problems;
  params.collect_problems(problems, "generator");
  if (!problems.empty()) throw ConfigError(problems);

  Rng rng(seed);
  std::vector<TraceRecord> out;
  out.reserve(size_t(params.length));

  const uint64_t capacity = geometry.total_bytes();
  const uint64_t range =
      params.address_range == 0 ? capacity
                                : std::min(params.address_range, capacity);
  const uint64_t lines = std::max<uint64_t>(1, range / kCachelineBytes);

  auto bubbles = [&]() -> int64_t {
    if (params.bubble_jitter == 0) return params.bubbles;
    return params.bubbles + int64_t(rng.below(uint64_t(params.bubble_jitter) + 1));
  };
  auto is_write = [&]() {
    return params.write_fraction > 0.0 && rng.unit() < params.write_fraction;
  };
  auto row_address = [&](int64_t row, int bank, int column) {
    AddressParts parts;
    parts.channel = 0;
    parts.rank = 0;
    parts.bank = bank;
    parts.row = row % geometry.rows_per_bank;
    parts.column = column % geometry.columns_per_row;
    return compose_address(parts, geometry, mapping);
  };

  switch (params.kind) {
    case GeneratorKind::Stream: {
      for (int64_t i = 0; i < params.length; ++i) {
        const uint64_t addr = (uint64_t(i) % lines) * kCachelineBytes;
        out.push_back({bubbles(), is_write(), addr});
      }
      break;
    }
    case GeneratorKind::RandomUniform: {
      for (int64_t i = 0; i < params.length; ++i) {
        const uint64_t addr = rng.below(lines) * kCachelineBytes;
        out.push_back({bubbles(), is_write(), addr});
      }
      break;
    }
    case GeneratorKind::BankConflict: {
      // Ping-pong over a small row set within bank 0 so every activation
      // after the first visits a row that was just precharged.
      for (int64_t i = 0; i < params.length; ++i) {
        const int64_t row = i % params.conflict_rows;
        out.push_back({bubbles(), is_write(), row_address(row, 0, 0)});
      }
      break;
    }
    case GeneratorKind::RowReuse: {
      const int banks = params.banks_touched > 0
                            ? std::min(params.banks_touched, geometry.banks_per_rank)
                            : geometry.banks_per_rank;
      std::vector<int64_t> recent;  // ring of recently issued row keys
      size_t ring_pos = 0;
      for (int64_t i = 0; i < params.length; ++i) {
        int64_t key;
        if (!recent.empty() && rng.unit() < params.reuse_probability) {
          key = recent[rng.below(recent.size())];
        } else {
          key = int64_t(rng.below(uint64_t(params.row_universe)));
        }
        if (recent.size() < size_t(params.reuse_window)) {
          recent.push_back(key);
        } else {
          recent[ring_pos] = key;
          ring_pos = (ring_pos + 1) % recent.size();
        }
        const int bank = int(key % banks);
        const int64_t row = key / banks;
        const int column = int(rng.below(uint64_t(geometry.columns_per_row)));
        out.push_back({bubbles(), is_write(), row_address(row, bank, column)});
      }
      break;
    }
  }
  return out;
}

}  // namespace ccsim
