#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

struct TraceRecord {
  int64_t bubble_count = 0;  // non-memory instructions preceding this access
  bool is_write = false;
  uint64_t address = 0;
  bool operator==(const TraceRecord&) const = default;
};

// Line format: `<bubble_count> <R|W> <hex address>`. `#` starts a comment
// line. Throws InputError with a line number on malformed input.
std::vector<TraceRecord> parse_trace(std::istream& in,
                                     const std::string& name = "<trace>");
std::vector<TraceRecord> parse_trace_file(const std::string& path);

std::string serialize_trace(const std::vector<TraceRecord>& records);
void write_trace_file(const std::string& path,
                      const std::vector<TraceRecord>& records);

// ---------------------------------------------------------------------------
// Synthetic workload generators
// ---------------------------------------------------------------------------

enum class GeneratorKind { Stream, RandomUniform, BankConflict, RowReuse };

const char* to_string(GeneratorKind k);

struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::Stream;
  int64_t length = 10000;       // number of memory records
  uint64_t address_range = 0;   // bytes; 0 = whole configured capacity
  int64_t bubbles = 8;          // non-memory instructions per record
  int64_t bubble_jitter = 0;    // uniform extra bubbles in [0, jitter]
  double write_fraction = 0.0;

  // bank_conflict
  int64_t conflict_rows = 2;

  // row_reuse
  double reuse_probability = 0.5;
  int64_t reuse_window = 16;
  int64_t row_universe = 4096;  // distinct rows the fresh picks come from
  int banks_touched = 0;        // 0 = all banks

  void collect_problems(std::vector<std::string>& out,
                        const std::string& label) const;
};

// `gen:<kind>,key=val,key=val`. Keys: length, range, bubbles, jitter,
// writes, rows, p, window, universe, banks.
GeneratorParams parse_generator_spec(const std::string& spec);
std::string serialize_generator_spec(const GeneratorParams& p);

// Deterministic function of (params, geometry/mapping, seed). The geometry
// and mapping scheme are needed so bank_conflict/row_reuse can compose
// addresses that land where they intend to.
struct MappingConfig;  // from controller.hpp
std::vector<TraceRecord> gen_synthetic(const GeneratorParams& params,
                                       const DramGeometry& geometry,
                                       const MappingConfig& mapping,
                                       uint64_t seed);

// Per-core trace source: a file path or a generator spec.
struct TraceSource {
  std::variant<std::string, GeneratorParams> source;  // path or generator
  bool is_file() const { return source.index() == 0; }
  std::string spec_string() const;
};

TraceSource parse_trace_source(const std::string& text);
TraceSource default_trace_source();

// ---------------------------------------------------------------------------
// Deterministic RNG helpers. std::uniform_int_distribution is not pinned
// across standard libraries, so value reduction is done by hand.
// ---------------------------------------------------------------------------

uint64_t splitmix64(uint64_t& state);

class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
    // warm the state so nearby seeds diverge
    splitmix64(state_);
    splitmix64(state_);
  }
  uint64_t next() { return splitmix64(state_); }
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
  double unit() { return double(next() >> 11) * 0x1.0p-53; }

private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  return splitmix64(s);
}

}  // namespace ccsim
