#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccsim {

// Simulation time in cycles. Signed so that "never happened" timestamps and
// pre-run refresh history can sit below zero.
using Cycle = int64_t;

// Far enough in the past that `now - kNever` cannot overflow for any
// realistic run length.
inline constexpr Cycle kNever = std::numeric_limits<Cycle>::min() / 4;

inline constexpr int kCachelineBytes = 64;

// ---------------------------------------------------------------------------
// Errors. The CLI maps these to exit codes: ConfigError -> 2,
// InputError -> 3, InternalError -> 4.
// ---------------------------------------------------------------------------

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  explicit ConfigError(const std::string& one)
      : ConfigError(std::vector<std::string>{one}) {}
  const std::vector<std::string>& problems() const { return problems_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "config error:";
    for (const auto& p : v) {
      s += "\n  - ";
      s += p;
    }
    return s;
  }
  std::vector<std::string> problems_;
};

class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a DRAM command is applied in violation of a timing constraint.
// Carries the constraint name and how many cycles short the command was.
class ProtocolError : public InternalError {
public:
  ProtocolError(std::string constraint, Cycle deficit)
      : InternalError("timing protocol violation: " + constraint +
                      " short by " + std::to_string(deficit) + " cycles"),
        constraint_(std::move(constraint)), deficit_(deficit) {}
  const std::string& constraint() const { return constraint_; }
  Cycle deficit() const { return deficit_; }

private:
  std::string constraint_;
  Cycle deficit_;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct DramGeometry {
  int channels = 1;
  int ranks_per_channel = 1;
  int banks_per_rank = 8;
  int64_t rows_per_bank = 65536;
  int columns_per_row = 128;  // cacheline-sized columns
  int row_buffer_bytes = 8192;

  uint64_t total_bytes() const {
    return uint64_t(channels) * ranks_per_channel * banks_per_rank *
           uint64_t(rows_per_bank) * columns_per_row * kCachelineBytes;
  }

  void collect_problems(std::vector<std::string>& out) const;
  void validate() const {
    std::vector<std::string> p;
    collect_problems(p);
    if (!p.empty()) throw ConfigError(p);
  }
};

bool is_pow2(uint64_t v);
int log2_exact(uint64_t v);  // throws ConfigError if v is not a power of two

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

// One set of DRAM timing constraints. Values are plain cycle counts in
// whatever clock domain the caller works in; the bank state machine only
// compares timestamps against them. Config files carry bus-clock values,
// the simulator scales them to CPU cycles.
struct TimingParams {
  Cycle trcd = 11;
  Cycle tras = 28;
  Cycle trp = 11;
  Cycle tcl = 11;
  Cycle tcwl = 8;
  Cycle tbl = 4;
  Cycle trfc = 208;
  Cycle trefi = 6240;
  int bus_freq_mhz = 800;

  TimingParams scaled(Cycle factor) const {
    TimingParams t = *this;
    t.trcd *= factor;
    t.tras *= factor;
    t.trp *= factor;
    t.tcl *= factor;
    t.tcwl *= factor;
    t.tbl *= factor;
    t.trfc *= factor;
    t.trefi *= factor;
    return t;
  }

  void collect_problems(std::vector<std::string>& out,
                        const std::string& label = "timing") const;
};

// The activation-latency pair latched by a bank at ACT time. READ/WRITE and
// PRE legality on that bank follow this latched pair until the next PRE.
struct ActTiming {
  Cycle trcd = 0;
  Cycle tras = 0;
  bool operator==(const ActTiming&) const = default;
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

enum class CommandKind : uint8_t { ACT, PRE, PREA, READ, WRITE, REF };

const char* to_string(CommandKind k);
std::optional<CommandKind> command_kind_from_string(const std::string& s);

struct DramCommand {
  CommandKind kind = CommandKind::ACT;
  int channel = 0;
  int rank = 0;
  int bank = 0;       // -1 for rank-scope commands (PREA, REF)
  int64_t row = -1;   // ACT only
  int column = -1;    // READ/WRITE only
  Cycle issue_cycle = 0;
};

// Decomposed physical address.
struct AddressParts {
  int channel = 0;
  int rank = 0;
  int bank = 0;
  int64_t row = 0;
  int column = 0;
  bool operator==(const AddressParts&) const = default;
};

}  // namespace ccsim
