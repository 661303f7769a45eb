#include "ccsim/types.hpp"

namespace ccsim {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

int log2_exact(uint64_t v) {
  if (!is_pow2(v))
    throw ConfigError("value " + std::to_string(v) + " is not a power of two");
  int n = 0;
  while (v > 1) {
    v >>= 1;
    ++n;
  }
  return n;
}

void DramGeometry::collect_problems(std::vector<std::string>& out) const {
  if (channels < 1) out.push_back("geometry.channels must be >= 1");
  if (ranks_per_channel < 1) out.push_back("geometry.ranks_per_channel must be >= 1");
  if (banks_per_rank < 1) out.push_back("geometry.banks_per_rank must be >= 1");
  if (rows_per_bank < 1) out.push_back("geometry.rows_per_bank must be >= 1");
  if (columns_per_row < 1) out.push_back("geometry.columns_per_row must be >= 1");
  if (banks_per_rank >= 1 && !is_pow2(uint64_t(banks_per_rank)))
    out.push_back("geometry.banks_per_rank must be a power of two");
  if (rows_per_bank >= 1 && !is_pow2(uint64_t(rows_per_bank)))
    out.push_back("geometry.rows_per_bank must be a power of two");
  if (channels >= 1 && !is_pow2(uint64_t(channels)))
    out.push_back("geometry.channels must be a power of two");
  if (ranks_per_channel >= 1 && !is_pow2(uint64_t(ranks_per_channel)))
    out.push_back("geometry.ranks_per_channel must be a power of two");
  if (columns_per_row >= 1 && !is_pow2(uint64_t(columns_per_row)))
    out.push_back("geometry.columns_per_row must be a power of two");
  if (row_buffer_bytes != columns_per_row * kCachelineBytes)
    out.push_back("geometry.row_buffer_bytes must equal columns_per_row * 64");
}

void TimingParams::collect_problems(std::vector<std::string>& out,
                                    const std::string& label) const {
  auto chk = [&](Cycle v, const char* name) {
    if (v < 1) out.push_back(label + "." + name + " must be >= 1");
  };
  chk(trcd, "trcd");
  chk(tras, "tras");
  chk(trp, "trp");
  chk(tcl, "tcl");
  chk(tcwl, "tcwl");
  chk(tbl, "tbl");
  chk(trfc, "trfc");
  chk(trefi, "trefi");
  if (bus_freq_mhz < 1) out.push_back(label + ".bus_freq_mhz must be >= 1");
  if (tras < trcd)
    out.push_back(label + ": tras (" + std::to_string(tras) +
                  ") must be >= trcd (" + std::to_string(trcd) + ")");
}

const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::ACT: return "ACT";
    case CommandKind::PRE: return "PRE";
    case CommandKind::PREA: return "PREA";
    case CommandKind::READ: return "READ";
    case CommandKind::WRITE: return "WRITE";
    case CommandKind::REF: return "REF";
  }
  return "?";
}

std::optional<CommandKind> command_kind_from_string(const std::string& s) {
  if (s == "ACT") return CommandKind::ACT;
  if (s == "PRE") return CommandKind::PRE;
  if (s == "PREA") return CommandKind::PREA;
  if (s == "READ") return CommandKind::READ;
  if (s == "WRITE") return CommandKind::WRITE;
  if (s == "REF") return CommandKind::REF;
  return std::nullopt;
}

}  // namespace ccsim
