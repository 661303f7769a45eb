#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/advisor.hpp"
#include "ccsim/dram.hpp"
#include "ccsim/types.hpp"

namespace ccsim {

// ---------------------------------------------------------------------------
// Address mapping
// ---------------------------------------------------------------------------

// Bit order from most to least significant. Cacheline offset always sits in
// the low 6 bits; column bits come right above it so consecutive lines fill
// a row buffer before moving on.
enum class MappingScheme {
  RowRankBankChannelColumn,  // default
  RowRankChannelBankColumn,
  RowChannelBankRankColumn,
};

const char* to_string(MappingScheme s);
std::optional<MappingScheme> mapping_scheme_from_string(const std::string& s);

struct MappingConfig {
  MappingScheme scheme = MappingScheme::RowRankBankChannelColumn;
};

AddressParts map_address(uint64_t address, const DramGeometry& geo,
                         const MappingConfig& mapping);
uint64_t compose_address(const AddressParts& parts, const DramGeometry& geo,
                         const MappingConfig& mapping);

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

enum class ReqKind : uint8_t { Read, Write };

struct MemoryRequest {
  ReqKind kind = ReqKind::Read;
  uint64_t address = 0;
  AddressParts parts;
  int core_id = 0;
  Cycle arrival = 0;
  uint64_t seq = 0;    // arrival order within the channel, FCFS tie-break
  uint64_t token = 0;  // issuing core's completion handle (reads)
  std::optional<Cycle> completion;
};

enum class RowPolicy : uint8_t { OpenRow, ClosedRow };

const char* to_string(RowPolicy p);
std::optional<RowPolicy> row_policy_from_string(const std::string& s);

struct ControllerConfig {
  RowPolicy policy = RowPolicy::OpenRow;
  int read_queue_size = 64;
  int write_queue_size = 64;
  int write_high_watermark = 32;
  int write_low_watermark = 16;
  MappingConfig mapping;

  void collect_problems(std::vector<std::string>& out) const;
};

// Receives every issued command (for logging/energy) and read completions.
// For ACT, `act_variant` is the latched pair and `reduced_row` the
// reduction-table row that granted it (-1 = standard).
class ControllerHooks {
public:
  virtual ~ControllerHooks() = default;
  virtual void on_command(const DramCommand&, const ActTiming*, int, int) {}
  virtual void on_row_closed(const DramCommand&, int, int64_t, int) {}
  virtual void on_read_done(const MemoryRequest&, Cycle) {}
  virtual void on_write_done(const MemoryRequest&, Cycle) {}
};

// One FR-FCFS controller per channel. Reads are prioritized until the write
// queue hits its high watermark, then writes drain down to the low
// watermark. Refresh owns the rank while a REF is pending: no new
// activations or column accesses are scheduled there until the REF goes out.
class ChannelController {
public:
  // `variant_timings[i]` is the CPU-cycle ActTiming of reduction-table row
  // i; standard timing comes from the DramSystem.
  ChannelController(int channel, const ControllerConfig& cfg, DramSystem& dram,
                    LatencyAdvisor& advisor, ControllerHooks& hooks,
                    std::vector<ActTiming> variant_timings);

  bool can_accept(ReqKind kind) const;
  bool try_enqueue(MemoryRequest req);

  // Called once per bus slot; issues at most one command.
  void tick(Cycle now);

  int read_queue_depth() const { return int(read_q_.size()); }
  int write_queue_depth() const { return int(write_q_.size()); }
  bool idle() const { return read_q_.empty() && write_q_.empty(); }

  Cycle max_request_latency() const { return max_request_latency_; }
  Cycle min_read_latency() const { return min_read_latency_; }
  uint64_t requests_served() const { return requests_served_; }

private:
  struct Candidate {
    size_t index;
    DramCommand cmd;
    bool row_hit;
  };

  DramCommand next_command_for(const MemoryRequest& req, Cycle now) const;
  std::optional<Candidate> pick_fr_fcfs(const std::deque<MemoryRequest>& q,
                                        Cycle now) const;
  bool refresh_duty(Cycle now);
  bool closed_row_duty(Cycle now);
  bool any_pending_hit(int rank, int bank, int64_t row) const;
  void note_closed(const DramCommand& cmd,
                   const std::vector<DramSystem::CloseEvent>& closed, Cycle now);
  // Issues `cmd` for the request at q[index]; removes it when served.
  void issue_for_request(std::deque<MemoryRequest>& q, size_t index,
                         const DramCommand& cmd, Cycle now);

  int channel_;
  ControllerConfig cfg_;
  DramSystem& dram_;
  LatencyAdvisor& advisor_;
  ControllerHooks& hooks_;
  std::vector<ActTiming> variants_;
  ActTiming standard_;

  std::deque<MemoryRequest> read_q_;
  std::deque<MemoryRequest> write_q_;
  bool draining_writes_ = false;
  uint64_t next_seq_ = 0;

  Cycle max_request_latency_ = 0;
  Cycle min_read_latency_ = std::numeric_limits<Cycle>::max();
  uint64_t requests_served_ = 0;
};

}  // namespace ccsim
