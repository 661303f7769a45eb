#pragma once

#include <cstdint>
#include <vector>

#include "ccsim/trace.hpp"
#include "ccsim/types.hpp"

namespace ccsim {

struct CoreParams {
  int issue_width = 3;
  int window_capacity = 128;
  int mshr_capacity = 8;
  int64_t quota = 0;  // measured instructions to retire; 0 = one trace pass

  void collect_problems(std::vector<std::string>& out) const;
};

// Memory system as seen by one core. submit_* return false when the
// request cannot be accepted this cycle (queue full) — the core stalls.
class CoreMemory {
public:
  virtual ~CoreMemory() = default;
  virtual bool submit_read(int core, uint64_t address, uint64_t token,
                           Cycle now) = 0;
  virtual bool submit_write(int core, uint64_t address, Cycle now) = 0;
};

// In-order-retire instruction window over a memory trace. Every bubble and
// read occupies a window slot; reads also hold an MSHR until the memory
// system completes them. Writes are fire-and-forget.
class Core {
public:
  Core(int id, const CoreParams& params, std::vector<TraceRecord> trace);

  void tick(Cycle now, CoreMemory& mem);
  void on_read_complete(uint64_t token);

  // While false (warm-up), the quota does not latch completion.
  void set_measuring(bool on) { measuring_ = on; }

  // Warm-up boundary: zero the measured counters, keep all state.
  void reset_measurement(Cycle now);

  int id() const { return id_; }
  bool finished() const { return finished_; }
  Cycle finish_cycle() const { return finish_cycle_; }
  int64_t retired_measured() const { return retired_measured_; }
  int64_t retired_total() const { return retired_total_; }
  int64_t bubbles_retired() const { return bubbles_retired_; }
  int64_t memory_records_issued() const { return mem_records_issued_; }
  int outstanding_reads() const { return outstanding_reads_; }
  int window_occupancy() const { return int(window_count_); }
  uint64_t trace_passes() const { return passes_; }

  double ipc(Cycle measure_start) const {
    const Cycle end = finished_ ? finish_cycle_ : last_tick_;
    const Cycle elapsed = end - measure_start;
    return elapsed > 0 ? double(retired_measured_) / double(elapsed) : 0.0;
  }

  uint64_t state_hash() const;

private:
  struct Slot {
    bool ready = false;
    uint64_t token = 0;
  };

  bool window_full() const { return window_count_ == window_.size(); }
  void push_slot(bool ready, uint64_t token);
  void retire_stage();
  void issue_stage(Cycle now, CoreMemory& mem);
  void note_retired(int64_t n);
  void advance_record();

  int id_;
  CoreParams params_;
  std::vector<TraceRecord> trace_;

  std::vector<Slot> window_;
  size_t window_head_ = 0;
  size_t window_count_ = 0;
  uint64_t next_token_ = 0;

  size_t cursor_ = 0;
  int64_t bubbles_left_ = 0;
  int outstanding_reads_ = 0;
  uint64_t passes_ = 0;

  int64_t retired_total_ = 0;
  int64_t retired_measured_ = 0;
  int64_t bubbles_retired_ = 0;
  int64_t mem_records_issued_ = 0;

  bool trace_exhausted_ = false;  // one-pass mode only
  bool measuring_ = true;
  bool finished_ = false;
  Cycle finish_cycle_ = 0;
  Cycle last_tick_ = 0;
};

}  // namespace ccsim
