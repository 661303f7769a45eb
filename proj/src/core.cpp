#include "ccsim/core.hpp"

#include <cassert>

namespace ccsim {

void CoreParams::collect_problems(std::vector<std::string>& out) const {
  if (issue_width < 1) out.push_back("core.issue_width must be >= 1");
  if (window_capacity < 1) out.push_back("core.window must be >= 1");
  if (mshr_capacity < 1) out.push_back("core.mshrs must be >= 1");
  if (quota < 0) out.push_back("core.quota must be >= 0");
}

Core::Core(int id, const CoreParams& params, std::vector<TraceRecord> trace)
    : id_(id), params_(params), trace_(std::move(trace)) {
  window_.resize(size_t(params_.window_capacity));
  if (trace_.empty()) {
    trace_exhausted_ = true;
    finished_ = true;
  } else {
    bubbles_left_ = trace_[0].bubble_count;
  }
}

void Core::push_slot(bool ready, uint64_t token) {
  assert(!window_full());
  const size_t tail = (window_head_ + window_count_) % window_.size();
  window_[tail] = Slot{ready, token};
  window_count_++;
}

void Core::note_retired(int64_t n) {
  retired_total_ += n;
  retired_measured_ += n;
}

void Core::advance_record() {
  mem_records_issued_++;
  cursor_++;
  if (cursor_ >= trace_.size()) {
    if (params_.quota > 0) {
      cursor_ = 0;  // replay until the quota is met
      passes_++;
      bubbles_left_ = trace_[0].bubble_count;
    } else {
      trace_exhausted_ = true;
    }
  } else {
    bubbles_left_ = trace_[cursor_].bubble_count;
  }
}

void Core::retire_stage() {
  int n = 0;
  while (n < params_.issue_width && window_count_ > 0 &&
         window_[window_head_].ready) {
    window_head_ = (window_head_ + 1) % window_.size();
    window_count_--;
    note_retired(1);
    n++;
  }
}

void Core::issue_stage(Cycle now, CoreMemory& mem) {
  int issued = 0;
  while (issued < params_.issue_width && !trace_exhausted_) {
    if (bubbles_left_ > 0) {
      if (window_full()) break;
      push_slot(true, 0);
      bubbles_left_--;
      bubbles_retired_++;  // will retire via the window; counted as bubble here
      issued++;
      continue;
    }
    const TraceRecord& rec = trace_[cursor_];
    if (rec.is_write) {
      if (!mem.submit_write(id_, rec.address, now)) break;  // write queue full
      note_retired(1);  // fire-and-forget: retires at dispatch
      advance_record();
      issued++;
    } else {
      if (window_full()) break;
      if (outstanding_reads_ >= params_.mshr_capacity) break;  // MSHRs exhausted
      const uint64_t token = next_token_++;
      push_slot(false, token);
      outstanding_reads_++;
      if (!mem.submit_read(id_, rec.address, token, now)) {
        // not accepted: roll back and retry next cycle
        window_count_--;
        outstanding_reads_--;
        next_token_--;
        break;
      }
      advance_record();
      issued++;
    }
  }
}

void Core::tick(Cycle now, CoreMemory& mem) {
  last_tick_ = now;
  if (finished_) return;
  retire_stage();
  issue_stage(now, mem);

  const bool quota_met =
      measuring_ && params_.quota > 0 && retired_measured_ >= params_.quota;
  const bool drained =
      trace_exhausted_ && window_count_ == 0 && bubbles_left_ == 0;
  if (quota_met || drained) {
    finished_ = true;
    finish_cycle_ = now;
  }
}

void Core::on_read_complete(uint64_t token) {
  for (size_t i = 0; i < window_count_; ++i) {
    Slot& cand = window_[(window_head_ + i) % window_.size()];
    if (!cand.ready && cand.token == token) {
      cand.ready = true;
      outstanding_reads_--;
      return;
    }
  }
  throw InternalError("read completion for unknown window token");
}

void Core::reset_measurement(Cycle) {
  retired_measured_ = 0;
  measuring_ = true;
  // Un-finish a core whose quota was met during warm-up; a drained
  // one-pass trace stays finished.
  const bool drained =
      trace_exhausted_ && window_count_ == 0 && bubbles_left_ == 0;
  if (finished_ && !drained) {
    finished_ = false;
    finish_cycle_ = 0;
  }
}

uint64_t Core::state_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(uint64_t(cursor_));
  mix(uint64_t(bubbles_left_));
  mix(uint64_t(outstanding_reads_));
  mix(window_count_);
  mix(uint64_t(retired_total_));
  for (size_t i = 0; i < window_count_; ++i) {
    const Slot& s = window_[(window_head_ + i) % window_.size()];
    mix(s.ready ? 0x2ULL : 0x3ULL);
    mix(s.token);
  }
  return h;
}

}  // namespace ccsim
