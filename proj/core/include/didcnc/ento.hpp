#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

namespace didcnc {

// Priority key: ALG edges crossed, then birth slot, request id, insertion
// sequence.
struct EntoKey {
  int crossed = 0;
  std::int64_t birth = 0;
  std::int64_t request = 0;
  std::int64_t seq = 0;

  friend auto operator<=>(const EntoKey&, const EntoKey&) = default;
};

// Transmission queue of unit-packet bundles served extended-nearest-to-origin
// first. A fractional capacity leaves one unit part-way through; it finishes
// first in the next slot (no preemption).
class EntoQueue {
 public:
  struct Entry {
    EntoKey key;
    int id = 0;
    int units = 0;
  };

  void push(int crossed, std::int64_t birth, std::int64_t request, int id, int units);

  // Called for each group leaving the queue this slot. `whole` is true when
  // the group is the entire queued bundle `id`.
  using SendFn = std::function<void(int id, int units, bool whole)>;
  // Called when a single unit of bundle `id` starts part-way; returns the id
  // that now represents that unit. `whole` as above.
  using StartFn = std::function<int(int id, bool whole)>;

  struct SlotReport {
    double used = 0.0;
    int units_sent = 0;
    bool order_ok = true;  // no waiting entry outranks a sent one
  };

  SlotReport serve(double capacity, const SendFn& send, const StartFn& start);

  bool empty() const { return heap_.empty() && in_service_ < 0; }
  std::size_t waiting() const { return heap_.size(); }
  int in_service() const { return in_service_; }
  double progress() const { return progress_; }
  const EntoKey* top() const { return heap_.empty() ? nullptr : &heap_.top().key; }

 private:
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const { return b.key < a.key; }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::int64_t seq_ = 0;
  int in_service_ = -1;
  double progress_ = 0.0;
};

}  // namespace didcnc
