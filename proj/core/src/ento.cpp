#include "didcnc/ento.hpp"

#include <algorithm>
#include <cmath>

namespace didcnc {

namespace {
constexpr double kEps = 1e-9;
}

void EntoQueue::push(int crossed, std::int64_t birth, std::int64_t request, int id,
                     int units) {
  heap_.push(Entry{EntoKey{crossed, birth, request, seq_++}, id, units});
}

EntoQueue::SlotReport EntoQueue::serve(double capacity, const SendFn& send,
                                       const StartFn& start) {
  SlotReport report;
  double budget = capacity;
  if (in_service_ >= 0) {
    const double need = 1.0 - progress_;
    if (budget + kEps >= need) {
      budget = std::max(0.0, budget - need);
      report.used += need;
      ++report.units_sent;
      const int id = in_service_;
      in_service_ = -1;
      progress_ = 0.0;
      send(id, 1, true);
    } else {
      progress_ += budget;
      report.used += budget;
      budget = 0.0;
    }
  }
  bool served = false;
  EntoKey last;
  while (in_service_ < 0 && !heap_.empty() && budget > kEps) {
    Entry e = heap_.top();
    heap_.pop();
    served = true;
    last = e.key;
    const int whole = std::min(e.units, static_cast<int>(std::floor(budget + kEps)));
    budget = std::max(0.0, budget - whole);
    report.used += whole;
    report.units_sent += whole;
    if (whole == e.units) {
      send(e.id, whole, true);
      continue;
    }
    if (whole > 0) {
      send(e.id, whole, false);
      e.units -= whole;
    }
    if (budget > kEps) {
      in_service_ = start(e.id, e.units == 1);
      progress_ = budget;
      report.used += budget;
      budget = 0.0;
      --e.units;
    }
    if (e.units > 0) heap_.push(e);
    break;
  }
  if (served && !heap_.empty()) report.order_ok = !(heap_.top().key < last);
  return report;
}

}  // namespace didcnc
