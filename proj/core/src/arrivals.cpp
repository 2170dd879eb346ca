#include "didcnc/arrivals.hpp"

#include <algorithm>

namespace didcnc {

int draw_arrivals(const ClientSpec& client, int cap, Rng& rng) {
  if (client.arrival_rate <= 0.0 || cap <= 0) return 0;
  std::poisson_distribution<int> poisson(client.arrival_rate);
  return std::min(poisson(rng), cap);
}

ArrivalProcess::ArrivalProcess(const Scenario& scenario)
    : clients_(scenario.clients) {
  caps_.reserve(clients_.size());
  streams_.reserve(clients_.size());
  for (std::size_t c = 0; c < clients_.size(); ++c) {
    caps_.push_back(scenario.arrival_cap(clients_[c]));
    std::seed_seq seq{static_cast<std::uint32_t>(scenario.seed),
                      static_cast<std::uint32_t>(scenario.seed >> 32),
                      static_cast<std::uint32_t>(c), 0x9e3779b9u};
    streams_.emplace_back(seq);
    poisson_.emplace_back(clients_[c].arrival_rate > 0.0
                              ? clients_[c].arrival_rate
                              : 1.0);
  }
  counts_.assign(clients_.size(), 0);
}

const std::vector<int>& ArrivalProcess::next_slot() {
  for (std::size_t c = 0; c < clients_.size(); ++c) {
    if (clients_[c].arrival_rate <= 0.0 || caps_[c] <= 0) {
      counts_[c] = 0;
      continue;
    }
    counts_[c] = std::min(poisson_[c](streams_[c]), caps_[c]);
  }
  return counts_;
}

}  // namespace didcnc
