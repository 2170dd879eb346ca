#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "didcnc/model.hpp"

namespace didcnc {

using Rng = std::mt19937_64;

// Poisson(lambda) sample clamped to `cap`.
int draw_arrivals(const ClientSpec& client, int cap, Rng& rng);

// Independent per-client arrival streams. Stream c is seeded from
// (seed, c) so adding a client does not perturb the others.
class ArrivalProcess {
 public:
  explicit ArrivalProcess(const Scenario& scenario);

  // Arrival counts of every client for the next slot.
  const std::vector<int>& next_slot();

 private:
  std::vector<ClientSpec> clients_;
  std::vector<int> caps_;
  std::vector<Rng> streams_;
  std::vector<std::poisson_distribution<int>> poisson_;
  std::vector<int> counts_;
};

}  // namespace didcnc
