#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dataset/pairs.hpp"

namespace comira {

struct StratumPlan {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t available = 0;
  std::size_t taken = 0;
};

// Draws target_n pairs spread over n_strata equal-width pmi strata.
//
// Each stratum's quota is floor(target_n / n_strata), capped by what it
// holds; the shortfall plus the division remainder is handed out one pair at
// a time, round-robin, to the strata with the most spare pairs (ties to the
// lower stratum). Within a stratum pairs are drawn without replacement by a
// partial Fisher-Yates shuffle from one generator seeded with `seed` and
// consumed stratum by stratum. The result keeps input order.
std::vector<ConceptPairSpec> stratified_sample(std::span<const ConceptPairSpec> pairs, std::size_t target_n,
                                               std::size_t n_strata, std::uint64_t seed,
                                               std::vector<StratumPlan>* plan = nullptr);

}  // namespace comira
