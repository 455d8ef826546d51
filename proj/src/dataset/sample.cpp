#include "dataset/sample.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace comira {

std::vector<ConceptPairSpec> stratified_sample(std::span<const ConceptPairSpec> pairs, std::size_t target_n,
                                               std::size_t n_strata, std::uint64_t seed,
                                               std::vector<StratumPlan>* plan) {
  if (n_strata == 0) throw Error(Errc::invalid_argument, "need at least one stratum");
  if (target_n > pairs.size())
    throw Error(Errc::invalid_argument, "cannot sample " + std::to_string(target_n) + " of " +
                                            std::to_string(pairs.size()) + " pairs");
  for (const auto& p : pairs)
    if (!std::isfinite(p.pmi)) throw Error(Errc::invalid_argument, "pair (" + p.accessory + ", " + p.imagenet_concept + ") has non-finite pmi");

  double lo = 0.0, hi = 0.0;
  if (!pairs.empty()) {
    auto [mn, mx] = std::minmax_element(pairs.begin(), pairs.end(),
                                        [](const auto& a, const auto& b) { return a.pmi < b.pmi; });
    lo = mn->pmi;
    hi = mx->pmi;
  }
  const double width = (hi - lo) / static_cast<double>(n_strata);
  std::vector<std::vector<std::size_t>> members(n_strata);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::size_t s = width > 0 ? static_cast<std::size_t>((pairs[i].pmi - lo) / width) : 0;
    members[std::min(s, n_strata - 1)].push_back(i);
  }

  const std::size_t quota = target_n / n_strata;
  std::vector<std::size_t> take(n_strata);
  std::size_t remaining = target_n;
  for (std::size_t s = 0; s < n_strata; ++s) {
    take[s] = std::min(quota, members[s].size());
    remaining -= take[s];
  }
  std::vector<std::size_t> order(n_strata);
  while (remaining > 0) {
    for (std::size_t s = 0; s < n_strata; ++s) order[s] = s;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return members[a].size() - take[a] > members[b].size() - take[b];
    });
    for (auto s : order) {
      if (remaining == 0 || members[s].size() == take[s]) break;
      ++take[s];
      --remaining;
    }
  }

  SeededRng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(target_n);
  for (std::size_t s = 0; s < n_strata; ++s) {
    auto& m = members[s];
    for (std::size_t i = 0; i < take[s]; ++i) {
      std::swap(m[i], m[i + rng.below(m.size() - i)]);
      chosen.push_back(m[i]);
    }
  }
  std::sort(chosen.begin(), chosen.end());

  if (plan) {
    plan->clear();
    for (std::size_t s = 0; s < n_strata; ++s)
      plan->push_back({lo + width * static_cast<double>(s), s + 1 == n_strata ? hi : lo + width * static_cast<double>(s + 1),
                       members[s].size(), take[s]});
  }
  std::vector<ConceptPairSpec> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(pairs[i]);
  return out;
}

}  // namespace comira
