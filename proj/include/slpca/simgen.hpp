#ifndef SLPCA_SIMGEN_HPP
#define SLPCA_SIMGEN_HPP

#include <cstdint>

#include "slpca/model.hpp"

namespace slpca {

/// Correlated Bernoulli stream via the common-variable mixture: per time t a
/// shared Z ~ Bern(marginal_p); each column copies Z with probability
/// mixing_prob and otherwise draws its own Bern(marginal_p). Marginals stay
/// Bern(marginal_p) and pairwise correlation equals mixing_prob^2.
struct CorrelatedBernoulliSpec {
  std::size_t dims = 8;
  std::size_t length = 1000;
  double marginal_p = 0.5;
  double mixing_prob = 0.7;
  std::uint64_t seed = 0;
};

BinaryMatrix gen_correlated_bernoulli(const CorrelatedBernoulliSpec& spec);

/// Day/night generator standing in for monitor data: within each period the
/// first day_fraction of samples use day_on_prob, the rest night_on_prob.
/// All columns share the phase, so the aggregate is periodic.
struct DayNightSpec {
  std::size_t dims = 6;
  std::size_t period = 144;  // samples per day (10-minute cadence over 24 h)
  double day_on_prob = 0.8;
  double night_on_prob = 0.05;
  double day_fraction = 0.5;
  std::size_t length = 2016;
  std::uint64_t seed = 0;
};

BinaryMatrix gen_day_night(const DayNightSpec& spec);

struct PlantedLowRank {
  BinaryMatrix data;
  FactorModel truth;
};

/// Rank-r planted model: unit-norm factor rows scaled so |theta| >= magnitude
/// on at least `fraction` of cells, then x ~ Bern(sigma(theta)). For r = 1
/// unit rows are +-1, so every cell has |theta| == magnitude exactly.
/// magnitude = 0 yields fair coin flips.
PlantedLowRank gen_planted_lowrank(std::size_t n, std::size_t p, std::size_t rank,
                                   double magnitude, std::uint64_t seed,
                                   double fraction = 1.0);

}  // namespace slpca

#endif  // SLPCA_SIMGEN_HPP
