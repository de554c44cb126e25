#include "slpca/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "slpca/loss.hpp"
#include "slpca/rng.hpp"

namespace slpca {

namespace {

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

}  // namespace

BinaryMatrix gen_correlated_bernoulli(const CorrelatedBernoulliSpec& spec) {
  if (spec.dims < 1 || spec.length < 1)
    throw std::invalid_argument("gen_correlated_bernoulli: dims and length must be >= 1");
  check_prob(spec.marginal_p, "marginal_p");
  check_prob(spec.mixing_prob, "mixing_prob");

  BinaryMatrix out(spec.length, spec.dims);
  Rng rng(spec.seed);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const bool shared = rng.bernoulli(spec.marginal_p);
    for (std::size_t j = 0; j < spec.dims; ++j) {
      const bool use_shared = rng.bernoulli(spec.mixing_prob);
      const bool own = rng.bernoulli(spec.marginal_p);  // always drawn, keeps draws aligned
      out.set(t, j, (use_shared ? shared : own) ? 1 : 0);
    }
  }
  return out;
}

BinaryMatrix gen_day_night(const DayNightSpec& spec) {
  if (spec.dims < 1 || spec.length < 1 || spec.period < 1)
    throw std::invalid_argument("gen_day_night: dims, length and period must be >= 1");
  check_prob(spec.day_on_prob, "day_on_prob");
  check_prob(spec.night_on_prob, "night_on_prob");
  if (!(spec.day_fraction > 0.0 && spec.day_fraction < 1.0))
    throw std::invalid_argument("gen_day_night: day_fraction must be in (0, 1)");

  BinaryMatrix out(spec.length, spec.dims);
  Rng rng(spec.seed);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double phase =
        static_cast<double>(t % spec.period) / static_cast<double>(spec.period);
    const double p = phase < spec.day_fraction ? spec.day_on_prob : spec.night_on_prob;
    for (std::size_t j = 0; j < spec.dims; ++j) out.set(t, j, rng.bernoulli(p) ? 1 : 0);
  }
  return out;
}

PlantedLowRank gen_planted_lowrank(std::size_t n, std::size_t p, std::size_t rank,
                                   double magnitude, std::uint64_t seed, double fraction) {
  if (n < 1 || p < 1 || rank < 1)
    throw std::invalid_argument("gen_planted_lowrank: n, p, rank must be >= 1");
  if (!(magnitude >= 0.0))
    throw std::invalid_argument("gen_planted_lowrank: magnitude must be >= 0");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("gen_planted_lowrank: fraction must be in (0, 1]");

  Rng rng(seed);
  const auto unit_row = [&](std::span<double> dst) {
    if (dst.size() == 1) {
      dst[0] = rng.bernoulli(0.5) ? 1.0 : -1.0;
      return;
    }
    double nrm = 0.0;
    do {
      nrm = 0.0;
      for (double& v : dst) {
        v = rng.gaussian();
        nrm += v * v;
      }
    } while (nrm == 0.0);
    nrm = std::sqrt(nrm);
    for (double& v : dst) v /= nrm;
  };

  Matrix scores(n, rank), loadings(p, rank);
  for (std::size_t t = 0; t < n; ++t) unit_row(scores.row(t));
  for (std::size_t j = 0; j < p; ++j) unit_row(loadings.row(j));

  // scale the scores so the requested fraction of |theta| clears `magnitude`
  std::vector<double> mags;
  mags.reserve(n * p);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < p; ++j)
      mags.push_back(std::abs(dot(scores.row(t), loadings.row(j))));
  std::sort(mags.begin(), mags.end());
  const std::size_t cut =
      std::min(mags.size() - 1,
               static_cast<std::size_t>((1.0 - fraction) * static_cast<double>(mags.size())));
  const double pivot = mags[cut];
  double scale = 0.0;
  if (magnitude > 0.0) {
    if (pivot <= 0.0)
      throw std::runtime_error("gen_planted_lowrank: degenerate factor draw, retry with "
                               "another seed or fraction < 1");
    scale = magnitude / pivot;
  }
  for (double& v : scores.storage()) v *= scale;

  PlantedLowRank out;
  out.data = BinaryMatrix(n, p);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < p; ++j) {
      const double theta = dot(scores.row(t), loadings.row(j));
      out.data.set(t, j, rng.bernoulli(sigmoid(theta)) ? 1 : 0);
    }
  out.truth = FactorModel{std::move(scores), std::move(loadings)};
  return out;
}

}  // namespace slpca
