#include "slpca/reconstruct.hpp"

#include <stdexcept>

#include "slpca/kernels.hpp"
#include "slpca/loss.hpp"

namespace slpca {

std::string pairing_name(Pairing pairing) {
  switch (pairing) {
    case Pairing::batch: return "batch";
    case Pairing::sequential_final: return "sequential";
    case Pairing::regret: return "regret";
  }
  return "batch";
}

Pairing pairing_from_name(const std::string& name) {
  if (name == "batch") return Pairing::batch;
  if (name == "sequential") return Pairing::sequential_final;
  if (name == "regret") return Pairing::regret;
  throw std::invalid_argument("unknown pairing '" + name +
                              "' (expected batch|sequential|regret)");
}

namespace {

ReconstructionSeries from_probabilities(Matrix probs, Pairing pairing) {
  ReconstructionSeries out;
  out.pairing = pairing;
  out.states = BinaryMatrix(probs.rows(), probs.cols());
  out.aggregate.assign(probs.rows(), 0);
  for (std::size_t t = 0; t < probs.rows(); ++t) {
    int sum = 0;
    for (std::size_t j = 0; j < probs.cols(); ++j) {
      const int state = probs(t, j) >= 0.5 ? 1 : 0;
      out.states.set(t, j, state);
      sum += state;
    }
    out.aggregate[t] = sum;
  }
  out.probabilities = std::move(probs);
  return out;
}

Matrix scores_from_trace(const StreamTrace& trace) {
  if (trace.size() == 0) throw std::invalid_argument("reconstruct: empty trace");
  Matrix scores(trace.size(), trace.steps.front().score.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& s = trace.steps[t].score;
    for (std::size_t k = 0; k < s.size(); ++k) scores(t, k) = s[k];
  }
  return scores;
}

}  // namespace

ReconstructionSeries reconstruct_batch(const FactorModel& model) {
  return from_probabilities(kernels::link_probabilities(model.scores, model.loadings),
                            Pairing::batch);
}

ReconstructionSeries reconstruct_sequential(const StreamTrace& trace,
                                            const Matrix& final_loadings) {
  const Matrix scores = scores_from_trace(trace);
  return from_probabilities(kernels::link_probabilities(scores, final_loadings),
                            Pairing::sequential_final);
}

ReconstructionSeries reconstruct_regret(const StreamTrace& trace,
                                        const Matrix& final_loadings) {
  if (!trace.has_snapshots)
    throw std::runtime_error(
        "reconstruct: the regret pairing needs per-step loadings; re-run the stream "
        "with snapshots enabled");
  const Matrix scores = scores_from_trace(trace);
  Matrix probs(trace.size(), final_loadings.rows());
  for (std::size_t t = 1; t <= trace.size(); ++t) {
    const Matrix& vt = trace.loadings_after(t, final_loadings);
    const auto a = scores.row(t - 1);
    auto dst = probs.row(t - 1);
    for (std::size_t j = 0; j < vt.rows(); ++j) dst[j] = sigmoid(dot(a, vt.row(j)));
  }
  return from_probabilities(std::move(probs), Pairing::regret);
}

double hamming_error(const BinaryMatrix& states, const BinaryMatrix& reference) {
  if (states.rows() != reference.rows() || states.cols() != reference.cols())
    throw std::invalid_argument("hamming_error: shape mismatch");
  if (states.rows() == 0 || states.cols() == 0) return 0.0;
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < states.rows(); ++t)
    for (std::size_t j = 0; j < states.cols(); ++j)
      if (states(t, j) != reference(t, j)) ++mismatches;
  return static_cast<double>(mismatches) /
         static_cast<double>(states.rows() * states.cols());
}

}  // namespace slpca
