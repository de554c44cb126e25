#ifndef SLPCA_RECONSTRUCT_HPP
#define SLPCA_RECONSTRUCT_HPP

#include <string>
#include <vector>

#include "slpca/model.hpp"
#include "slpca/stream.hpp"

namespace slpca {

/// Which factor pair produces the natural parameters:
///   batch            -- (a*_t, V*) from the batch fit
///   sequential_final -- (score_t, V^N) from the stream
///   regret           -- (score_t, V^t), the locally-current pair per step
enum class Pairing { batch, sequential_final, regret };

std::string pairing_name(Pairing pairing);
Pairing pairing_from_name(const std::string& name);

struct ReconstructionSeries {
  Matrix probabilities;       // N x P, sigma(theta)
  BinaryMatrix states;        // 1 where probability >= 0.5 (ties map to 1)
  std::vector<int> aggregate; // per-row sum of states
  Pairing pairing = Pairing::batch;
};

ReconstructionSeries reconstruct_batch(const FactorModel& model);
ReconstructionSeries reconstruct_sequential(const StreamTrace& trace,
                                            const Matrix& final_loadings);
/// Requires loading snapshots on the trace.
ReconstructionSeries reconstruct_regret(const StreamTrace& trace,
                                        const Matrix& final_loadings);

/// Fraction of cells where the two matrices disagree.
double hamming_error(const BinaryMatrix& states, const BinaryMatrix& reference);

}  // namespace slpca

#endif  // SLPCA_RECONSTRUCT_HPP
