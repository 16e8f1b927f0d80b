#pragma once

#include <cstdint>
#include <vector>

#include "grid3.hpp"

namespace uqx {

// Per-member probability volumes of a segmentation ensemble. All members
// share geometry and hold values in [0, 1].
struct EnsemblePrediction {
    std::vector<Volume> members;
};

EnsemblePrediction make_ensemble(std::vector<Volume> members);

// Ensemble consensus: mean probability thresholded at tau, with 26-connected
// components of the consensus mask. The threshold is applied to the
// double-precision mean before the stored volume is narrowed to float.
struct AggregatedPrediction {
    Volume mean_prob;
    BinaryMask mask;
    LabelMap labels;
    std::int32_t n_lesions = 0;
    double tau = 0.5;
};

AggregatedPrediction aggregate(const EnsemblePrediction& ensemble, double tau = 0.5);

// Lesion structural uncertainty of one aggregated lesion:
//   LSU = 1 - (1/K) * sum_k IoU(L, L_k)
// where L_k is the union of member k's thresholded components that overlap
// L, and IoU against an empty L_k is 0. Ranges over [0, 1]; exactly 0 iff
// every member reproduces L exactly.
double lsu(std::int32_t lesion_label, const AggregatedPrediction& agg,
           const EnsemblePrediction& ensemble, double tau = 0.5);

// LSU for every aggregated lesion (index 0 -> label 1, ...). Member
// labelings are computed once and shared across lesions.
std::vector<double> lsu_all(const AggregatedPrediction& agg,
                            const EnsemblePrediction& ensemble, double tau = 0.5);

} // namespace uqx
