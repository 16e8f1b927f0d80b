#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "grid3.hpp"

namespace uqx {

// Dice coefficient; two empty masks score 1.0.
double dice(const BinaryMask& pred, const BinaryMask& gt);

// Normalised Dice: false positives are reweighted so the score is comparable
// across lesion loads. r is the reference positive rate; kappa = h*(1/r - 1)
// with h the ground-truth positive fraction. The ground truth must contain
// both positive and negative voxels.
double ndsc(const BinaryMask& pred, const BinaryMask& gt, double r = 2e-5);

// Lesion-level matching between two component labelings. A predicted lesion
// is a true positive iff it overlaps ground truth in at least one voxel.
struct LesionMatch {
    std::vector<std::int32_t> tp_pred;
    std::vector<std::int32_t> fp_pred;
    std::vector<std::int32_t> fn_gt;
    // (pred label, gt label) -> shared voxel count, only non-zero pairs.
    std::map<std::pair<std::int32_t, std::int32_t>, std::uint64_t> overlap;
};

LesionMatch match_lesions(const LabelMap& pred, const LabelMap& gt);

struct DetectionScores {
    double lf1 = 0.0;
    double lppv = 0.0;
    double ltpr = 0.0;
};

// Lesion-count F1 / positive predictive value / true positive rate. When a
// denominator is zero the score is 1.0 (there was no error mass to punish).
DetectionScores detection_scores(const LesionMatch& match);

// Adjusted intersection-over-union of predicted component `pred_label`.
// Ground-truth voxels already claimed by other overlapping predicted
// components are removed from the union, so split lesions are not punished
// twice. 0 when the component misses ground truth entirely; always >= the
// plain IoU against the matched ground-truth components.
double iou_adj(std::int32_t pred_label, const LabelMap& pred, const LabelMap& gt);

} // namespace uqx
