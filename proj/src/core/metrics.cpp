#include "metrics.hpp"

#include <algorithm>

#include "morphology.hpp"

namespace uqx {

double dice(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_geometry(pred, gt, "dice");
    std::uint64_t inter = 0, p = 0, g = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool a = pred[i] != 0, b = gt[i] != 0;
        p += a;
        g += b;
        inter += a && b;
    }
    if (p + g == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(p + g);
}

double ndsc(const BinaryMask& pred, const BinaryMask& gt, double r) {
    require_same_geometry(pred, gt, "ndsc");
    require_input(r > 0.0 && r < 1.0, "ndsc reference rate r must be in (0, 1)");

    std::uint64_t tp = 0, fp = 0, fn = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool a = pred[i] != 0, b = gt[i] != 0;
        if (b) ++pos; else ++neg;
        if (a && b) ++tp;
        else if (a) ++fp;
        else if (b) ++fn;
    }
    require_numeric(pos > 0 && neg > 0,
                    "ndsc undefined: ground truth is all-positive or all-negative");

    const double h = static_cast<double>(pos) / static_cast<double>(neg);
    const double kappa = h * (1.0 / r - 1.0);
    const double denom = 2.0 * static_cast<double>(tp) + kappa * static_cast<double>(fp) +
                         static_cast<double>(fn);
    return 2.0 * static_cast<double>(tp) / denom;
}

LesionMatch match_lesions(const LabelMap& pred, const LabelMap& gt) {
    require_same_geometry(pred, gt, "match_lesions");

    const std::int32_t np = max_label(pred);
    const std::int32_t ng = max_label(gt);
    LesionMatch m;
    std::vector<std::uint8_t> pred_hit(static_cast<std::size_t>(np) + 1, 0);
    std::vector<std::uint8_t> gt_hit(static_cast<std::size_t>(ng) + 1, 0);

    for (std::size_t i = 0; i < pred.size(); ++i) {
        const std::int32_t a = pred[i], b = gt[i];
        if (a > 0 && b > 0) {
            pred_hit[static_cast<std::size_t>(a)] = 1;
            gt_hit[static_cast<std::size_t>(b)] = 1;
            ++m.overlap[{a, b}];
        }
    }
    for (std::int32_t a = 1; a <= np; ++a)
        (pred_hit[static_cast<std::size_t>(a)] ? m.tp_pred : m.fp_pred).push_back(a);
    for (std::int32_t b = 1; b <= ng; ++b)
        if (!gt_hit[static_cast<std::size_t>(b)]) m.fn_gt.push_back(b);
    return m;
}

DetectionScores detection_scores(const LesionMatch& match) {
    const auto tp = static_cast<double>(match.tp_pred.size());
    const auto fp = static_cast<double>(match.fp_pred.size());
    const auto fn = static_cast<double>(match.fn_gt.size());

    DetectionScores s;
    s.lf1 = (2.0 * tp + fp + fn) == 0.0 ? 1.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    s.lppv = (tp + fp) == 0.0 ? 1.0 : tp / (tp + fp);
    s.ltpr = (tp + fn) == 0.0 ? 1.0 : tp / (tp + fn);
    return s;
}

double iou_adj(std::int32_t pred_label, const LabelMap& pred, const LabelMap& gt) {
    require_same_geometry(pred, gt, "iou_adj");
    require_input(pred_label >= 1 && pred_label <= max_label(pred),
                  "iou_adj: predicted component label out of range");

    const std::int32_t ng = max_label(gt);
    const std::int32_t np = max_label(pred);

    // K': ground-truth components overlapping the target component.
    std::vector<std::uint8_t> gt_in_kprime(static_cast<std::size_t>(ng) + 1, 0);
    std::uint64_t k_size = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == pred_label) {
            ++k_size;
            if (gt[i] > 0) gt_in_kprime[static_cast<std::size_t>(gt[i])] = 1;
        }
    }
    bool any_gt = false;
    for (std::int32_t b = 1; b <= ng; ++b) any_gt |= gt_in_kprime[static_cast<std::size_t>(b)] != 0;
    if (!any_gt) return 0.0;

    // Q: predicted components (the target included) overlapping K'.
    std::vector<std::uint8_t> pred_in_q(static_cast<std::size_t>(np) + 1, 0);
    pred_in_q[static_cast<std::size_t>(pred_label)] = 1;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 0 && gt[i] > 0 && gt_in_kprime[static_cast<std::size_t>(gt[i])])
            pred_in_q[static_cast<std::size_t>(pred[i])] = 1;
    }

    // |k intersect K'| and the residue of K' not claimed by any component in Q.
    std::uint64_t inter = 0, residue = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool in_kprime = gt[i] > 0 && gt_in_kprime[static_cast<std::size_t>(gt[i])];
        if (pred[i] == pred_label && in_kprime) ++inter;
        if (in_kprime && !(pred[i] > 0 && pred_in_q[static_cast<std::size_t>(pred[i])]))
            ++residue;
    }
    return static_cast<double>(inter) / static_cast<double>(k_size + residue);
}

} // namespace uqx
