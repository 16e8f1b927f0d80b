#include "ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "morphology.hpp"

namespace uqx {

EnsemblePrediction make_ensemble(std::vector<Volume> members) {
    require_input(members.size() >= 2, "ensemble needs at least 2 members");
    for (std::size_t k = 1; k < members.size(); ++k)
        require_same_geometry(members[0], members[k], "ensemble member");
    for (const Volume& m : members) {
        for (float v : m.data())
            require_input(std::isfinite(v) && v >= 0.0f && v <= 1.0f,
                          "ensemble member probabilities must lie in [0, 1]");
    }
    return EnsemblePrediction{std::move(members)};
}

AggregatedPrediction aggregate(const EnsemblePrediction& ensemble, double tau) {
    require_input(!ensemble.members.empty(), "ensemble is empty");
    require_input(tau > 0.0 && tau < 1.0, "aggregation threshold must be in (0, 1)");

    const Volume& first = ensemble.members.front();
    const double k = static_cast<double>(ensemble.members.size());

    AggregatedPrediction agg;
    agg.tau = tau;
    agg.mean_prob = Volume(first.dims(), first.spacing(), 0.0f);
    agg.mask = BinaryMask(first.dims(), first.spacing(), 0);

    // Summing in sorted value order keeps the mean, and with it the mask,
    // exactly invariant to member order.
    std::vector<double> vals(ensemble.members.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t m = 0; m < ensemble.members.size(); ++m)
            vals[m] = static_cast<double>(ensemble.members[m][i]);
        std::sort(vals.begin(), vals.end());
        double sum = 0.0;
        for (const double v : vals) sum += v;
        const double mean = sum / k;
        agg.mean_prob[i] = static_cast<float>(mean);
        agg.mask[i] = mean >= tau ? 1 : 0;
    }
    agg.labels = connected_components(agg.mask, Connectivity::c26);
    agg.n_lesions = max_label(agg.labels);
    return agg;
}

namespace {

BinaryMask threshold_member(const Volume& member, double tau) {
    BinaryMask m(member.dims(), member.spacing(), 0);
    for (std::size_t i = 0; i < member.size(); ++i)
        m[i] = static_cast<double>(member[i]) >= tau ? 1 : 0;
    return m;
}

// IoU between the voxels of aggregated lesion `label` and the union of
// member components that touch it.
double member_iou(const std::vector<std::size_t>& lesion_voxels, const LabelMap& member_labels,
                  const std::vector<std::size_t>& member_sizes) {
    std::vector<std::uint8_t> touched(member_sizes.size(), 0);
    std::uint64_t inter = 0;
    for (std::size_t i : lesion_voxels) {
        const std::int32_t v = member_labels[i];
        if (v > 0) {
            ++inter;
            touched[static_cast<std::size_t>(v)] = 1;
        }
    }
    if (inter == 0) return 0.0;

    std::uint64_t union_member = 0;
    for (std::size_t c = 1; c < member_sizes.size(); ++c)
        if (touched[c]) union_member += member_sizes[c];
    const std::uint64_t uni =
        static_cast<std::uint64_t>(lesion_voxels.size()) + union_member - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

std::vector<double> lsu_all(const AggregatedPrediction& agg, const EnsemblePrediction& ensemble,
                            double tau) {
    require_input(!ensemble.members.empty(), "ensemble is empty");
    require_same_geometry(agg.mask, ensemble.members.front(), "lsu");

    const auto lesions = label_voxels(agg.labels);
    const double k = static_cast<double>(ensemble.members.size());

    std::vector<LabelMap> member_labels;
    std::vector<std::vector<std::size_t>> member_sizes;
    member_labels.reserve(ensemble.members.size());
    for (const Volume& m : ensemble.members) {
        member_labels.push_back(connected_components(threshold_member(m, tau), Connectivity::c26));
        member_sizes.push_back(label_sizes(member_labels.back()));
    }

    std::vector<double> out;
    out.reserve(lesions.size() > 0 ? lesions.size() - 1 : 0);
    std::vector<double> ious(member_labels.size());
    for (std::size_t label = 1; label < lesions.size(); ++label) {
        for (std::size_t m = 0; m < member_labels.size(); ++m)
            ious[m] = member_iou(lesions[label], member_labels[m], member_sizes[m]);
        // Sorted reduction so the value does not depend on member order.
        std::sort(ious.begin(), ious.end());
        double iou_sum = 0.0;
        for (const double v : ious) iou_sum += v;
        out.push_back(1.0 - iou_sum / k);
    }
    return out;
}

double lsu(std::int32_t lesion_label, const AggregatedPrediction& agg,
           const EnsemblePrediction& ensemble, double tau) {
    require_input(lesion_label >= 1 && lesion_label <= agg.n_lesions,
                  "lsu: lesion label out of range");
    return lsu_all(agg, ensemble, tau)[static_cast<std::size_t>(lesion_label) - 1];
}

} // namespace uqx
