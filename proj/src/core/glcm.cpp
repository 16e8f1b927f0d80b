#include "glcm.hpp"

#include <algorithm>
#include <cmath>

namespace uqx {

const char* const kGlcmFeatureNames[12] = {
    "contrast",        "correlation",       "joint_energy",   "joint_entropy",
    "homogeneity",     "cluster_prominence", "cluster_shade",  "cluster_tendency",
    "autocorrelation", "difference_entropy", "sum_entropy",    "max_probability",
};

namespace {

// The 13 offsets covering every 26-neighbor direction once (the mirrored
// half is implied by symmetric accumulation).
constexpr int kOffsets[13][3] = {
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1},
    {0, 1, 1}, {0, 1, -1}, {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1},
};

} // namespace

GlcmMatrix glcm(const Volume& image, const BinaryMask& roi, int bins) {
    require_same_geometry(image, roi, "glcm");
    require_input(bins >= 2, "glcm needs at least 2 grey levels");

    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (std::size_t i = 0; i < roi.size(); ++i) {
        if (!roi[i]) continue;
        const float v = image[i];
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    require_input(any, "glcm: ROI is empty");

    // 0-based level per ROI voxel; constant ROIs collapse to level 0.
    const Dims3 d = roi.dims();
    std::vector<std::int16_t> level(roi.size(), -1);
    const double width = static_cast<double>(hi) - static_cast<double>(lo);
    for (std::size_t i = 0; i < roi.size(); ++i) {
        if (!roi[i]) continue;
        int b = 0;
        if (width > 0.0) {
            b = static_cast<int>((static_cast<double>(image[i]) - lo) / width * bins);
            b = std::clamp(b, 0, bins - 1);
        }
        level[i] = static_cast<std::int16_t>(b);
    }

    GlcmMatrix m;
    m.bins = bins;
    m.p.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    std::uint64_t pairs = 0;
    for (int z = 0; z < d.nz; ++z) {
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                const std::size_t i = roi.index(x, y, z);
                if (level[i] < 0) continue;
                for (const auto& o : kOffsets) {
                    const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (!roi.in_bounds(nx, ny, nz)) continue;
                    const std::size_t j = roi.index(nx, ny, nz);
                    if (level[j] < 0) continue;
                    m.p[static_cast<std::size_t>(level[i]) * bins + level[j]] += 1.0;
                    m.p[static_cast<std::size_t>(level[j]) * bins + level[i]] += 1.0;
                    ++pairs;
                }
            }
        }
    }
    require_input(pairs > 0, "glcm: ROI has no co-occurring voxel pairs");

    const double total = 2.0 * static_cast<double>(pairs);
    for (double& v : m.p) v /= total;
    return m;
}

FeatureVector glcm_features(const GlcmMatrix& m, const std::string& prefix) {
    require_input(m.bins >= 1 && m.p.size() == static_cast<std::size_t>(m.bins) * m.bins,
                  "glcm_features: malformed matrix");
    const int n = m.bins;

    // Marginals with 1-based grey levels.
    double mu_x = 0.0, mu_y = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m.at(i, j);
            mu_x += (i + 1) * p;
            mu_y += (j + 1) * p;
        }
    }
    double var_x = 0.0, var_y = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m.at(i, j);
            var_x += (i + 1 - mu_x) * (i + 1 - mu_x) * p;
            var_y += (j + 1 - mu_y) * (j + 1 - mu_y) * p;
        }
    }

    double contrast = 0.0, joint_energy = 0.0, joint_entropy = 0.0, homogeneity = 0.0;
    double prominence = 0.0, shade = 0.0, tendency = 0.0, autocorrelation = 0.0;
    double cross = 0.0, max_probability = 0.0;
    std::vector<double> p_diff(static_cast<std::size_t>(n), 0.0);
    std::vector<double> p_sum(static_cast<std::size_t>(2 * n), 0.0);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m.at(i, j);
            if (p == 0.0) continue;
            const double gi = i + 1, gj = j + 1;
            const double diff = gi - gj;
            const double spread = gi + gj - mu_x - mu_y;
            contrast += diff * diff * p;
            joint_energy += p * p;
            joint_entropy -= p * std::log2(p);
            homogeneity += p / (1.0 + diff * diff);
            prominence += spread * spread * spread * spread * p;
            shade += spread * spread * spread * p;
            tendency += spread * spread * p;
            autocorrelation += gi * gj * p;
            cross += gi * gj * p;
            max_probability = std::max(max_probability, p);
            p_diff[static_cast<std::size_t>(std::abs(i - j))] += p;
            p_sum[static_cast<std::size_t>(i + j)] += p;
        }
    }

    const double sigma = std::sqrt(var_x) * std::sqrt(var_y);
    const double correlation = sigma > 0.0 ? (cross - mu_x * mu_y) / sigma : 1.0;

    double difference_entropy = 0.0;
    for (double p : p_diff)
        if (p > 0.0) difference_entropy -= p * std::log2(p);
    double sum_entropy = 0.0;
    for (double p : p_sum)
        if (p > 0.0) sum_entropy -= p * std::log2(p);

    const double stats[12] = {
        contrast,        correlation,        joint_energy, joint_entropy,
        homogeneity,     prominence,         shade,        tendency,
        autocorrelation, difference_entropy, sum_entropy,  max_probability,
    };

    FeatureVector out;
    for (int i = 0; i < 12; ++i)
        out.push(prefix + "__" + kGlcmFeatureNames[i], stats[i]);
    return out;
}

} // namespace uqx
