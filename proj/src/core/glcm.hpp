#pragma once

#include <string>
#include <vector>

#include "feature_vector.hpp"
#include "grid3.hpp"

namespace uqx {

// Grey-level co-occurrence matrix over an ROI: intensities are binned into
// `bins` levels relative to the ROI's own min/max, pairs are accumulated for
// the 13 unique 3D direction offsets at distance 1 (both orders, so the
// matrix is symmetric) and normalised to sum 1. Levels are 1-based when they
// enter feature formulas.
struct GlcmMatrix {
    int bins = 0;
    std::vector<double> p; // bins x bins, row-major

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * bins + j]; }
};

GlcmMatrix glcm(const Volume& image, const BinaryMask& roi, int bins = 32);

// 12 texture features pushed as <prefix>__<name>. Entropies are base 2;
// correlation degenerates to 1 when either marginal variance is 0.
FeatureVector glcm_features(const GlcmMatrix& m, const std::string& prefix);

extern const char* const kGlcmFeatureNames[12];

} // namespace uqx
