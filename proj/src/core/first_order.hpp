#pragma once

#include <string>

#include "feature_vector.hpp"
#include "grid3.hpp"

namespace uqx {

// Linear-interpolation percentile (NumPy convention) over sorted values.
double percentile_sorted(const std::vector<double>& sorted, double p);

// 18 first-order intensity statistics of the image restricted to the ROI,
// pushed as <prefix>__<stat>. Moments are population moments; skewness and
// excess kurtosis are 0 for constant ROIs; entropy/uniformity use a 32-bin
// histogram over the ROI's own [min, max] with base-2 logs.
FeatureVector first_order_stats(const Volume& image, const BinaryMask& roi,
                                const std::string& prefix);

extern const char* const kFirstOrderStatNames[18];

} // namespace uqx
