#pragma once

#include <string>

#include "feature_vector.hpp"
#include "grid3.hpp"

namespace uqx {

// 14 geometry features of a binary ROI, pushed as <prefix>__<name>.
// Surface area counts exposed voxel faces in mm^2; diameters are pairwise
// distances between boundary-voxel centres; axis lengths are 4*sqrt(lambda)
// from the eigenvalues of the physical-coordinate covariance. Single-voxel
// ROIs get axis lengths and diameters of 0 and elongation/flatness of 1.
FeatureVector shape_features(const BinaryMask& roi, const std::string& prefix);

extern const char* const kShapeFeatureNames[14];

} // namespace uqx
