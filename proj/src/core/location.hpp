#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feature_vector.hpp"
#include "grid3.hpp"

namespace uqx {

// One row of an atlas region table: which label in the atlas raster maps to
// which feature-column token.
struct AtlasRegion {
    std::int32_t id = 0;
    std::string column;
};

std::vector<AtlasRegion> read_atlas_regions(const std::string& path);
void write_atlas_regions(const std::vector<AtlasRegion>& regions, const std::string& path);

// Per-region overlap fractions |roi intersect region| / |roi| for every
// table entry plus a grey-matter overlap fraction, pushed as
// <prefix>__<column> and <prefix>__gm_overlap.
FeatureVector location_features(const BinaryMask& roi, const LabelMap& atlas,
                                std::span<const AtlasRegion> regions, const BinaryMask& gm,
                                const std::string& prefix);

} // namespace uqx
