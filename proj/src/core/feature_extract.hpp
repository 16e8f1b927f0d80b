#pragma once

#include <span>
#include <string>

#include "feature_vector.hpp"
#include "grid3.hpp"
#include "location.hpp"

namespace uqx {

// Everything needed to describe one lesion of one subject. The perilesional
// ROI is the dilation shell around the lesion; whole_pred is the full
// predicted lesion mask of the subject (all lesions).
struct RoiContext {
    const Volume& image;
    const BinaryMask& lesion;
    const BinaryMask& perilesional;
    const BinaryMask& whole_pred;
    const BinaryMask& gm;
    const LabelMap& atlas;
    std::span<const AtlasRegion> regions;
};

// Subject-level passthrough columns: 13 image-quality metrics and 5
// demographic fields, in canonical order.
extern const char* const kQualityColumnNames[13];
extern const char* const kDemographicColumnNames[5];

// The canonical patient__ feature names derived from the lists above.
std::vector<std::string> patient_column_names();

// Assembles the full per-lesion feature vector:
//   lesion/perilesional/pred first-order, lesion/perilesional texture,
//   shape, location, lesion__quality__iou_adj, patient passthrough.
// A feature group whose ROI is degenerate (empty shell, no co-occurring
// pairs) contributes missing values instead of failing the lesion.
FeatureVector extract_lesion_features(const RoiContext& ctx, double iou_adj_value,
                                      const FeatureVector& patient_cols);

// Column names extract_lesion_features would produce for this region table.
std::vector<std::string> lesion_feature_names(std::span<const AtlasRegion> regions);

} // namespace uqx
