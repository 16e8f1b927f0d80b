#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "grid3.hpp"

namespace uqx {

// Neighbor offsets for a connectivity class, excluding the origin.
std::vector<std::array<int, 3>> neighbor_offsets(Connectivity conn);

// Labels foreground components 1..C with two-pass union-find. Final labels
// follow first-encounter order in the x-fastest raster scan, so labelings
// are identical across runs and platforms.
LabelMap connected_components(const BinaryMask& mask, Connectivity conn = Connectivity::c26);

std::int32_t max_label(const LabelMap& labels);

// Flat voxel indices per label; slot 0 is unused so lists are 1-indexed.
std::vector<std::vector<std::size_t>> label_voxels(const LabelMap& labels);

std::vector<std::size_t> label_sizes(const LabelMap& labels);

BinaryMask mask_of_label(const LabelMap& labels, std::int32_t label);

// Morphological dilation by a Chebyshev ball of the given radius (one
// 26-neighborhood growth step per iteration), implemented as three
// separable 1D passes per iteration.
BinaryMask dilate(const BinaryMask& mask, int iterations);

// Voxels within `width` dilation steps of the lesion, excluding the lesion.
BinaryMask perilesional_shell(const BinaryMask& lesion, int width = 4);

// |roi intersect region| / |roi|. The ROI must be non-empty.
double overlap_fraction(const BinaryMask& roi, const BinaryMask& region);

} // namespace uqx
