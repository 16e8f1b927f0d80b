#pragma once

#include <string>

#include "grid3.hpp"

namespace uqx {

// Volume bundle: <base>.json sidecar + <base>.raw payload. The sidecar pins
// dims, spacing_mm, dtype ("f32" or "u8"), order ("x-fastest") and
// byte_order ("little"); the payload is the bare voxel array.
Volume read_volume_bundle(const std::string& base);
BinaryMask read_mask_bundle(const std::string& base);
LabelMap read_label_bundle(const std::string& base);

void write_volume_bundle(const Volume& v, const std::string& base);
void write_mask_bundle(const BinaryMask& m, const std::string& base);
void write_label_bundle(const LabelMap& labels, const std::string& base);

// Minimal NIfTI-1 reader: uncompressed .nii, little-endian, datatype uint8
// or float32, 3D only. uint8 payloads are widened to float.
Volume read_nifti(const std::string& path);

// Dispatches on extension: ".nii" goes through the NIfTI reader, anything
// else is treated as a bundle base path (a trailing ".json" is stripped).
Volume read_volume_auto(const std::string& path);
BinaryMask read_mask_auto(const std::string& path);

} // namespace uqx
