#pragma once

#include <cstdint>
#include <string>

#include "grid3.hpp"

namespace uqx {

// Parameters of a synthetic cohort: ellipsoid lesions planted in a spherical
// brain phantom with a cortical grey-matter shell, segmented by an ensemble
// whose members perturb each lesion boundary. The per-lesion disagreement
// scale is
//   delta = c_sv * (surface/volume) + c_gm * (1 - |2*gm_overlap - 1|) + noise
// and member k grows or shrinks all semi-axes by delta * N(0,1) mm, so
// surface-heavy and cortex-straddling lesions are reproducibly harder. All
// three coefficients at 0 make every member identical to the planted lesion.
struct CohortSpec {
    std::string dataset_id = "cohort";
    std::uint64_t seed = 0;
    int n_subjects = 10;
    Dims3 dims{64, 64, 64};
    Spacing3 spacing{1.0, 1.0, 1.0};
    int lesions_min = 3;
    int lesions_max = 6;
    double axis_min_mm = 2.0;
    double axis_max_mm = 6.0;
    double elongation_min = 1.0;
    double elongation_max = 2.5;
    double cortical_fraction = 0.5;
    int ensemble_size = 5;
    double c_sv = 0.0;
    double c_gm = 0.0;
    double disagreement_noise = 0.0;
    double wm_intensity = 1000.0;
    double gm_intensity = 800.0;
    double lesion_factor = 0.6;
    double image_noise = 20.0;
    double background_intensity = 100.0;
    double demographics_missing_rate = 0.0;
};

CohortSpec load_cohort_spec(const std::string& path);

// Writes the cohort under out_dir: manifest.json, atlas_regions.json,
// demographics.csv and per-subject volume bundles (image, gt, gm, atlas,
// member_<k>). Byte-identical for identical specs. Throws if a lesion cannot
// be placed within 1000 rejection-sampling attempts.
void generate_cohort(const CohortSpec& spec, const std::string& out_dir, int n_threads = 1);

} // namespace uqx
