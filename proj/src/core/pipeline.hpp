#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grid3.hpp"
#include "grid_search.hpp"
#include "scores.hpp"
#include "table.hpp"

namespace uqx {

enum class FeatureSet {
    All,
    LesionOnly, // lesion__ and perilesional__ columns only
    NoIouAdj,   // everything except lesion__quality__iou_adj
    OnlyIouAdj, // lesion__quality__iou_adj alone
};

FeatureSet parse_feature_set(const std::string& name);
std::string feature_set_name(FeatureSet set);

struct RoleInput {
    std::string manifest;     // cohort manifest.json, or
    std::string features_csv; // a precomputed feature table
};

struct RunConfig {
    std::vector<std::pair<std::string, RoleInput>> roles; // canonical order
    FeatureSet feature_set = FeatureSet::All;
    ModelKind model = ModelKind::ElasticNet;
    WeightMode weights = WeightMode::Uncertainty;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    double tau = 0.5;
    bool novelty = true;
    double novelty_variance_explained = 0.9;
    int novelty_q = 0; // 0 = pick from the variance rule
    int impute_k = 5;
    double variance_threshold = 1e-6;
    GridSpec grid = GridSpec::defaults();
    int threads = 1;
    std::string out_dir = ".";
};

// Reads a run config; relative paths inside resolve against the config's
// directory. Roles are reordered canonically: train, test_in, test_out,
// then others alphabetically.
RunConfig load_run_config(const std::string& path);

// Per-lesion feature extraction for a whole cohort manifest: ensemble
// aggregation, LSU targets, adjusted IoU against ground truth and the full
// feature assembly, parallel over subjects with per-subject determinism.
FeatureTable extract_features_from_manifest(const std::string& manifest_path, double tau = 0.5,
                                            int threads = 1);

// Segmentation quality report for one subject: voxel scores, detection
// scores and per-lesion adjusted IoU, as a JSON document.
std::string metrics_report_json(const BinaryMask& pred, const BinaryMask& gt, double r = 2e-5);

// Per-lesion LSU table for one ensemble, as CSV (lesion_id,voxels,lsu).
std::string lsu_table_csv(const std::vector<std::string>& member_paths, double tau = 0.5);

// Preprocess a single table (feature-set selection, imputation, variance
// filter, standardisation) and run the repeated importance study on it.
std::string fit_report_json(const FeatureTable& table, const RunConfig& cfg);

struct PipelineOutcome {
    std::vector<std::string> roles;
    bool empty = false; // a role produced no lesions; only warnings written
};

// The full multi-role study: extract or load per-role tables, append novelty
// scores from the first role's bank, preprocess, fit per-role importance
// reports and the cross-role transfer matrix, and write all artifacts under
// cfg.out_dir. With transfer_only, per-role importance JSONs are skipped.
PipelineOutcome run_pipeline(const RunConfig& cfg, bool transfer_only = false);

} // namespace uqx
