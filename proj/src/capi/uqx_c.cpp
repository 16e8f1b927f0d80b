#include "uqx/uqx.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"
#include "core/novelty.hpp"
#include "core/pipeline.hpp"
#include "core/synth.hpp"
#include "core/table.hpp"
#include "core/volume_io.hpp"

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
uqx_status guarded(Fn&& fn) {
    try {
        fn();
        return UQX_OK;
    } catch (const uqx::Error& e) {
        g_last_error = e.what();
        return e.kind() == uqx::ErrorKind::Input ? UQX_ERROR_INPUT : UQX_ERROR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return UQX_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return UQX_ERROR_INTERNAL;
    }
}

uqx_status require_args(bool ok) {
    if (!ok) g_last_error = "null argument";
    return ok ? UQX_OK : UQX_ERROR_INPUT;
}

uqx_status hand_out(const std::string& text, char** out) {
    *out = copy_string(text);
    if (!*out) {
        g_last_error = "out of memory";
        return UQX_ERROR_INTERNAL;
    }
    return UQX_OK;
}

} // namespace

struct uqx_volume_st {
    uqx::Volume volume;
};

struct uqx_table_st {
    uqx::FeatureTable table;
};

extern "C" {

const char* uqx_version(void) { return "1.0.0"; }

const char* uqx_last_error(void) { return g_last_error.c_str(); }

void uqx_string_free(char* s) { std::free(s); }

uqx_status uqx_volume_open(const char* path, uqx_volume_t** out) {
    if (require_args(path && out) != UQX_OK) return UQX_ERROR_INPUT;
    *out = nullptr;
    return guarded([&] { *out = new uqx_volume_st{uqx::read_volume_auto(path)}; });
}

uqx_status uqx_volume_dims(const uqx_volume_t* vol, int64_t* nx, int64_t* ny, int64_t* nz) {
    if (require_args(vol && nx && ny && nz) != UQX_OK) return UQX_ERROR_INPUT;
    *nx = vol->volume.dims().nx;
    *ny = vol->volume.dims().ny;
    *nz = vol->volume.dims().nz;
    return UQX_OK;
}

uqx_status uqx_volume_spacing(const uqx_volume_t* vol, double* sx, double* sy, double* sz) {
    if (require_args(vol && sx && sy && sz) != UQX_OK) return UQX_ERROR_INPUT;
    *sx = vol->volume.spacing().sx;
    *sy = vol->volume.spacing().sy;
    *sz = vol->volume.spacing().sz;
    return UQX_OK;
}

uqx_status uqx_volume_save(const uqx_volume_t* vol, const char* bundle_base) {
    if (require_args(vol && bundle_base) != UQX_OK) return UQX_ERROR_INPUT;
    return guarded([&] { uqx::write_volume_bundle(vol->volume, bundle_base); });
}

void uqx_volume_free(uqx_volume_t* vol) { delete vol; }

uqx_status uqx_table_read_csv(const char* path, uqx_table_t** out) {
    if (require_args(path && out) != UQX_OK) return UQX_ERROR_INPUT;
    *out = nullptr;
    return guarded([&] { *out = new uqx_table_st{uqx::read_feature_csv(path)}; });
}

uqx_status uqx_table_write_csv(const uqx_table_t* table, const char* path) {
    if (require_args(table && path) != UQX_OK) return UQX_ERROR_INPUT;
    return guarded([&] { uqx::write_feature_csv(table->table, path); });
}

uqx_status uqx_table_shape(const uqx_table_t* table, int64_t* n_rows, int64_t* n_cols) {
    if (require_args(table && n_rows && n_cols) != UQX_OK) return UQX_ERROR_INPUT;
    *n_rows = static_cast<int64_t>(table->table.n_rows());
    *n_cols = static_cast<int64_t>(table->table.n_cols());
    return UQX_OK;
}

uqx_status uqx_table_preprocess(const uqx_table_t* table, int impute_k,
                                double variance_threshold, uqx_table_t** out) {
    if (require_args(table && out) != UQX_OK) return UQX_ERROR_INPUT;
    *out = nullptr;
    return guarded([&] {
        uqx::FeatureTable t = uqx::knn_impute(table->table, impute_k);
        t = uqx::variance_filter(t, variance_threshold);
        t = uqx::standardize(t).first;
        *out = new uqx_table_st{std::move(t)};
    });
}

void uqx_table_free(uqx_table_t* table) { delete table; }

uqx_status uqx_metrics_report(const char* pred_path, const char* gt_path, double r,
                              char** out_json) {
    if (require_args(pred_path && gt_path && out_json) != UQX_OK) return UQX_ERROR_INPUT;
    *out_json = nullptr;
    std::string text;
    const uqx_status rc = guarded([&] {
        const uqx::BinaryMask pred = uqx::read_mask_auto(pred_path);
        const uqx::BinaryMask gt = uqx::read_mask_auto(gt_path);
        uqx::require_same_geometry(pred, gt, "metrics inputs");
        text = uqx::metrics_report_json(pred, gt, r);
    });
    if (rc != UQX_OK) return rc;
    return hand_out(text, out_json);
}

uqx_status uqx_lsu_table(const char* const* member_paths, size_t n_members, double tau,
                         char** out_csv) {
    if (require_args(member_paths && out_csv) != UQX_OK) return UQX_ERROR_INPUT;
    *out_csv = nullptr;
    std::string text;
    const uqx_status rc = guarded([&] {
        std::vector<std::string> paths;
        paths.reserve(n_members);
        for (size_t i = 0; i < n_members; ++i) {
            if (!member_paths[i]) throw uqx::InputError("null member path");
            paths.emplace_back(member_paths[i]);
        }
        text = uqx::lsu_table_csv(paths, tau);
    });
    if (rc != UQX_OK) return rc;
    return hand_out(text, out_csv);
}

uqx_status uqx_extract_features(const char* manifest_path, double tau, int threads,
                                char** out_csv) {
    if (require_args(manifest_path && out_csv) != UQX_OK) return UQX_ERROR_INPUT;
    *out_csv = nullptr;
    std::string text;
    const uqx_status rc = guarded([&] {
        const uqx::FeatureTable table =
            uqx::extract_features_from_manifest(manifest_path, tau, threads);
        text = uqx::feature_csv_text(table);
    });
    if (rc != UQX_OK) return rc;
    return hand_out(text, out_csv);
}

uqx_status uqx_novelty_augment(const char* train_csv, const char* target_csv,
                               double variance_explained, int q, char** out_csv) {
    if (require_args(train_csv && target_csv && out_csv) != UQX_OK) return UQX_ERROR_INPUT;
    *out_csv = nullptr;
    std::string text;
    const uqx_status rc = guarded([&] {
        const uqx::FeatureTable train = uqx::read_feature_csv(train_csv);
        const uqx::FeatureTable target = uqx::read_feature_csv(target_csv);
        const uqx::NoveltyModel model = uqx::fit_novelty(train, variance_explained, q);
        text = uqx::feature_csv_text(uqx::append_novelty(model, target));
    });
    if (rc != UQX_OK) return rc;
    return hand_out(text, out_csv);
}

uqx_status uqx_fit_report(const char* table_csv, const char* config_path, char** out_json) {
    if (require_args(table_csv && out_json) != UQX_OK) return UQX_ERROR_INPUT;
    *out_json = nullptr;
    std::string text;
    const uqx_status rc = guarded([&] {
        const uqx::FeatureTable table = uqx::read_feature_csv(table_csv);
        const uqx::RunConfig cfg =
            config_path ? uqx::load_run_config(config_path) : uqx::RunConfig{};
        text = uqx::fit_report_json(table, cfg);
    });
    if (rc != UQX_OK) return rc;
    return hand_out(text, out_json);
}

uqx_status uqx_generate_cohort(const char* spec_json_path, const char* out_dir, int threads,
                               const int64_t* seed_override) {
    if (require_args(spec_json_path && out_dir) != UQX_OK) return UQX_ERROR_INPUT;
    return guarded([&] {
        uqx::CohortSpec spec = uqx::load_cohort_spec(spec_json_path);
        if (seed_override) spec.seed = static_cast<std::uint64_t>(*seed_override);
        uqx::generate_cohort(spec, out_dir, threads);
    });
}

uqx_status uqx_run_pipeline(const char* config_path, int transfer_only, int* out_empty) {
    if (require_args(config_path) != UQX_OK) return UQX_ERROR_INPUT;
    return guarded([&] {
        const uqx::RunConfig cfg = uqx::load_run_config(config_path);
        const uqx::PipelineOutcome outcome = uqx::run_pipeline(cfg, transfer_only != 0);
        if (out_empty) *out_empty = outcome.empty ? 1 : 0;
    });
}

} // extern "C"
