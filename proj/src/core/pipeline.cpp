#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "ensemble.hpp"
#include "feature_extract.hpp"
#include "metrics.hpp"
#include "morphology.hpp"
#include "novelty.hpp"
#include "parallel.hpp"
#include "volume_io.hpp"

namespace uqx {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

std::string parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

int role_rank(const std::string& name) {
    if (name == "train") return 0;
    if (name == "test_in") return 1;
    if (name == "test_out") return 2;
    return 3;
}

} // namespace

FeatureSet parse_feature_set(const std::string& name) {
    if (name == "all") return FeatureSet::All;
    if (name == "lesion_only") return FeatureSet::LesionOnly;
    if (name == "no_iou_adj") return FeatureSet::NoIouAdj;
    if (name == "only_iou_adj") return FeatureSet::OnlyIouAdj;
    throw InputError("unknown feature set '" + name +
                     "' (expected all, lesion_only, no_iou_adj or only_iou_adj)");
}

std::string feature_set_name(FeatureSet set) {
    switch (set) {
        case FeatureSet::All: return "all";
        case FeatureSet::LesionOnly: return "lesion_only";
        case FeatureSet::NoIouAdj: return "no_iou_adj";
        case FeatureSet::OnlyIouAdj: return "only_iou_adj";
    }
    return "all";
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open run config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed run config " + path + ": " + e.what());
    }
    const std::string base = parent_dir(path);

    RunConfig cfg;
    try {
        if (j.contains("roles")) {
            require_input(j["roles"].is_object(), "run config roles must be an object");
            cfg.roles.clear();
            for (const auto& [name, entry] : j["roles"].items()) {
                RoleInput input;
                if (entry.contains("manifest"))
                    input.manifest = resolve_path(base, entry["manifest"].get<std::string>());
                if (entry.contains("features"))
                    input.features_csv = resolve_path(base, entry["features"].get<std::string>());
                require_input(input.manifest.empty() != input.features_csv.empty(),
                              "role '" + name +
                                  "' must set exactly one of manifest/features");
                cfg.roles.emplace_back(name, std::move(input));
            }
            std::sort(cfg.roles.begin(), cfg.roles.end(), [](const auto& a, const auto& b) {
                const int ra = role_rank(a.first), rb = role_rank(b.first);
                return ra != rb ? ra < rb : a.first < b.first;
            });
        }
        if (j.contains("feature_set"))
            cfg.feature_set = parse_feature_set(j["feature_set"].get<std::string>());
        if (j.contains("model")) cfg.model = parse_model_kind(j["model"].get<std::string>());
        if (j.contains("weights"))
            cfg.weights = parse_weight_mode(j["weights"].get<std::string>());
        if (j.contains("seeds")) {
            cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
            require_input(!cfg.seeds.empty(), "run config seeds must not be empty");
        }
        if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
        if (j.contains("novelty")) cfg.novelty = j["novelty"].get<bool>();
        if (j.contains("novelty_variance_explained"))
            cfg.novelty_variance_explained = j["novelty_variance_explained"].get<double>();
        if (j.contains("novelty_q")) cfg.novelty_q = j["novelty_q"].get<int>();
        if (j.contains("impute_k")) cfg.impute_k = j["impute_k"].get<int>();
        if (j.contains("variance_threshold"))
            cfg.variance_threshold = j["variance_threshold"].get<double>();
        if (j.contains("folds")) cfg.grid.folds = j["folds"].get<int>();
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            if (g.contains("alphas")) cfg.grid.en_alphas = g["alphas"].get<std::vector<double>>();
            if (g.contains("rhos")) cfg.grid.en_rhos = g["rhos"].get<std::vector<double>>();
            if (g.contains("tols")) cfg.grid.en_tols = g["tols"].get<std::vector<double>>();
            if (g.contains("n_estimators"))
                cfg.grid.rf_n_estimators = g["n_estimators"].get<std::vector<int>>();
            if (g.contains("max_depths"))
                cfg.grid.rf_max_depths = g["max_depths"].get<std::vector<int>>();
            if (g.contains("min_samples_split"))
                cfg.grid.rf_min_splits = g["min_samples_split"].get<std::vector<int>>();
            if (g.contains("min_samples_leaf"))
                cfg.grid.rf_min_leafs = g["min_samples_leaf"].get<std::vector<int>>();
            if (g.contains("max_features")) {
                cfg.grid.rf_sqrt_features.clear();
                for (const auto& m : g["max_features"]) {
                    const std::string v = m.get<std::string>();
                    require_input(v == "all" || v == "sqrt",
                                  "grid max_features entries must be all or sqrt");
                    cfg.grid.rf_sqrt_features.push_back(v == "sqrt" ? 1 : 0);
                }
            }
        }
        if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
        if (j.contains("out_dir"))
            cfg.out_dir = resolve_path(base, j["out_dir"].get<std::string>());
    } catch (const json::exception& e) {
        throw InputError("run config " + path + " has invalid fields: " + e.what());
    }
    require_input(cfg.threads >= 1, "run config threads must be >= 1");
    return cfg;
}

namespace {

struct ManifestSubject {
    std::string id;
    std::string image, gt, gm, atlas;
    std::vector<std::string> members;
};

struct ManifestData {
    std::string dataset_id;
    std::vector<AtlasRegion> regions;
    std::map<std::string, FeatureVector> demographics;
    std::vector<ManifestSubject> subjects;
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::map<std::string, FeatureVector> read_demographics(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open demographics table: " + path);

    std::string line;
    require_input(static_cast<bool>(std::getline(in, line)),
                  "demographics table is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    require_input(!header.empty() && header[0] == "subject_id",
                  "demographics header must start with subject_id: " + path);

    std::vector<std::string> known;
    for (const char* n : kQualityColumnNames) known.push_back(n);
    for (const char* n : kDemographicColumnNames) known.push_back(n);
    std::map<std::string, std::size_t> col_of;
    for (std::size_t i = 1; i < header.size(); ++i) {
        require_input(std::find(known.begin(), known.end(), header[i]) != known.end(),
                      "unknown demographics column '" + header[i] + "' in " + path);
        col_of[header[i]] = i;
    }

    std::map<std::string, FeatureVector> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        require_input(cells.size() == header.size(),
                      "wrong cell count in " + path + ":" + std::to_string(line_no));

        FeatureVector fv;
        auto add = [&](const std::string& prefix, const char* name) {
            const std::string column = prefix + name;
            const auto it = col_of.find(name);
            if (it == col_of.end() || cells[it->second].empty()) {
                fv.push_missing(column);
                return;
            }
            double v = 0.0;
            const std::string& cell = cells[it->second];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            require_input(res.ec == std::errc() && res.ptr == cell.data() + cell.size() &&
                              std::isfinite(v),
                          "bad demographics value '" + cell + "' in " + path + ":" +
                              std::to_string(line_no));
            fv.push(column, v);
        };
        for (const char* n : kQualityColumnNames) add("patient__quality__", n);
        for (const char* n : kDemographicColumnNames) add("patient__demographics__", n);

        require_input(!out.contains(cells[0]),
                      "duplicate subject_id '" + cells[0] + "' in " + path);
        out.emplace(cells[0], std::move(fv));
    }
    return out;
}

ManifestData load_manifest(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed manifest " + path + ": " + e.what());
    }
    const std::string base = parent_dir(path);

    ManifestData m;
    try {
        m.dataset_id = j.at("dataset_id").get<std::string>();
        m.regions = read_atlas_regions(
            resolve_path(base, j.at("atlas_regions").get<std::string>()));
        if (j.contains("demographics"))
            m.demographics =
                read_demographics(resolve_path(base, j["demographics"].get<std::string>()));
        for (const auto& s : j.at("subjects")) {
            ManifestSubject subj;
            subj.id = s.at("subject_id").get<std::string>();
            subj.image = resolve_path(base, s.at("image").get<std::string>());
            subj.gt = resolve_path(base, s.at("gt_mask").get<std::string>());
            subj.gm = resolve_path(base, s.at("gm_mask").get<std::string>());
            subj.atlas = resolve_path(base, s.at("atlas").get<std::string>());
            for (const auto& member : s.at("members"))
                subj.members.push_back(resolve_path(base, member.get<std::string>()));
            require_input(subj.members.size() >= 2,
                          "subject " + subj.id + " needs at least 2 ensemble members");
            m.subjects.push_back(std::move(subj));
        }
    } catch (const json::exception& e) {
        throw InputError("manifest " + path + " is missing fields: " + e.what());
    }
    require_input(!m.subjects.empty(), "manifest has no subjects: " + path);
    return m;
}

struct SubjectRows {
    std::vector<RowId> ids;
    std::vector<std::vector<std::optional<double>>> cells;
    std::vector<double> targets;
};

SubjectRows extract_subject(const ManifestData& manifest, const ManifestSubject& subj,
                            double tau, const std::vector<std::string>& columns) {
    const Volume image = read_volume_auto(subj.image);
    const BinaryMask gt = read_mask_auto(subj.gt);
    const BinaryMask gm = read_mask_auto(subj.gm);
    const LabelMap atlas = read_label_bundle(subj.atlas);
    require_same_geometry(image, gt, "subject " + subj.id);
    require_same_geometry(image, gm, "subject " + subj.id);
    require_same_geometry(image, atlas, "subject " + subj.id);

    std::vector<Volume> member_volumes;
    member_volumes.reserve(subj.members.size());
    for (const auto& path : subj.members) {
        member_volumes.push_back(read_volume_auto(path));
        require_same_geometry(image, member_volumes.back(), "subject " + subj.id);
    }
    const EnsemblePrediction ensemble = make_ensemble(std::move(member_volumes));
    const AggregatedPrediction agg = aggregate(ensemble, tau);

    SubjectRows rows;
    if (agg.n_lesions == 0) return rows;

    const LabelMap gt_labels = connected_components(gt, Connectivity::c26);
    const std::vector<double> lsu_values = lsu_all(agg, ensemble, tau);

    FeatureVector patient_cols;
    const auto demo_it = manifest.demographics.find(subj.id);
    if (demo_it != manifest.demographics.end()) {
        patient_cols = demo_it->second;
    } else {
        for (const auto& name : patient_column_names()) patient_cols.push_missing(name);
    }

    for (std::int32_t label = 1; label <= agg.n_lesions; ++label) {
        const BinaryMask lesion = mask_of_label(agg.labels, label);
        const BinaryMask shell = perilesional_shell(lesion, 4);
        const double iou = iou_adj(label, agg.labels, gt_labels);

        const RoiContext ctx{image, lesion, shell, agg.mask, gm, atlas, manifest.regions};
        const FeatureVector fv = extract_lesion_features(ctx, iou, patient_cols);
        require_input(fv.size() == columns.size(),
                      "feature assembly width mismatch for subject " + subj.id);
        if (label == 1) {
            for (std::size_t i = 0; i < columns.size(); ++i)
                require_input(fv.name(i) == columns[i],
                              "feature assembly order mismatch for subject " + subj.id);
        }

        rows.ids.push_back({manifest.dataset_id, subj.id, label});
        std::vector<std::optional<double>> row;
        row.reserve(fv.size());
        for (std::size_t i = 0; i < fv.size(); ++i) row.push_back(fv.value(i));
        rows.cells.push_back(std::move(row));
        rows.targets.push_back(lsu_values[static_cast<std::size_t>(label) - 1]);
    }
    return rows;
}

} // namespace

FeatureTable extract_features_from_manifest(const std::string& manifest_path, double tau,
                                            int threads) {
    const ManifestData manifest = load_manifest(manifest_path);

    FeatureTable table;
    table.columns = lesion_feature_names(manifest.regions);

    std::vector<SubjectRows> per_subject(manifest.subjects.size());
    parallel_for(manifest.subjects.size(), threads, [&](std::size_t si) {
        per_subject[si] = extract_subject(manifest, manifest.subjects[si], tau, table.columns);
    });

    for (SubjectRows& rows : per_subject) {
        for (std::size_t i = 0; i < rows.ids.size(); ++i) {
            table.rows.push_back(std::move(rows.ids[i]));
            table.cells.push_back(std::move(rows.cells[i]));
            table.target.push_back(rows.targets[i]);
        }
    }
    table.check_consistent();
    return table;
}

std::string metrics_report_json(const BinaryMask& pred, const BinaryMask& gt, double r) {
    const LabelMap pred_labels = connected_components(pred, Connectivity::c26);
    const LabelMap gt_labels = connected_components(gt, Connectivity::c26);
    const LesionMatch match = match_lesions(pred_labels, gt_labels);
    const DetectionScores det = detection_scores(match);
    const std::vector<std::size_t> sizes = label_sizes(pred_labels);

    nlohmann::ordered_json j;
    j["dsc"] = dice(pred, gt);
    j["ndsc"] = ndsc(pred, gt, r);
    j["lesion_counts"] = {
        {"pred", max_label(pred_labels)},
        {"gt", max_label(gt_labels)},
        {"tp", match.tp_pred.size()},
        {"fp", match.fp_pred.size()},
        {"fn", match.fn_gt.size()},
    };
    j["lf1"] = det.lf1;
    j["lppv"] = det.lppv;
    j["ltpr"] = det.ltpr;
    j["per_lesion"] = nlohmann::ordered_json::array();
    for (std::int32_t label = 1; label <= max_label(pred_labels); ++label) {
        nlohmann::ordered_json e;
        e["label"] = label;
        e["n_voxels"] = sizes[static_cast<std::size_t>(label)];
        e["iou_adj"] = iou_adj(label, pred_labels, gt_labels);
        j["per_lesion"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string lsu_table_csv(const std::vector<std::string>& member_paths, double tau) {
    require_input(member_paths.size() >= 2, "lsu needs at least 2 ensemble members");
    std::vector<Volume> members;
    members.reserve(member_paths.size());
    for (const auto& path : member_paths) members.push_back(read_volume_auto(path));
    const EnsemblePrediction ensemble = make_ensemble(std::move(members));
    const AggregatedPrediction agg = aggregate(ensemble, tau);
    const std::vector<double> values = lsu_all(agg, ensemble, tau);
    const std::vector<std::size_t> sizes = label_sizes(agg.labels);

    std::string csv = "lesion_id,voxels,lsu\n";
    for (std::int32_t label = 1; label <= agg.n_lesions; ++label) {
        csv += std::to_string(label);
        csv += ',';
        csv += std::to_string(sizes[static_cast<std::size_t>(label)]);
        csv += ',';
        csv += format_double(values[static_cast<std::size_t>(label) - 1]);
        csv += '\n';
    }
    return csv;
}

namespace {

std::vector<std::string> apply_feature_set(const std::vector<std::string>& columns,
                                           FeatureSet set) {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        switch (set) {
            case FeatureSet::All: out.push_back(c); break;
            case FeatureSet::LesionOnly:
                if (c.rfind("lesion__", 0) == 0 || c.rfind("perilesional__", 0) == 0)
                    out.push_back(c);
                break;
            case FeatureSet::NoIouAdj:
                if (c != "lesion__quality__iou_adj") out.push_back(c);
                break;
            case FeatureSet::OnlyIouAdj:
                if (c == "lesion__quality__iou_adj") out.push_back(c);
                break;
        }
    }
    require_input(!out.empty(), "feature set '" + feature_set_name(set) +
                                    "' selected no columns");
    return out;
}

FeatureTable preprocess_table(const FeatureTable& table, const RunConfig& cfg) {
    const std::vector<std::string> selected = apply_feature_set(table.columns, cfg.feature_set);
    FeatureTable prepped = select_columns(table, selected);
    prepped = knn_impute(prepped, cfg.impute_k);
    return variance_filter(prepped, cfg.variance_threshold);
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string fit_report_json(const FeatureTable& table, const RunConfig& cfg) {
    require_input(table.n_rows() >= 2, "fit needs at least 2 rows");
    const FeatureTable filtered = preprocess_table(table, cfg);
    require_input(filtered.n_cols() > 0, "no informative feature columns survive filtering");
    const FeatureTable standardized = standardize(filtered).first;
    const DesignMatrix dm = design_matrix(standardized, cfg.weights);
    const RepeatedFit fit = repeated_importance(dm.x, dm.y, dm.w, dm.columns, cfg.grid,
                                                cfg.model, cfg.seeds, cfg.weights, cfg.threads);
    return importance_report_json(fit.report);
}

namespace {

struct RoleData {
    std::string name;
    FeatureTable raw;          // with novelty columns; the artifact table
    FeatureTable common;       // preprocessed, restricted to shared columns
    FeatureTable standardized;
    StandardizationParams params;
    RepeatedFit fit;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require_input(out.good(), "cannot open output file: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    require_input(out.good(), "failed to write output file: " + path);
}

std::string role_list(const std::vector<RoleData>& roles) {
    std::string out;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (i) out += ", ";
        out += roles[i].name;
    }
    return out;
}

} // namespace

PipelineOutcome run_pipeline(const RunConfig& cfg, bool transfer_only) {
    require_input(!cfg.roles.empty(), "run config defines no roles");
    require_input(!cfg.seeds.empty(), "run config defines no seeds");
    fs::create_directories(cfg.out_dir);

    PipelineOutcome outcome;
    std::vector<RoleData> roles;
    for (const auto& [name, input] : cfg.roles) {
        RoleData role;
        role.name = name;
        role.raw = input.features_csv.empty()
                       ? extract_features_from_manifest(input.manifest, cfg.tau, cfg.threads)
                       : read_feature_csv(input.features_csv);
        roles.push_back(std::move(role));
        outcome.roles.push_back(name);
    }

    // A role with no lesions cannot support fitting or transfer; report and
    // leave only the (possibly empty) feature tables behind.
    const bool any_empty =
        std::any_of(roles.begin(), roles.end(), [](const RoleData& r) { return r.raw.n_rows() == 0; });
    if (any_empty) {
        std::string summary = "uncertainty explanation summary\n";
        summary += "===============================\n";
        summary += "roles: " + role_list(roles) + "\n\n";
        for (const RoleData& role : roles) {
            write_feature_csv(role.raw, cfg.out_dir + "/features_" + role.name + ".csv");
            if (role.raw.n_rows() == 0)
                summary += "warning: role '" + role.name +
                           "' produced no predicted lesions; no models were fitted\n";
        }
        write_text(cfg.out_dir + "/summary.txt", summary);
        outcome.empty = true;
        return outcome;
    }

    if (cfg.novelty) {
        const NoveltyModel novelty =
            fit_novelty(roles.front().raw, cfg.novelty_variance_explained, cfg.novelty_q);
        for (RoleData& role : roles) role.raw = append_novelty(novelty, role.raw);
    }

    for (const RoleData& role : roles)
        write_feature_csv(role.raw, cfg.out_dir + "/features_" + role.name + ".csv");

    // Preprocess each role, then restrict every role to the columns that
    // survived filtering everywhere so models transfer across roles.
    std::vector<FeatureTable> prepped;
    prepped.reserve(roles.size());
    for (const RoleData& role : roles) prepped.push_back(preprocess_table(role.raw, cfg));

    std::vector<std::string> common;
    for (const auto& c : prepped.front().columns) {
        bool everywhere = true;
        for (std::size_t i = 1; i < prepped.size() && everywhere; ++i)
            everywhere = std::find(prepped[i].columns.begin(), prepped[i].columns.end(), c) !=
                         prepped[i].columns.end();
        if (everywhere) common.push_back(c);
    }
    require_input(!common.empty(),
                  "no feature column is informative in every role; nothing to fit");

    for (std::size_t i = 0; i < roles.size(); ++i) {
        roles[i].common = select_columns(prepped[i], common);
        auto standardized = standardize(roles[i].common);
        roles[i].standardized = std::move(standardized.first);
        roles[i].params = std::move(standardized.second);
    }

    for (RoleData& role : roles) {
        const DesignMatrix dm = design_matrix(role.standardized, cfg.weights);
        role.fit = repeated_importance(dm.x, dm.y, dm.w, dm.columns, cfg.grid, cfg.model,
                                       cfg.seeds, cfg.weights, cfg.threads);
        if (!transfer_only)
            write_text(cfg.out_dir + "/importance_" + role.name + ".json",
                       importance_report_json(role.fit.report));
    }

    // Transfer matrix: every fitted model evaluated on every role.
    nlohmann::ordered_json matrix;
    matrix["model_kind"] = model_kind_name(cfg.model);
    matrix["weights"] = weight_mode_name(cfg.weights);
    matrix["seeds"] = cfg.seeds;
    matrix["roles"] = nlohmann::ordered_json::array();
    for (const RoleData& role : roles) matrix["roles"].push_back(role.name);
    matrix["cells"] = nlohmann::ordered_json::array();

    std::vector<std::vector<std::pair<double, double>>> matrix_means(
        roles.size(), std::vector<std::pair<double, double>>(roles.size()));
    for (std::size_t f = 0; f < roles.size(); ++f) {
        for (std::size_t e = 0; e < roles.size(); ++e) {
            std::vector<double> r2s, maes;
            for (const FittedModel& model : roles[f].fit.models) {
                const TransferScore score =
                    transfer_evaluate(model, roles[f].params, roles[e].common, cfg.weights);
                r2s.push_back(score.r2);
                maes.push_back(score.mae);
            }
            const auto n = static_cast<double>(r2s.size());
            double r2_mean = 0.0, mae_mean = 0.0;
            for (double v : r2s) r2_mean += v;
            for (double v : maes) mae_mean += v;
            r2_mean /= n;
            mae_mean /= n;
            double r2_std = 0.0, mae_std = 0.0;
            if (r2s.size() > 1) {
                for (double v : r2s) r2_std += (v - r2_mean) * (v - r2_mean);
                for (double v : maes) mae_std += (v - mae_mean) * (v - mae_mean);
                r2_std = std::sqrt(r2_std / (n - 1.0));
                mae_std = std::sqrt(mae_std / (n - 1.0));
            }
            matrix_means[f][e] = {r2_mean, r2_std};

            nlohmann::ordered_json cell;
            cell["fit"] = roles[f].name;
            cell["eval"] = roles[e].name;
            cell["r2_mean"] = r2_mean;
            cell["r2_std"] = r2_std;
            cell["mae_mean"] = mae_mean;
            cell["mae_std"] = mae_std;
            cell["r2_per_seed"] = r2s;
            cell["mae_per_seed"] = maes;
            matrix["cells"].push_back(cell);
        }
    }
    write_text(cfg.out_dir + "/transfer_matrix.json", matrix.dump(2) + "\n");

    // Human-readable run summary.
    std::string summary = "uncertainty explanation summary\n";
    summary += "===============================\n";
    summary += "roles: " + role_list(roles) + "\n";
    summary += "model: " + model_kind_name(cfg.model) + " | weights: " +
               weight_mode_name(cfg.weights) + " | feature_set: " +
               feature_set_name(cfg.feature_set) + "\n";
    summary += "seeds:";
    for (std::uint64_t s : cfg.seeds) summary += " " + std::to_string(s);
    summary += "\ncommon feature columns: " + std::to_string(common.size()) + "\n";

    for (const RoleData& role : roles) {
        const ImportanceReport& report = role.fit.report;
        summary += "\n[role " + role.name + "]\n";
        summary += "rows: " + std::to_string(role.raw.n_rows()) + "\n";
        summary += "cv_r2: " + fixed(report.r2_mean) + " +- " + fixed(report.r2_std) +
                   " | cv_mae: " + fixed(report.mae_mean) + " +- " + fixed(report.mae_std) +
                   "\n";

        std::vector<std::size_t> order(report.features.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ma = std::abs(report.mean[a]), mb = std::abs(report.mean[b]);
            return ma != mb ? ma > mb : report.features[a] < report.features[b];
        });
        const std::size_t top = std::min<std::size_t>(20, order.size());
        summary += "top features by |mean importance|:\n";
        for (std::size_t i = 0; i < top; ++i) {
            const std::size_t f = order[i];
            const double v = report.mean[f];
            char line[160];
            std::snprintf(line, sizeof(line), "  %2zu. %+0.6f +- %0.6f  %s\n", i + 1, v,
                          report.stddev[f], report.features[f].c_str());
            summary += line;
        }
    }

    summary += "\n[transfer r2 (fit row -> eval column)]\n";
    summary += "fit\\eval";
    for (const RoleData& role : roles) summary += "\t" + role.name;
    summary += "\n";
    for (std::size_t f = 0; f < roles.size(); ++f) {
        summary += roles[f].name;
        for (std::size_t e = 0; e < roles.size(); ++e)
            summary += "\t" + fixed(matrix_means[f][e].first) + "+-" +
                       fixed(matrix_means[f][e].second);
        summary += "\n";
    }
    write_text(cfg.out_dir + "/summary.txt", summary);
    return outcome;
}

} // namespace uqx
