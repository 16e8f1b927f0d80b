#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <uqx/uqx.h>

namespace {

int report_failure(uqx_status rc) {
    std::cerr << "error: " << uqx_last_error() << "\n";
    return static_cast<int>(rc);
}

int emit(char* text, const std::string& out_path) {
    int rc = 0;
    if (out_path.empty()) {
        std::fwrite(text, 1, std::strlen(text), stdout);
    } else {
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        if (f.good()) f.write(text, static_cast<std::streamsize>(std::strlen(text)));
        if (!f.good()) {
            std::cerr << "error: cannot write " << out_path << "\n";
            rc = static_cast<int>(UQX_ERROR_INPUT);
        }
    }
    uqx_string_free(text);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-lesion uncertainty explanation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", uqx_version());

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
    std::string synth_spec, synth_out;
    std::int64_t synth_seed = 0;
    int synth_threads = 1;
    bool synth_has_seed = false;
    synth->add_option("--spec", synth_spec, "Cohort spec JSON")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Override the spec seed")
        ->each([&](const std::string&) { synth_has_seed = true; });
    synth->add_option("--threads", synth_threads, "Worker threads");

    auto* metrics = app.add_subcommand("metrics", "Score a binary prediction against ground truth");
    std::string metrics_pred, metrics_gt, metrics_out;
    double metrics_r = 2e-5;
    metrics->add_option("--pred", metrics_pred, "Predicted mask")->required();
    metrics->add_option("--gt", metrics_gt, "Ground-truth mask")->required();
    metrics->add_option("--r", metrics_r, "Reference lesion-volume fraction");
    metrics->add_option("--out", metrics_out, "Write JSON here instead of stdout");

    auto* lsu = app.add_subcommand("lsu", "Per-lesion uncertainty table for an ensemble");
    std::vector<std::string> lsu_members;
    std::string lsu_out;
    double lsu_tau = 0.5;
    lsu->add_option("--member", lsu_members, "Member probability volume (repeat)")
        ->required()
        ->expected(-2);
    lsu->add_option("--tau", lsu_tau, "Probability threshold");
    lsu->add_option("--out", lsu_out, "Write CSV here instead of stdout");

    auto* features = app.add_subcommand("features", "Extract the lesion feature table for a cohort");
    std::string features_manifest, features_out;
    double features_tau = 0.5;
    int features_threads = 1;
    features->add_option("--manifest", features_manifest, "Cohort manifest JSON")->required();
    features->add_option("--tau", features_tau, "Probability threshold");
    features->add_option("--threads", features_threads, "Worker threads");
    features->add_option("--out", features_out, "Write CSV here instead of stdout");

    auto* novelty = app.add_subcommand("novelty", "Append latent novelty columns to a feature table");
    std::string novelty_train, novelty_target, novelty_out;
    double novelty_var = 0.9;
    int novelty_q = 0;
    novelty->add_option("--train", novelty_train, "Training feature CSV")->required();
    novelty->add_option("--target", novelty_target, "Feature CSV to augment")->required();
    novelty->add_option("--var-explained", novelty_var, "Variance fraction for latent size");
    novelty->add_option("--q", novelty_q, "Fixed latent dimension (0 = automatic)");
    novelty->add_option("--out", novelty_out, "Write CSV here instead of stdout");

    auto* fit = app.add_subcommand("fit", "Cross-validated importance report for a feature table");
    std::string fit_table, fit_config, fit_out;
    fit->add_option("--table", fit_table, "Feature CSV")->required();
    fit->add_option("--config", fit_config, "Run config JSON (optional)");
    fit->add_option("--out", fit_out, "Write JSON here instead of stdout");

    auto* explain = app.add_subcommand("explain", "Run the full explanation pipeline");
    std::string explain_config;
    explain->add_option("--config", explain_config, "Run config JSON")->required();

    auto* crossfit = app.add_subcommand("crossfit", "Cross-dataset transfer matrix only");
    std::string crossfit_config;
    crossfit->add_option("--config", crossfit_config, "Run config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(UQX_ERROR_INPUT);
    }

    if (synth->parsed()) {
        const std::int64_t* seed = synth_has_seed ? &synth_seed : nullptr;
        const uqx_status rc =
            uqx_generate_cohort(synth_spec.c_str(), synth_out.c_str(), synth_threads, seed);
        if (rc != UQX_OK) return report_failure(rc);
        std::cout << "cohort written to " << synth_out << "\n";
        return 0;
    }

    if (metrics->parsed()) {
        char* text = nullptr;
        const uqx_status rc =
            uqx_metrics_report(metrics_pred.c_str(), metrics_gt.c_str(), metrics_r, &text);
        if (rc != UQX_OK) return report_failure(rc);
        return emit(text, metrics_out);
    }

    if (lsu->parsed()) {
        std::vector<const char*> members;
        members.reserve(lsu_members.size());
        for (const auto& m : lsu_members) members.push_back(m.c_str());
        char* text = nullptr;
        const uqx_status rc = uqx_lsu_table(members.data(), members.size(), lsu_tau, &text);
        if (rc != UQX_OK) return report_failure(rc);
        return emit(text, lsu_out);
    }

    if (features->parsed()) {
        char* text = nullptr;
        const uqx_status rc = uqx_extract_features(features_manifest.c_str(), features_tau,
                                                   features_threads, &text);
        if (rc != UQX_OK) return report_failure(rc);
        return emit(text, features_out);
    }

    if (novelty->parsed()) {
        char* text = nullptr;
        const uqx_status rc = uqx_novelty_augment(novelty_train.c_str(), novelty_target.c_str(),
                                                  novelty_var, novelty_q, &text);
        if (rc != UQX_OK) return report_failure(rc);
        return emit(text, novelty_out);
    }

    if (fit->parsed()) {
        char* text = nullptr;
        const uqx_status rc = uqx_fit_report(
            fit_table.c_str(), fit_config.empty() ? nullptr : fit_config.c_str(), &text);
        if (rc != UQX_OK) return report_failure(rc);
        return emit(text, fit_out);
    }

    const bool transfer_only = crossfit->parsed();
    const std::string& config = transfer_only ? crossfit_config : explain_config;
    int empty = 0;
    const uqx_status rc = uqx_run_pipeline(config.c_str(), transfer_only ? 1 : 0, &empty);
    if (rc != UQX_OK) return report_failure(rc);
    if (empty)
        std::cout << "warning: a role produced no lesions; wrote feature tables only\n";
    else
        std::cout << "pipeline artifacts written\n";
    return 0;
}
