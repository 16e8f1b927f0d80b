#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elastic_net.hpp"
#include "random_forest.hpp"
#include "scores.hpp"
#include "table.hpp"

namespace uqx {

enum class ModelKind {
    ElasticNet,
    Ols,
    RandomForest,
};

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

// Hyperparameter search space. The elastic-net axes default to 9 log-spaced
// alphas in [1e-4, 1e2], 9 evenly spaced rhos in [0, 1] and three tolerances;
// the forest axes default to 3*3*2*2*2 combinations. OLS has no axes.
struct GridSpec {
    std::vector<double> en_alphas;
    std::vector<double> en_rhos;
    std::vector<double> en_tols;
    std::vector<int> rf_n_estimators;
    std::vector<int> rf_max_depths; // 0 = unbounded
    std::vector<int> rf_min_splits;
    std::vector<int> rf_min_leafs;
    std::vector<int> rf_sqrt_features; // 0 = all features, 1 = sqrt
    int folds = 5;
    int max_sweeps = 10000;

    static GridSpec defaults();
};

// One cross-validated, refit explainer. `columns` records the feature order
// the model was fitted on; cv_* summarise the winning grid point across
// folds.
struct FittedModel {
    ModelKind kind = ModelKind::ElasticNet;
    LinearModel linear;
    RandomForestModel forest;
    std::vector<std::string> columns;
    std::uint64_t seed = 0;
    double cv_r2 = 0.0;
    double cv_r2_std = 0.0;
    double cv_mae = 0.0;
    double cv_mae_std = 0.0;
};

// K-fold CV over the grid with seeded shuffling. Fold weights are
// renormalised to the fold size; validation folds with zero weighted target
// variance are skipped. Score ties prefer stronger regularisation (higher
// alpha, then higher rho, then looser tol) for the elastic net and smaller
// forests for the random forest. The winner is refit on all rows.
FittedModel grid_search_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& w, std::vector<std::string> columns,
                           const GridSpec& grid, ModelKind kind, std::uint64_t seed);

// Signed feature attribution of a fitted explainer: raw coefficients for
// linear models, impurity importances for forests.
std::vector<double> model_importance(const FittedModel& model);

Eigen::VectorXd model_predict(const FittedModel& model, const Eigen::MatrixXd& x);

struct ImportanceReport {
    ModelKind kind = ModelKind::ElasticNet;
    WeightMode weights = WeightMode::Uniform;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> features;
    std::vector<double> mean;   // per feature, across seeds
    std::vector<double> stddev; // sample std across seeds
    double r2_mean = 0.0;
    double r2_std = 0.0;
    double mae_mean = 0.0;
    double mae_std = 0.0;

    struct PerSeed {
        std::uint64_t seed = 0;
        double cv_r2 = 0.0;
        double cv_mae = 0.0;
        double alpha = 0.0;
        double rho = 0.0;
        double tol = 0.0;
        ForestParams forest;
    };
    std::vector<PerSeed> per_seed;
};

struct RepeatedFit {
    ImportanceReport report;
    std::vector<FittedModel> models; // aligned with report.seeds
};

// Runs grid_search_cv once per seed (parallel over seeds) and aggregates
// feature attributions as mean +- sample std across seeds.
RepeatedFit repeated_importance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, std::vector<std::string> columns,
                                const GridSpec& grid, ModelKind kind,
                                std::span<const std::uint64_t> seeds, WeightMode weight_mode,
                                int n_threads = 1);

std::string importance_report_json(const ImportanceReport& report);

struct TransferScore {
    double r2 = 0.0;
    double mae = 0.0;
};

// Evaluates a frozen model on another dataset: the target table is
// standardised with its own statistics over the model's columns, scored with
// the target's own weights. Evaluating the fitting table reproduces the
// fit-set scores.
TransferScore transfer_evaluate(const FittedModel& model,
                                const StandardizationParams& fit_params,
                                const FeatureTable& target_unstandardized, WeightMode mode);

// Standardised design matrix + target/weights for a fully observed table.
struct DesignMatrix {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd w;
    std::vector<std::string> columns;
};

DesignMatrix design_matrix(const FeatureTable& table, WeightMode mode);

} // namespace uqx
