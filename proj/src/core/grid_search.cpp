#include "grid_search.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "parallel.hpp"
#include "rng.hpp"

namespace uqx {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "elastic_net") return ModelKind::ElasticNet;
    if (name == "ols") return ModelKind::Ols;
    if (name == "random_forest") return ModelKind::RandomForest;
    throw InputError("unknown model kind '" + name +
                     "' (expected elastic_net, ols or random_forest)");
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::ElasticNet: return "elastic_net";
        case ModelKind::Ols: return "ols";
        case ModelKind::RandomForest: return "random_forest";
    }
    return "elastic_net";
}

GridSpec GridSpec::defaults() {
    GridSpec g;
    for (int i = 0; i <= 8; ++i)
        g.en_alphas.push_back(std::pow(10.0, -4.0 + 6.0 * i / 8.0));
    for (int i = 0; i <= 8; ++i) g.en_rhos.push_back(static_cast<double>(i) / 8.0);
    g.en_tols = {1e-3, 1e-4, 1e-5};
    g.rf_n_estimators = {20, 50, 100};
    g.rf_max_depths = {0, 5, 10};
    g.rf_min_splits = {2, 5};
    g.rf_min_leafs = {2, 5};
    g.rf_sqrt_features = {0, 1};
    return g;
}

namespace {

struct Fold {
    std::vector<int> train_rows;
    std::vector<int> val_rows;
    Eigen::MatrixXd val_x;
    Eigen::VectorXd val_y;
    std::vector<double> val_w; // renormalised to the fold size
    bool degenerate = false;   // zero weighted target variance
};

std::vector<Fold> make_folds(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, int k, std::uint64_t seed) {
    const auto n = static_cast<int>(x.rows());
    require_input(k >= 2, "cross-validation needs at least 2 folds");
    require_input(n >= k, "cross-validation needs at least as many rows as folds");

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng = Rng::derive(seed, 0);
    rng.shuffle(order);

    std::vector<Fold> folds(static_cast<std::size_t>(k));
    const int base = n / k, extra = n % k;
    int cursor = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        Fold& fold = folds[static_cast<std::size_t>(f)];
        fold.val_rows.assign(order.begin() + cursor, order.begin() + cursor + size);
        cursor += size;
    }
    for (int f = 0; f < k; ++f) {
        Fold& fold = folds[static_cast<std::size_t>(f)];
        std::vector<std::uint8_t> in_val(static_cast<std::size_t>(n), 0);
        for (int r : fold.val_rows) in_val[static_cast<std::size_t>(r)] = 1;
        for (int r = 0; r < n; ++r)
            if (!in_val[static_cast<std::size_t>(r)]) fold.train_rows.push_back(r);

        fold.val_x.resize(static_cast<Eigen::Index>(fold.val_rows.size()), x.cols());
        fold.val_y.resize(static_cast<Eigen::Index>(fold.val_rows.size()));
        std::vector<double> raw_w;
        for (std::size_t i = 0; i < fold.val_rows.size(); ++i) {
            fold.val_x.row(static_cast<Eigen::Index>(i)) = x.row(fold.val_rows[i]);
            fold.val_y[static_cast<Eigen::Index>(i)] = y[fold.val_rows[i]];
            raw_w.push_back(w[fold.val_rows[i]]);
        }
        fold.val_w = renormalize_weights(raw_w);

        // Weighted target variance decides whether this fold can score R^2.
        const auto m = static_cast<double>(fold.val_rows.size());
        double y_bar = 0.0;
        for (std::size_t i = 0; i < fold.val_rows.size(); ++i)
            y_bar += fold.val_w[i] * fold.val_y[static_cast<Eigen::Index>(i)];
        y_bar /= m;
        double ss_tot = 0.0;
        for (std::size_t i = 0; i < fold.val_rows.size(); ++i) {
            const double diff = fold.val_y[static_cast<Eigen::Index>(i)] - y_bar;
            ss_tot += fold.val_w[i] * diff * diff;
        }
        fold.degenerate = ss_tot <= 0.0;
    }
    return folds;
}

struct CvScore {
    double r2_mean = 0.0;
    double r2_std = 0.0;
    double mae_mean = 0.0;
    double mae_std = 0.0;
    int folds_used = 0;
};

CvScore summarize(const std::vector<double>& r2s, const std::vector<double>& maes) {
    CvScore s;
    s.folds_used = static_cast<int>(r2s.size());
    if (r2s.empty()) return s;
    const auto n = static_cast<double>(r2s.size());
    for (double v : r2s) s.r2_mean += v;
    for (double v : maes) s.mae_mean += v;
    s.r2_mean /= n;
    s.mae_mean /= n;
    if (r2s.size() > 1) {
        double acc_r2 = 0.0, acc_mae = 0.0;
        for (double v : r2s) acc_r2 += (v - s.r2_mean) * (v - s.r2_mean);
        for (double v : maes) acc_mae += (v - s.mae_mean) * (v - s.mae_mean);
        s.r2_std = std::sqrt(acc_r2 / (n - 1.0));
        s.mae_std = std::sqrt(acc_mae / (n - 1.0));
    }
    return s;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

FittedModel search_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const GridSpec& grid,
                               const std::vector<Fold>& folds) {
    require_input(!grid.en_alphas.empty() && !grid.en_rhos.empty() && !grid.en_tols.empty(),
                  "elastic net grid is empty");

    std::vector<WeightedGram> grams;
    grams.reserve(folds.size());
    for (const Fold& fold : folds) grams.push_back(make_weighted_gram(x, y, w, fold.train_rows));

    struct Best {
        bool set = false;
        double alpha = 0.0, rho = 0.0, tol = 0.0;
        CvScore score;
    } best;

    auto better = [](double a_r2, double a_alpha, double a_rho, double a_tol, const Best& b) {
        if (a_r2 != b.score.r2_mean) return a_r2 > b.score.r2_mean;
        if (a_alpha != b.alpha) return a_alpha > b.alpha;
        if (a_rho != b.rho) return a_rho > b.rho;
        return a_tol > b.tol;
    };

    for (double alpha : grid.en_alphas) {
        for (double rho : grid.en_rhos) {
            for (double tol : grid.en_tols) {
                std::vector<double> r2s, maes;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    if (folds[f].degenerate) continue;
                    const LinearModel m =
                        fit_elastic_net_gram(grams[f], alpha, rho, tol, grid.max_sweeps);
                    const Eigen::VectorXd pred = predict_linear(m, folds[f].val_x);
                    const auto y_v = to_vec(folds[f].val_y);
                    const auto p_v = to_vec(pred);
                    r2s.push_back(weighted_r2(y_v, p_v, folds[f].val_w));
                    maes.push_back(weighted_mae(y_v, p_v, folds[f].val_w));
                }
                if (r2s.empty()) continue;
                const CvScore score = summarize(r2s, maes);
                if (!best.set || better(score.r2_mean, alpha, rho, tol, best)) {
                    best = {true, alpha, rho, tol, score};
                }
            }
        }
    }
    require_numeric(best.set, "grid search: every fold had zero weighted target variance");

    FittedModel model;
    model.kind = ModelKind::ElasticNet;
    model.linear = fit_elastic_net(x, y, w, best.alpha, best.rho, best.tol, grid.max_sweeps);
    model.cv_r2 = best.score.r2_mean;
    model.cv_r2_std = best.score.r2_std;
    model.cv_mae = best.score.mae_mean;
    model.cv_mae_std = best.score.mae_std;
    return model;
}

FittedModel search_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const std::vector<Fold>& folds) {
    std::vector<double> r2s, maes;
    for (const Fold& fold : folds) {
        if (fold.degenerate) continue;
        Eigen::MatrixXd tx(static_cast<Eigen::Index>(fold.train_rows.size()), x.cols());
        Eigen::VectorXd ty(static_cast<Eigen::Index>(fold.train_rows.size()));
        Eigen::VectorXd tw(static_cast<Eigen::Index>(fold.train_rows.size()));
        for (std::size_t i = 0; i < fold.train_rows.size(); ++i) {
            tx.row(static_cast<Eigen::Index>(i)) = x.row(fold.train_rows[i]);
            ty[static_cast<Eigen::Index>(i)] = y[fold.train_rows[i]];
            tw[static_cast<Eigen::Index>(i)] = w[fold.train_rows[i]];
        }
        const LinearModel m = fit_ols(tx, ty, tw);
        const Eigen::VectorXd pred = predict_linear(m, fold.val_x);
        const auto y_v = to_vec(fold.val_y);
        const auto p_v = to_vec(pred);
        r2s.push_back(weighted_r2(y_v, p_v, fold.val_w));
        maes.push_back(weighted_mae(y_v, p_v, fold.val_w));
    }
    require_numeric(!r2s.empty(), "grid search: every fold had zero weighted target variance");
    const CvScore score = summarize(r2s, maes);

    FittedModel model;
    model.kind = ModelKind::Ols;
    model.linear = fit_ols(x, y, w);
    model.cv_r2 = score.r2_mean;
    model.cv_r2_std = score.r2_std;
    model.cv_mae = score.mae_mean;
    model.cv_mae_std = score.mae_std;
    return model;
}

FittedModel search_random_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const GridSpec& grid, const std::vector<Fold>& folds,
                                 std::uint64_t seed) {
    require_input(!grid.rf_n_estimators.empty() && !grid.rf_max_depths.empty() &&
                      !grid.rf_min_splits.empty() && !grid.rf_min_leafs.empty() &&
                      !grid.rf_sqrt_features.empty(),
                  "random forest grid is empty");

    struct TrainFold {
        Eigen::MatrixXd x;
        Eigen::VectorXd y;
    };
    std::vector<TrainFold> train_folds;
    for (const Fold& fold : folds) {
        TrainFold tf;
        tf.x.resize(static_cast<Eigen::Index>(fold.train_rows.size()), x.cols());
        tf.y.resize(static_cast<Eigen::Index>(fold.train_rows.size()));
        for (std::size_t i = 0; i < fold.train_rows.size(); ++i) {
            tf.x.row(static_cast<Eigen::Index>(i)) = x.row(fold.train_rows[i]);
            tf.y[static_cast<Eigen::Index>(i)] = y[fold.train_rows[i]];
        }
        train_folds.push_back(std::move(tf));
    }

    // Smaller forests win ties: fewer trees, then bounded-shallow before
    // unbounded depth, then larger split/leaf minima, then fewer features.
    auto depth_rank = [](int depth) { return depth == 0 ? 1000000 : depth; };
    auto simpler = [&](const ForestParams& a, const ForestParams& b) {
        if (a.n_estimators != b.n_estimators) return a.n_estimators < b.n_estimators;
        if (a.max_depth != b.max_depth) return depth_rank(a.max_depth) < depth_rank(b.max_depth);
        if (a.min_samples_split != b.min_samples_split)
            return a.min_samples_split > b.min_samples_split;
        if (a.min_samples_leaf != b.min_samples_leaf)
            return a.min_samples_leaf > b.min_samples_leaf;
        return a.sqrt_features && !b.sqrt_features;
    };

    struct Best {
        bool set = false;
        ForestParams params;
        CvScore score;
    } best;

    for (int n_estimators : grid.rf_n_estimators) {
        for (int max_depth : grid.rf_max_depths) {
            for (int min_split : grid.rf_min_splits) {
                for (int min_leaf : grid.rf_min_leafs) {
                    for (int sqrt_f : grid.rf_sqrt_features) {
                        ForestParams params;
                        params.n_estimators = n_estimators;
                        params.max_depth = max_depth;
                        params.min_samples_split = min_split;
                        params.min_samples_leaf = min_leaf;
                        params.sqrt_features = sqrt_f != 0;

                        std::vector<double> r2s, maes;
                        for (std::size_t f = 0; f < folds.size(); ++f) {
                            if (folds[f].degenerate) continue;
                            const RandomForestModel m =
                                fit_random_forest(train_folds[f].x, train_folds[f].y, params, seed);
                            const Eigen::VectorXd pred = forest_predict(m, folds[f].val_x);
                            const auto y_v = to_vec(folds[f].val_y);
                            const auto p_v = to_vec(pred);
                            r2s.push_back(weighted_r2(y_v, p_v, folds[f].val_w));
                            maes.push_back(weighted_mae(y_v, p_v, folds[f].val_w));
                        }
                        if (r2s.empty()) continue;
                        const CvScore score = summarize(r2s, maes);
                        const bool take = !best.set || score.r2_mean > best.score.r2_mean ||
                                          (score.r2_mean == best.score.r2_mean &&
                                           simpler(params, best.params));
                        if (take) best = {true, params, score};
                    }
                }
            }
        }
    }
    require_numeric(best.set, "grid search: every fold had zero weighted target variance");

    FittedModel model;
    model.kind = ModelKind::RandomForest;
    model.forest = fit_random_forest(x, y, best.params, seed);
    model.cv_r2 = best.score.r2_mean;
    model.cv_r2_std = best.score.r2_std;
    model.cv_mae = best.score.mae_mean;
    model.cv_mae_std = best.score.mae_std;
    return model;
}

} // namespace

FittedModel grid_search_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& w, std::vector<std::string> columns,
                           const GridSpec& grid, ModelKind kind, std::uint64_t seed) {
    require_input(static_cast<Eigen::Index>(columns.size()) == x.cols(),
                  "grid_search_cv column names must match the design matrix");
    const std::vector<Fold> folds = make_folds(x, y, w, grid.folds, seed);

    FittedModel model;
    switch (kind) {
        case ModelKind::ElasticNet: model = search_elastic_net(x, y, w, grid, folds); break;
        case ModelKind::Ols: model = search_ols(x, y, w, folds); break;
        case ModelKind::RandomForest:
            model = search_random_forest(x, y, grid, folds, seed);
            break;
    }
    model.columns = std::move(columns);
    model.seed = seed;
    return model;
}

std::vector<double> model_importance(const FittedModel& model) {
    if (model.kind == ModelKind::RandomForest) return rf_importance(model.forest);
    return std::vector<double>(model.linear.coef.data(),
                               model.linear.coef.data() + model.linear.coef.size());
}

Eigen::VectorXd model_predict(const FittedModel& model, const Eigen::MatrixXd& x) {
    if (model.kind == ModelKind::RandomForest) return forest_predict(model.forest, x);
    return predict_linear(model.linear, x);
}

RepeatedFit repeated_importance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, std::vector<std::string> columns,
                                const GridSpec& grid, ModelKind kind,
                                std::span<const std::uint64_t> seeds, WeightMode weight_mode,
                                int n_threads) {
    require_input(!seeds.empty(), "repeated_importance needs at least one seed");

    RepeatedFit fit;
    fit.models.resize(seeds.size());
    parallel_for(seeds.size(), n_threads, [&](std::size_t i) {
        fit.models[i] = grid_search_cv(x, y, w, columns, grid, kind, seeds[i]);
    });

    ImportanceReport& report = fit.report;
    report.kind = kind;
    report.weights = weight_mode;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.features = columns;

    const std::size_t d = columns.size();
    const auto s = static_cast<double>(seeds.size());
    std::vector<std::vector<double>> importances;
    importances.reserve(seeds.size());
    for (const FittedModel& m : fit.models) importances.push_back(model_importance(m));

    report.mean.assign(d, 0.0);
    report.stddev.assign(d, 0.0);
    // Means accumulate shifted by the first run so identical runs (repeated
    // seeds) collapse to exactly zero spread.
    for (std::size_t f = 0; f < d; ++f) {
        double acc = 0.0;
        for (const auto& imp : importances) acc += imp[f] - importances.front()[f];
        report.mean[f] = importances.front()[f] + acc / s;
    }
    if (seeds.size() > 1) {
        for (const auto& imp : importances)
            for (std::size_t f = 0; f < d; ++f) {
                const double diff = imp[f] - report.mean[f];
                report.stddev[f] += diff * diff;
            }
        for (std::size_t f = 0; f < d; ++f)
            report.stddev[f] = std::sqrt(report.stddev[f] / (s - 1.0));
    }

    const double r2_base = fit.models.front().cv_r2;
    const double mae_base = fit.models.front().cv_mae;
    double r2_acc = 0.0, mae_acc = 0.0;
    for (const FittedModel& m : fit.models) {
        r2_acc += m.cv_r2 - r2_base;
        mae_acc += m.cv_mae - mae_base;
        ImportanceReport::PerSeed ps;
        ps.seed = m.seed;
        ps.cv_r2 = m.cv_r2;
        ps.cv_mae = m.cv_mae;
        if (m.kind == ModelKind::RandomForest) {
            ps.forest = m.forest.params;
        } else {
            ps.alpha = m.linear.alpha;
            ps.rho = m.linear.rho;
            ps.tol = m.linear.tol;
        }
        report.per_seed.push_back(ps);
    }
    report.r2_mean = r2_base + r2_acc / s;
    report.mae_mean = mae_base + mae_acc / s;
    if (seeds.size() > 1) {
        double r2_sq = 0.0, mae_sq = 0.0;
        for (const FittedModel& m : fit.models) {
            r2_sq += (m.cv_r2 - report.r2_mean) * (m.cv_r2 - report.r2_mean);
            mae_sq += (m.cv_mae - report.mae_mean) * (m.cv_mae - report.mae_mean);
        }
        report.r2_std = std::sqrt(r2_sq / (s - 1.0));
        report.mae_std = std::sqrt(mae_sq / (s - 1.0));
    }
    return fit;
}

std::string importance_report_json(const ImportanceReport& report) {
    nlohmann::ordered_json j;
    j["model_kind"] = model_kind_name(report.kind);
    j["weights"] = weight_mode_name(report.weights);
    j["seeds"] = report.seeds;
    j["quality"] = {
        {"r2_mean", report.r2_mean},
        {"r2_std", report.r2_std},
        {"mae_mean", report.mae_mean},
        {"mae_std", report.mae_std},
    };
    j["importances"] = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < report.features.size(); ++f) {
        nlohmann::ordered_json e;
        e["feature"] = report.features[f];
        e["mean"] = report.mean[f];
        e["std"] = report.stddev[f];
        j["importances"].push_back(e);
    }
    j["per_seed"] = nlohmann::ordered_json::array();
    for (const auto& ps : report.per_seed) {
        nlohmann::ordered_json e;
        e["seed"] = ps.seed;
        e["cv_r2"] = ps.cv_r2;
        e["cv_mae"] = ps.cv_mae;
        if (report.kind == ModelKind::RandomForest) {
            e["forest"] = {
                {"n_estimators", ps.forest.n_estimators},
                {"max_depth", ps.forest.max_depth},
                {"min_samples_split", ps.forest.min_samples_split},
                {"min_samples_leaf", ps.forest.min_samples_leaf},
                {"max_features", ps.forest.sqrt_features ? "sqrt" : "all"},
            };
        } else if (report.kind == ModelKind::ElasticNet) {
            e["alpha"] = ps.alpha;
            e["rho"] = ps.rho;
            e["tol"] = ps.tol;
        }
        j["per_seed"].push_back(e);
    }
    return j.dump(2) + "\n";
}

DesignMatrix design_matrix(const FeatureTable& table, WeightMode mode) {
    table.check_consistent();
    require_input(table.fully_observed(), "design matrix requires a fully observed table");
    require_input(table.n_cols() > 0, "design matrix requires at least one feature column");
    require_input(table.n_rows() > 0, "design matrix requires at least one row");

    DesignMatrix dm;
    dm.columns = table.columns;
    dm.x.resize(static_cast<Eigen::Index>(table.n_rows()),
                static_cast<Eigen::Index>(table.n_cols()));
    dm.y.resize(static_cast<Eigen::Index>(table.n_rows()));
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        dm.y[static_cast<Eigen::Index>(r)] = table.target[r];
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            dm.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                *table.cells[r][c];
    }
    const std::vector<double> w =
        sample_weights(std::span<const double>(table.target.data(), table.target.size()), mode);
    dm.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return dm;
}

TransferScore transfer_evaluate(const FittedModel& model,
                                const StandardizationParams& fit_params,
                                const FeatureTable& target_unstandardized, WeightMode mode) {
    require_input(fit_params.columns == model.columns,
                  "transfer_evaluate: fit params do not match the model's columns");

    const FeatureTable projected = select_columns(target_unstandardized, model.columns);
    const DesignMatrix dm = design_matrix(standardize(projected).first, mode);

    const Eigen::VectorXd pred = model_predict(model, dm.x);
    const std::vector<double> y_v(dm.y.data(), dm.y.data() + dm.y.size());
    const std::vector<double> p_v(pred.data(), pred.data() + pred.size());
    const std::vector<double> w_v(dm.w.data(), dm.w.data() + dm.w.size());

    TransferScore score;
    score.r2 = weighted_r2(y_v, p_v, w_v);
    score.mae = weighted_mae(y_v, p_v, w_v);
    return score;
}

} // namespace uqx
