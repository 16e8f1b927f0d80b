#include "random_forest.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace uqx {

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const ForestParams& params;
    Rng& rng;
    RegressionTree& tree;

    struct Split {
        bool found = false;
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    static double node_sse(const std::vector<int>& samples, const Eigen::VectorXd& y,
                           double mean) {
        double sse = 0.0;
        for (int i : samples) {
            const double diff = y[i] - mean;
            sse += diff * diff;
        }
        return sse;
    }

    Split best_split(const std::vector<int>& samples, double parent_sse) {
        const int d = static_cast<int>(x.cols());
        std::vector<std::uint32_t> candidates;
        if (params.sqrt_features) {
            const auto m = static_cast<std::uint32_t>(
                std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d)))));
            candidates = rng.sample_without_replacement(static_cast<std::uint32_t>(d), m);
        } else {
            candidates.resize(static_cast<std::size_t>(d));
            for (int f = 0; f < d; ++f) candidates[static_cast<std::size_t>(f)] = f;
        }

        Split best;
        std::vector<std::pair<double, double>> vals(samples.size()); // (x_f, y)
        for (const std::uint32_t f : candidates) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                vals[i] = {x(samples[i], static_cast<Eigen::Index>(f)), y[samples[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double sum_left = 0.0, sum_sq_left = 0.0;
            double sum_total = 0.0, sum_sq_total = 0.0;
            for (const auto& [v, t] : vals) {
                sum_total += t;
                sum_sq_total += t * t;
            }

            const auto n = static_cast<int>(vals.size());
            for (int i = 1; i < n; ++i) {
                sum_left += vals[i - 1].second;
                sum_sq_left += vals[i - 1].second * vals[i - 1].second;
                if (vals[i].first <= vals[i - 1].first) continue; // no boundary here
                if (i < params.min_samples_leaf || n - i < params.min_samples_leaf) continue;

                const double sum_right = sum_total - sum_left;
                const double sum_sq_right = sum_sq_total - sum_sq_left;
                const double sse_left = sum_sq_left - sum_left * sum_left / i;
                const double sse_right = sum_sq_right - sum_right * sum_right / (n - i);
                const double gain = parent_sse - sse_left - sse_right;
                if (gain < 0.0) continue;

                const double threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                const bool better =
                    !best.found || gain > best.gain ||
                    (gain == best.gain &&
                     (static_cast<int>(f) < best.feature ||
                      (static_cast<int>(f) == best.feature && threshold < best.threshold)));
                if (better) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.threshold = threshold;
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int build(std::vector<int> samples, int depth) {
        const auto node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        double mean = 0.0;
        for (int i : samples) mean += y[i];
        mean /= static_cast<double>(samples.size());
        tree.nodes[node_index].value = mean;

        const double sse = node_sse(samples, y, mean);
        const bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        if (!depth_ok || static_cast<int>(samples.size()) < params.min_samples_split ||
            sse <= 0.0)
            return node_index;

        const Split split = best_split(samples, sse);
        if (!split.found) return node_index;

        std::vector<int> left, right;
        for (int i : samples)
            (x(i, split.feature) <= split.threshold ? left : right).push_back(i);

        tree.raw_importance[static_cast<std::size_t>(split.feature)] += split.gain;
        tree.has_split = true;
        tree.nodes[node_index].feature = split.feature;
        tree.nodes[node_index].threshold = split.threshold;
        samples.clear();
        samples.shrink_to_fit();

        const int left_index = build(std::move(left), depth + 1);
        tree.nodes[node_index].left = left_index;
        const int right_index = build(std::move(right), depth + 1);
        tree.nodes[node_index].right = right_index;
        return node_index;
    }
};

} // namespace

RandomForestModel fit_random_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const ForestParams& params, std::uint64_t seed) {
    require_input(x.rows() >= 2, "random forest needs at least 2 rows");
    require_input(x.cols() >= 1, "random forest needs at least 1 feature");
    require_input(y.size() == x.rows(), "random forest row/target counts disagree");
    require_input(params.n_estimators >= 1, "random forest needs at least 1 tree");
    require_input(params.max_depth >= 0, "random forest max_depth must be >= 0 (0 = unbounded)");
    require_input(params.min_samples_split >= 2, "min_samples_split must be >= 2");
    require_input(params.min_samples_leaf >= 1, "min_samples_leaf must be >= 1");

    RandomForestModel model;
    model.params = params;
    model.seed = seed;
    model.n_features = static_cast<int>(x.cols());
    model.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const auto n = static_cast<std::uint64_t>(x.rows());
    for (int t = 0; t < params.n_estimators; ++t) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(t));
        std::vector<int> bootstrap(x.rows());
        for (auto& i : bootstrap) i = static_cast<int>(rng.uniform_int(n));

        RegressionTree& tree = model.trees[static_cast<std::size_t>(t)];
        tree.raw_importance.assign(static_cast<std::size_t>(x.cols()), 0.0);
        TreeBuilder builder{x, y, params, rng, tree};
        builder.build(std::move(bootstrap), 0);
    }
    return model;
}

double forest_predict_row(const RandomForestModel& model, const Eigen::VectorXd& row) {
    require_input(row.size() == model.n_features, "forest_predict dimensionality mismatch");
    double acc = 0.0;
    for (const RegressionTree& tree : model.trees) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
            node = row[n.feature] <= n.threshold ? n.left : n.right;
        }
        acc += tree.nodes[static_cast<std::size_t>(node)].value;
    }
    return acc / static_cast<double>(model.trees.size());
}

Eigen::VectorXd forest_predict(const RandomForestModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[i] = forest_predict_row(model, x.row(i).transpose());
    return out;
}

std::vector<double> rf_importance(const RandomForestModel& model) {
    const auto d = static_cast<std::size_t>(model.n_features);
    std::vector<double> acc(d, 0.0);
    std::size_t trees_with_splits = 0;
    for (const RegressionTree& tree : model.trees) {
        if (!tree.has_split) continue;
        double total = 0.0;
        for (double v : tree.raw_importance) total += v;
        if (total <= 0.0) continue;
        for (std::size_t f = 0; f < d; ++f) acc[f] += tree.raw_importance[f] / total;
        ++trees_with_splits;
    }
    if (trees_with_splits == 0) return std::vector<double>(d, 0.0);

    double sum = 0.0;
    for (double v : acc) sum += v;
    if (sum <= 0.0) return std::vector<double>(d, 0.0);
    for (double& v : acc) v /= sum;
    return acc;
}

} // namespace uqx
