#include "scores.hpp"

#include <cmath>

namespace uqx {

WeightMode parse_weight_mode(const std::string& name) {
    if (name == "uniform") return WeightMode::Uniform;
    if (name == "uncertainty") return WeightMode::Uncertainty;
    throw InputError("unknown weight mode '" + name + "' (expected uniform or uncertainty)");
}

std::string weight_mode_name(WeightMode mode) {
    return mode == WeightMode::Uniform ? "uniform" : "uncertainty";
}

std::vector<double> sample_weights(std::span<const double> y, WeightMode mode) {
    require_input(!y.empty(), "sample_weights on an empty target");
    const auto n = static_cast<double>(y.size());
    std::vector<double> w(y.size(), 1.0);
    if (mode == WeightMode::Uniform) return w;

    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        require_input(std::isfinite(y[i]) && y[i] >= 0.0,
                      "uncertainty weights need non-negative finite targets");
        w[i] = 0.1 + y[i];
        sum += w[i];
    }
    for (double& v : w) v *= n / sum;
    return w;
}

std::vector<double> renormalize_weights(std::span<const double> w) {
    require_input(!w.empty(), "renormalize_weights on an empty span");
    double sum = 0.0;
    for (double v : w) {
        require_input(std::isfinite(v) && v > 0.0, "weights must be positive and finite");
        sum += v;
    }
    std::vector<double> out(w.begin(), w.end());
    const double scale = static_cast<double>(w.size()) / sum;
    for (double& v : out) v *= scale;
    return out;
}

double weighted_r2(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> w) {
    require_input(y.size() == y_hat.size() && y.size() == w.size(),
                  "weighted_r2 length mismatch");
    require_input(!y.empty(), "weighted_r2 on empty vectors");

    const auto n = static_cast<double>(y.size());
    double y_bar = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) y_bar += w[i] * y[i];
    y_bar /= n;

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += w[i] * (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += w[i] * (y[i] - y_bar) * (y[i] - y_bar);
    }
    require_numeric(ss_tot > 0.0, "weighted_r2 undefined: zero weighted target variance");
    return 1.0 - ss_res / ss_tot;
}

double weighted_mae(std::span<const double> y, std::span<const double> y_hat,
                    std::span<const double> w) {
    require_input(y.size() == y_hat.size() && y.size() == w.size(),
                  "weighted_mae length mismatch");
    require_input(!y.empty(), "weighted_mae on empty vectors");

    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += w[i] * std::abs(y[i] - y_hat[i]);
    return acc / static_cast<double>(y.size());
}

} // namespace uqx
