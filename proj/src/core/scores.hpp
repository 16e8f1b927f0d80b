#pragma once

#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace uqx {

enum class WeightMode {
    Uniform,
    Uncertainty,
};

WeightMode parse_weight_mode(const std::string& name);
std::string weight_mode_name(WeightMode mode);

// Per-row scoring weights, normalised to sum to n. Uniform gives all-ones;
// Uncertainty weights rows proportionally to (0.1 + y) so high-uncertainty
// lesions dominate the fit quality.
std::vector<double> sample_weights(std::span<const double> y, WeightMode mode);

// Rescales a weight subset (e.g. a CV fold) back to sum to its length.
std::vector<double> renormalize_weights(std::span<const double> w);

// Weighted R^2 with the weighted mean as baseline; undefined (numeric error)
// when the weighted target variance is zero.
double weighted_r2(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> w);

// Weighted mean absolute error, (1/n) sum w_i |y_i - y_hat_i|.
double weighted_mae(std::span<const double> y, std::span<const double> y_hat,
                    std::span<const double> w);

} // namespace uqx
