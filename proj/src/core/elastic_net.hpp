#pragma once

#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace uqx {

struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coef;
    double alpha = 0.0;
    double rho = 0.0;
    double tol = 0.0;
    int sweeps = 0;
    bool converged = true;
    std::vector<double> objective_trace; // one entry per sweep when recorded
};

// Precomputed weighted, centred second moments. Building this once per
// (data subset, weights) makes every elastic-net fit on that subset O(D^2)
// per sweep regardless of n, which is what keeps the hyperparameter grid
// cheap. Weights are normalised to sum to n.
struct WeightedGram {
    Eigen::VectorXd x_mean; // weighted column means
    double y_mean = 0.0;
    Eigen::MatrixXd g;  // (1/n) Xc^T W Xc
    Eigen::VectorXd b;  // (1/n) Xc^T W yc
    double yy = 0.0;    // (1/n) yc^T W yc
};

WeightedGram make_weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w);
// Same, over a row subset.
WeightedGram make_weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, const std::vector<int>& rows);

// Minimises
//   (1/2n) sum_i w_i (y_i - b0 - x_i . beta)^2
//     + alpha * (rho * |beta|_1 + (1-rho)/2 * |beta|_2^2)
// by cyclic coordinate descent with soft thresholding; the unpenalised
// intercept is recovered from the weighted means. Stops when the largest
// coordinate change in a sweep drops below tol, capped at max_sweeps.
LinearModel fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double alpha, double rho, double tol,
                            int max_sweeps = 10000, bool record_trace = false);

LinearModel fit_elastic_net_gram(const WeightedGram& gram, double alpha, double rho,
                                 double tol, int max_sweeps = 10000,
                                 bool record_trace = false);

// Weighted least squares via the normal equations with a 1e-10 ridge for
// rank safety; equivalent to the elastic net at alpha = 0.
LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w);

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& x);

// The objective above, evaluated directly from the data.
double elastic_net_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, const LinearModel& model);

} // namespace uqx
