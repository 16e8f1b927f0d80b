#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "table.hpp"

namespace uqx {

// Probabilistic PCA fitted in closed form: mu is the column mean, sigma2 the
// mean of the discarded eigenvalues of the population covariance, and
// W = U_q (L_q - sigma2 I)^{1/2} with a deterministic sign convention (the
// largest-magnitude loading of each column is positive).
struct PpcaModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd w;        // D x q
    double sigma2 = 0.0;
    int q = 0;
    Eigen::VectorXd eigenvalues; // all D, descending
};

PpcaModel ppca_fit(const Eigen::MatrixXd& x, int q);

// Smallest q whose leading eigenvalues explain at least `fraction` of the
// total variance, clamped to [1, D-1].
int choose_latent_dim(const Eigen::VectorXd& eigenvalues_desc, double fraction);

// Posterior-mean latent coordinates: z = (W^T W + sigma2 I)^{-1} W^T (x - mu).
Eigen::VectorXd ppca_project(const PpcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd ppca_project_rows(const PpcaModel& model, const Eigen::MatrixXd& x);

// Latent coordinates of the training cohort with their Gaussian summary;
// the covariance carries a 1e-8 diagonal regulariser.
struct LatentBank {
    Eigen::MatrixXd latents; // n x q
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::LDLT<Eigen::MatrixXd> solver;
};

LatentBank build_latent_bank(const Eigen::MatrixXd& latents);

double mahalanobis(const LatentBank& bank, const Eigen::VectorXd& z);

// Euclidean distance to the nearest bank row, ignoring exact matches so a
// training row scores its nearest distinct neighbour; 0 if every row is an
// exact match.
double smallest_distance(const LatentBank& bank, const Eigen::VectorXd& z);

// Table-level wrapper: fits PPCA on the engineered lesion-scale columns of a
// training table (lesion__/perilesional__ prefixes, minus lesion__quality__
// and lesion__novelty__), mean-filling missing cells and z-scoring with
// training statistics before the fit.
struct NoveltyModel {
    std::vector<std::string> columns;
    std::vector<double> fill_mean;
    std::vector<double> scale_mean;
    std::vector<double> scale_std;
    PpcaModel ppca;
    LatentBank bank;
};

NoveltyModel fit_novelty(const FeatureTable& train, double variance_explained = 0.9,
                         int q = 0);

// Appends lesion__novelty__mahalanobis and lesion__novelty__smallest_distance
// columns scored against the training bank.
FeatureTable append_novelty(const NoveltyModel& model, const FeatureTable& table);

} // namespace uqx
