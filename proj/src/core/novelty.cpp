#include "novelty.hpp"

#include <cmath>

namespace uqx {

PpcaModel ppca_fit(const Eigen::MatrixXd& x, int q) {
    const auto n = x.rows();
    const auto d = x.cols();
    require_input(n >= 2, "ppca_fit needs at least 2 rows");
    require_input(q >= 1 && q < d, "ppca_fit latent dim must satisfy 1 <= q < D");

    PpcaModel m;
    m.q = q;
    m.mu = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - m.mu.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    require_numeric(eig.info() == Eigen::Success, "ppca_fit eigendecomposition failed");

    // SelfAdjointEigenSolver returns ascending order; flip to descending.
    m.eigenvalues = eig.eigenvalues().reverse();
    Eigen::MatrixXd u(d, q);
    for (int j = 0; j < q; ++j) u.col(j) = eig.eigenvectors().col(d - 1 - j);

    double residual = 0.0;
    for (int j = q; j < d; ++j) residual += std::max(0.0, m.eigenvalues[j]);
    m.sigma2 = residual / static_cast<double>(d - q);

    m.w.resize(d, q);
    for (int j = 0; j < q; ++j) {
        // Deterministic orientation: the largest-|.| loading points up.
        int arg = 0;
        u.col(j).cwiseAbs().maxCoeff(&arg);
        const double sign = u(arg, j) < 0.0 ? -1.0 : 1.0;
        const double scale = std::sqrt(std::max(0.0, m.eigenvalues[j] - m.sigma2));
        m.w.col(j) = sign * scale * u.col(j);
    }
    return m;
}

int choose_latent_dim(const Eigen::VectorXd& eigenvalues_desc, double fraction) {
    require_input(eigenvalues_desc.size() >= 1, "latent dim choice needs at least 1 eigenvalue");
    require_input(fraction > 0.0 && fraction <= 1.0, "variance fraction must be in (0, 1]");
    const double total = eigenvalues_desc.cwiseMax(0.0).sum();
    const int d = static_cast<int>(eigenvalues_desc.size());
    if (d == 1 || total <= 0.0) return 1;

    double acc = 0.0;
    for (int q = 1; q < d; ++q) {
        acc += std::max(0.0, eigenvalues_desc[q - 1]);
        if (acc / total >= fraction) return q;
    }
    return d - 1;
}

Eigen::VectorXd ppca_project(const PpcaModel& model, const Eigen::VectorXd& x) {
    require_input(x.size() == model.mu.size(), "ppca_project dimensionality mismatch");
    const Eigen::MatrixXd m =
        model.w.transpose() * model.w +
        model.sigma2 * Eigen::MatrixXd::Identity(model.q, model.q);
    const Eigen::LDLT<Eigen::MatrixXd> solver(m);
    require_numeric(solver.info() == Eigen::Success, "ppca_project: singular posterior matrix");
    return solver.solve(model.w.transpose() * (x - model.mu));
}

Eigen::MatrixXd ppca_project_rows(const PpcaModel& model, const Eigen::MatrixXd& x) {
    require_input(x.cols() == model.mu.size(), "ppca_project dimensionality mismatch");
    const Eigen::MatrixXd m =
        model.w.transpose() * model.w +
        model.sigma2 * Eigen::MatrixXd::Identity(model.q, model.q);
    const Eigen::LDLT<Eigen::MatrixXd> solver(m);
    require_numeric(solver.info() == Eigen::Success, "ppca_project: singular posterior matrix");
    const Eigen::MatrixXd centered = x.rowwise() - model.mu.transpose();
    return solver.solve(model.w.transpose() * centered.transpose()).transpose();
}

LatentBank build_latent_bank(const Eigen::MatrixXd& latents) {
    require_input(latents.rows() >= 2, "latent bank needs at least 2 rows");
    LatentBank bank;
    bank.latents = latents;
    bank.mean = latents.colwise().mean();
    const Eigen::MatrixXd centered = latents.rowwise() - bank.mean.transpose();
    bank.cov = centered.transpose() * centered / static_cast<double>(latents.rows());
    bank.cov += 1e-8 * Eigen::MatrixXd::Identity(latents.cols(), latents.cols());
    bank.solver.compute(bank.cov);
    require_numeric(bank.solver.info() == Eigen::Success,
                    "latent bank covariance is not positive definite");
    return bank;
}

double mahalanobis(const LatentBank& bank, const Eigen::VectorXd& z) {
    require_input(z.size() == bank.mean.size(), "mahalanobis dimensionality mismatch");
    const Eigen::VectorXd diff = z - bank.mean;
    const double sq = diff.dot(bank.solver.solve(diff));
    require_numeric(std::isfinite(sq) && sq >= -1e-12, "mahalanobis produced an invalid value");
    return std::sqrt(std::max(0.0, sq));
}

double smallest_distance(const LatentBank& bank, const Eigen::VectorXd& z) {
    require_input(z.size() == bank.latents.cols(), "smallest_distance dimensionality mismatch");
    double best_sq = -1.0;
    for (Eigen::Index r = 0; r < bank.latents.rows(); ++r) {
        const double sq = (bank.latents.row(r).transpose() - z).squaredNorm();
        if (sq == 0.0) continue;
        if (best_sq < 0.0 || sq < best_sq) best_sq = sq;
    }
    return best_sq < 0.0 ? 0.0 : std::sqrt(best_sq);
}

namespace {

bool novelty_input_column(const std::string& name) {
    const bool lesion_scale =
        name.rfind("lesion__", 0) == 0 || name.rfind("perilesional__", 0) == 0;
    if (!lesion_scale) return false;
    return name.rfind("lesion__quality__", 0) != 0 && name.rfind("lesion__novelty__", 0) != 0;
}

} // namespace

NoveltyModel fit_novelty(const FeatureTable& train, double variance_explained, int q) {
    train.check_consistent();
    require_input(train.n_rows() >= 2, "fit_novelty needs at least 2 rows");

    // Candidate columns, dropping the fully missing and (after filling) the
    // constant ones; both are uninformative for a covariance model.
    std::vector<std::string> columns;
    std::vector<double> fill_mean;
    for (std::size_t c = 0; c < train.n_cols(); ++c) {
        if (!novelty_input_column(train.columns[c])) continue;
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.cells[r][c]) {
                sum += *train.cells[r][c];
                ++cnt;
            }
        }
        if (cnt == 0) continue;
        columns.push_back(train.columns[c]);
        fill_mean.push_back(sum / static_cast<double>(cnt));
    }
    require_input(!columns.empty(), "fit_novelty: no usable lesion-scale columns");

    const std::size_t n = train.n_rows();
    Eigen::MatrixXd filled(n, columns.size());
    for (std::size_t ci = 0; ci < columns.size(); ++ci) {
        const std::size_t c = train.column_index(columns[ci]);
        for (std::size_t r = 0; r < n; ++r)
            filled(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ci)) =
                train.cells[r][c] ? *train.cells[r][c] : fill_mean[ci];
    }

    NoveltyModel model;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < filled.cols(); ++c) {
        const double mean = filled.col(c).mean();
        const double var = (filled.col(c).array() - mean).square().mean();
        if (var > 0.0) {
            keep.push_back(c);
            model.columns.push_back(columns[static_cast<std::size_t>(c)]);
            model.fill_mean.push_back(fill_mean[static_cast<std::size_t>(c)]);
            model.scale_mean.push_back(mean);
            model.scale_std.push_back(std::sqrt(var));
        }
    }
    require_input(keep.size() >= 2, "fit_novelty needs at least 2 non-constant columns");

    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t ci = 0; ci < keep.size(); ++ci)
        z.col(static_cast<Eigen::Index>(ci)) =
            (filled.col(keep[ci]).array() - model.scale_mean[ci]) / model.scale_std[ci];

    int latent_q = q;
    if (latent_q == 0) {
        // Probe eigenvalues with a throwaway 1-component fit.
        const PpcaModel probe = ppca_fit(z, 1);
        latent_q = choose_latent_dim(probe.eigenvalues, variance_explained);
    }
    model.ppca = ppca_fit(z, latent_q);
    model.bank = build_latent_bank(ppca_project_rows(model.ppca, z));
    return model;
}

FeatureTable append_novelty(const NoveltyModel& model, const FeatureTable& table) {
    table.check_consistent();

    std::vector<std::size_t> idx;
    idx.reserve(model.columns.size());
    for (const auto& name : model.columns) idx.push_back(table.column_index(name));

    FeatureTable out = table;
    out.columns.push_back("lesion__novelty__mahalanobis");
    out.columns.push_back("lesion__novelty__smallest_distance");

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(model.columns.size()));
        for (std::size_t ci = 0; ci < model.columns.size(); ++ci) {
            const auto& cell = table.cells[r][idx[ci]];
            const double raw = cell ? *cell : model.fill_mean[ci];
            x[static_cast<Eigen::Index>(ci)] =
                (raw - model.scale_mean[ci]) / model.scale_std[ci];
        }
        const Eigen::VectorXd z = ppca_project(model.ppca, x);
        out.cells[r].push_back(mahalanobis(model.bank, z));
        out.cells[r].push_back(smallest_distance(model.bank, z));
    }
    return out;
}

} // namespace uqx
