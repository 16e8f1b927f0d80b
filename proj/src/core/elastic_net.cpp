#include "elastic_net.hpp"

#include <cmath>

namespace uqx {

namespace {

void check_training_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& w) {
    require_input(x.rows() >= 2, "linear fit needs at least 2 rows");
    require_input(x.cols() >= 1, "linear fit needs at least 1 feature");
    require_input(y.size() == x.rows() && w.size() == x.rows(),
                  "linear fit row/target/weight counts disagree");
    for (Eigen::Index i = 0; i < w.size(); ++i)
        require_input(std::isfinite(w[i]) && w[i] > 0.0, "weights must be positive and finite");
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

WeightedGram gram_from_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, const std::vector<int>* rows) {
    const auto n_total = static_cast<Eigen::Index>(rows ? rows->size() : x.rows());
    require_input(n_total >= 2, "weighted gram needs at least 2 rows");
    const auto d = x.cols();
    const double n = static_cast<double>(n_total);

    auto row_of = [&](Eigen::Index i) { return rows ? static_cast<Eigen::Index>((*rows)[i]) : i; };

    double w_sum = 0.0;
    for (Eigen::Index i = 0; i < n_total; ++i) w_sum += w[row_of(i)];
    require_input(w_sum > 0.0, "weights sum to zero");
    const double scale = n / w_sum;

    WeightedGram gram;
    gram.x_mean = Eigen::VectorXd::Zero(d);
    gram.y_mean = 0.0;
    for (Eigen::Index i = 0; i < n_total; ++i) {
        const Eigen::Index r = row_of(i);
        const double wi = w[r] * scale;
        gram.x_mean += wi * x.row(r).transpose();
        gram.y_mean += wi * y[r];
    }
    gram.x_mean /= n;
    gram.y_mean /= n;

    gram.g = Eigen::MatrixXd::Zero(d, d);
    gram.b = Eigen::VectorXd::Zero(d);
    gram.yy = 0.0;
    for (Eigen::Index i = 0; i < n_total; ++i) {
        const Eigen::Index r = row_of(i);
        const double wi = w[r] * scale;
        const Eigen::VectorXd xc = x.row(r).transpose() - gram.x_mean;
        const double yc = y[r] - gram.y_mean;
        gram.g.selfadjointView<Eigen::Lower>().rankUpdate(xc, wi);
        gram.b += wi * yc * xc;
        gram.yy += wi * yc * yc;
    }
    gram.g = gram.g.selfadjointView<Eigen::Lower>();
    gram.g /= n;
    gram.b /= n;
    gram.yy /= n;
    return gram;
}

double objective_from_gram(const WeightedGram& gram, const Eigen::VectorXd& beta, double alpha,
                           double rho) {
    const double quad =
        0.5 * (gram.yy - 2.0 * beta.dot(gram.b) + beta.dot(gram.g * beta));
    const double l1 = beta.cwiseAbs().sum();
    const double l2 = beta.squaredNorm();
    return quad + alpha * (rho * l1 + 0.5 * (1.0 - rho) * l2);
}

} // namespace

WeightedGram make_weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w) {
    check_training_inputs(x, y, w);
    return gram_from_rows(x, y, w, nullptr);
}

WeightedGram make_weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, const std::vector<int>& rows) {
    check_training_inputs(x, y, w);
    return gram_from_rows(x, y, w, &rows);
}

LinearModel fit_elastic_net_gram(const WeightedGram& gram, double alpha, double rho, double tol,
                                 int max_sweeps, bool record_trace) {
    require_input(alpha >= 0.0, "elastic net alpha must be >= 0");
    require_input(rho >= 0.0 && rho <= 1.0, "elastic net rho must be in [0, 1]");
    require_input(tol > 0.0, "elastic net tol must be > 0");
    require_input(max_sweeps >= 1, "elastic net needs at least 1 sweep");

    const auto d = gram.g.rows();
    const double l1 = alpha * rho;
    const double l2 = alpha * (1.0 - rho);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(d); // q = G beta, kept incrementally

    LinearModel model;
    model.alpha = alpha;
    model.rho = rho;
    model.tol = tol;
    model.converged = false;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double gjj = gram.g(j, j);
            const double denom = gjj + l2;
            double next = 0.0;
            if (denom > 0.0) {
                const double z = gram.b[j] - q[j] + gjj * beta[j];
                next = soft_threshold(z, l1) / denom;
            }
            const double delta = next - beta[j];
            if (delta != 0.0) {
                q += delta * gram.g.col(j);
                beta[j] = next;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        model.sweeps = sweep + 1;

        // The incremental q drifts over long runs; refresh it periodically
        // so the stopping test and the final coefficients stay exact.
        if ((sweep + 1) % 50 == 0) q = gram.g * beta;
        if (record_trace) model.objective_trace.push_back(objective_from_gram(gram, beta, alpha, rho));
        if (max_delta < tol) {
            model.converged = true;
            break;
        }
    }

    model.coef = beta;
    model.intercept = gram.y_mean - beta.dot(gram.x_mean);
    return model;
}

LinearModel fit_elastic_net(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double alpha, double rho, double tol,
                            int max_sweeps, bool record_trace) {
    check_training_inputs(x, y, w);
    const WeightedGram gram = gram_from_rows(x, y, w, nullptr);
    return fit_elastic_net_gram(gram, alpha, rho, tol, max_sweeps, record_trace);
}

LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w) {
    check_training_inputs(x, y, w);
    const auto n = x.rows();
    const auto d = x.cols();

    double w_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) w_sum += w[i];
    const double scale = static_cast<double>(n) / w_sum;

    Eigen::MatrixXd z(n, d + 1);
    z.col(0).setOnes();
    z.rightCols(d) = x;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d + 1, d + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wi = w[i] * scale;
        a.selfadjointView<Eigen::Lower>().rankUpdate(z.row(i).transpose(), wi);
        rhs += wi * y[i] * z.row(i).transpose();
    }
    a = a.selfadjointView<Eigen::Lower>();
    a.diagonal().array() += 1e-10;

    const Eigen::LDLT<Eigen::MatrixXd> solver(a);
    require_numeric(solver.info() == Eigen::Success, "fit_ols: normal equations not solvable");
    const Eigen::VectorXd sol = solver.solve(rhs);

    LinearModel model;
    model.intercept = sol[0];
    model.coef = sol.tail(d);
    model.converged = true;
    return model;
}

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& x) {
    require_input(x.cols() == model.coef.size(), "predict_linear dimensionality mismatch");
    return (x * model.coef).array() + model.intercept;
}

double elastic_net_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, const LinearModel& model) {
    check_training_inputs(x, y, w);
    require_input(x.cols() == model.coef.size(), "objective dimensionality mismatch");

    double w_sum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) w_sum += w[i];
    const double scale = static_cast<double>(x.rows()) / w_sum;

    const Eigen::VectorXd resid = y - predict_linear(model, x);
    double quad = 0.0;
    for (Eigen::Index i = 0; i < resid.size(); ++i)
        quad += w[i] * scale * resid[i] * resid[i];
    quad /= 2.0 * static_cast<double>(x.rows());

    return quad + model.alpha * (model.rho * model.coef.cwiseAbs().sum() +
                                 0.5 * (1.0 - model.rho) * model.coef.squaredNorm());
}

} // namespace uqx
