#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "core/novelty.hpp"
#include "core/rng.hpp"

using namespace uqx;

namespace {

// Samples x = W z + mu + eps with isotropic noise so the PPCA estimates have
// known targets.
Eigen::MatrixXd planted_data(Rng& rng, int n, int d, int q, double noise_sd,
                             Eigen::MatrixXd* w_out = nullptr) {
    Eigen::MatrixXd w(d, q);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < q; ++j) w(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
    Eigen::MatrixXd basis =
        qr.householderQ() * Eigen::MatrixXd::Identity(d, q) * 3.0;
    if (w_out) *w_out = basis;
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd z(q);
        for (int j = 0; j < q; ++j) z[j] = rng.normal();
        Eigen::VectorXd row = basis * z;
        for (int k = 0; k < d; ++k) row[k] += 0.5 + noise_sd * rng.normal();
        x.row(i) = row;
    }
    return x;
}

FeatureTable lesion_table(const std::vector<std::string>& columns,
                          const std::vector<std::vector<std::optional<double>>>& cells) {
    FeatureTable t;
    t.columns = columns;
    t.cells = cells;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        t.rows.push_back({"d", "s", static_cast<std::int64_t>(i + 1)});
        t.target.push_back(0.25);
    }
    t.check_consistent();
    return t;
}

} // namespace

TEST_SUITE("novelty") {

TEST_CASE("ppca recovers a planted subspace and its noise floor") {
    Rng rng(61);
    const int n = 10000, d = 8, q = 3;
    const double noise_sd = 0.3;
    Eigen::MatrixXd basis;
    const Eigen::MatrixXd x = planted_data(rng, n, d, q, noise_sd, &basis);
    const PpcaModel m = ppca_fit(x, q);

    CHECK(m.q == q);
    CHECK(m.sigma2 == doctest::Approx(noise_sd * noise_sd).epsilon(0.05));
    for (int k = 0; k < d; ++k) CHECK(m.mu[k] == doctest::Approx(0.5).epsilon(0.2));

    // Fitted loadings span the planted subspace: projecting them onto it
    // loses almost nothing.
    Eigen::MatrixXd proj = basis * (basis.transpose() * basis).inverse() * basis.transpose();
    const double residual = (m.w - proj * m.w).norm() / m.w.norm();
    CHECK(residual < 0.05);

    // Eigenvalues are sorted descending and the tail sits near sigma2.
    for (int k = 1; k < d; ++k) CHECK(m.eigenvalues[k] <= m.eigenvalues[k - 1] + 1e-12);
    for (int k = q; k < d; ++k)
        CHECK(m.eigenvalues[k] == doctest::Approx(noise_sd * noise_sd).epsilon(0.15));
}

TEST_CASE("loading sign convention is deterministic") {
    Rng rng(67);
    const Eigen::MatrixXd x = planted_data(rng, 500, 6, 2, 0.2);
    const PpcaModel m = ppca_fit(x, 2);
    for (int j = 0; j < m.w.cols(); ++j) {
        int arg = 0;
        for (int i = 1; i < m.w.rows(); ++i)
            if (std::abs(m.w(i, j)) > std::abs(m.w(arg, j))) arg = i;
        CHECK(m.w(arg, j) > 0.0);
    }
}

TEST_CASE("latent dimension selection by explained variance") {
    Eigen::VectorXd ev(4);
    ev << 6.0, 3.0, 0.9, 0.1; // cumulative fractions 0.6, 0.9, 0.99, 1.0
    CHECK(choose_latent_dim(ev, 0.5) == 1);
    CHECK(choose_latent_dim(ev, 0.9) == 2);
    CHECK(choose_latent_dim(ev, 0.95) == 3);
    CHECK(choose_latent_dim(ev, 0.999) == 3); // clamped to D-1
    Eigen::VectorXd one(1);
    one << 2.0;
    CHECK(choose_latent_dim(one, 0.9) == 1);
}

TEST_CASE("projection matches the closed-form posterior mean") {
    Rng rng(71);
    const Eigen::MatrixXd x = planted_data(rng, 400, 5, 2, 0.25);
    const PpcaModel m = ppca_fit(x, 2);
    const Eigen::MatrixXd gram =
        m.w.transpose() * m.w + m.sigma2 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd inv = gram.inverse();
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd row = x.row(i);
        const Eigen::VectorXd want = inv * m.w.transpose() * (row - m.mu);
        const Eigen::VectorXd got = ppca_project(m, row);
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
    }
    const Eigen::MatrixXd all = ppca_project_rows(m, x);
    CHECK(all.rows() == 400);
    CHECK(all.cols() == 2);
    CHECK((all.row(3).transpose() - ppca_project(m, x.row(3))).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("mahalanobis distance matches the dense inverse") {
    Rng rng(73);
    Eigen::MatrixXd latents(200, 3);
    for (int i = 0; i < latents.rows(); ++i)
        for (int j = 0; j < 3; ++j) latents(i, j) = rng.normal() * (j + 1);
    const LatentBank bank = build_latent_bank(latents);

    Eigen::VectorXd mean = latents.colwise().mean();
    Eigen::MatrixXd centered = latents.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / double(latents.rows()) +
                          1e-8 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd inv = cov.inverse();

    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd z(3);
        for (int j = 0; j < 3; ++j) z[j] = rng.normal() * 2.0;
        const Eigen::VectorXd c = z - mean;
        const double want = std::sqrt(c.dot(inv * c));
        CHECK(mahalanobis(bank, z) == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK(mahalanobis(bank, mean) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("smallest distance is exact and skips self-matches") {
    Eigen::MatrixXd latents(4, 2);
    latents << 0.0, 0.0,
               1.0, 0.0,
               0.0, 2.0,
               5.0, 5.0;
    const LatentBank bank = build_latent_bank(latents);

    Eigen::VectorXd probe(2);
    probe << 0.6, 0.0;
    CHECK(smallest_distance(bank, probe) == doctest::Approx(0.4).epsilon(1e-12));

    // A bank row scores its nearest distinct neighbour, not itself.
    Eigen::VectorXd self = latents.row(0);
    CHECK(smallest_distance(bank, self) == doctest::Approx(1.0).epsilon(1e-12));

    // All rows identical: every distance is an exact match, score 0.
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(3, 2);
    const LatentBank flat_bank = build_latent_bank(flat);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
    CHECK(smallest_distance(flat_bank, origin) == 0.0);
}

TEST_CASE("smallest distance matches brute force on random banks") {
    Rng rng(79);
    Eigen::MatrixXd latents(60, 4);
    for (int i = 0; i < 60; ++i)
        for (int j = 0; j < 4; ++j) latents(i, j) = rng.uniform(-3.0, 3.0);
    const LatentBank bank = build_latent_bank(latents);
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::VectorXd z(4);
        for (int j = 0; j < 4; ++j) z[j] = rng.uniform(-3.0, 3.0);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 60; ++i) {
            const double d = (latents.row(i).transpose() - z).norm();
            if (d > 0.0) best = std::min(best, d);
        }
        CHECK(smallest_distance(bank, z) == best);
    }
}

TEST_CASE("table wrapper selects lesion-scale inputs only") {
    const std::vector<std::string> cols = {
        "lesion__first_order__mean",
        "lesion__shape__volume_mm3",
        "perilesional__first_order__mean",
        "lesion__quality__iou_adj",
        "lesion__novelty__mahalanobis",
        "patient__quality__dsc",
        "patient__demographics__age",
        "location__frac__region_1",
    };
    Rng rng(83);
    std::vector<std::vector<std::optional<double>>> cells;
    for (int i = 0; i < 40; ++i) {
        std::vector<std::optional<double>> row;
        for (std::size_t j = 0; j < cols.size(); ++j) row.push_back(rng.normal());
        cells.push_back(std::move(row));
    }
    cells[5][0] = std::nullopt; // imputable via the fill mean
    const FeatureTable train = lesion_table(cols, cells);
    const NoveltyModel model = fit_novelty(train, 0.9, 2);

    const std::vector<std::string> want = {
        "lesion__first_order__mean",
        "lesion__shape__volume_mm3",
        "perilesional__first_order__mean",
    };
    CHECK(model.columns == want);
    CHECK(model.ppca.q == 2);

    const FeatureTable scored = append_novelty(model, train);
    REQUIRE(scored.n_cols() == cols.size() + 2);
    CHECK(scored.columns[cols.size()] == "lesion__novelty__mahalanobis");
    CHECK(scored.columns[cols.size() + 1] == "lesion__novelty__smallest_distance");
    for (std::size_t i = 0; i < scored.n_rows(); ++i) {
        REQUIRE(scored.cells[i][cols.size()].has_value());
        REQUIRE(scored.cells[i][cols.size() + 1].has_value());
        CHECK(*scored.cells[i][cols.size()] >= 0.0);
        CHECK(*scored.cells[i][cols.size() + 1] >= 0.0);
    }

    // Rows far outside the training cloud score higher on both columns.
    std::vector<std::vector<std::optional<double>>> far_cells = cells;
    for (auto& row : far_cells)
        for (std::size_t j = 0; j < 3; ++j) row[j] = *row[j] + 40.0;
    const FeatureTable far = append_novelty(model, lesion_table(cols, far_cells));
    double train_mean = 0.0, far_mean = 0.0;
    for (std::size_t i = 0; i < scored.n_rows(); ++i) {
        train_mean += *scored.cells[i][cols.size()];
        far_mean += *far.cells[i][cols.size()];
    }
    CHECK(far_mean > train_mean);
}

TEST_CASE("degenerate inputs are rejected") {
    Eigen::MatrixXd tiny(1, 3);
    tiny << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(ppca_fit(tiny, 1), InputError);
    Eigen::MatrixXd x(10, 3);
    x.setRandom();
    CHECK_THROWS_AS(ppca_fit(x, 0), InputError);
    CHECK_THROWS_AS(ppca_fit(x, 3), InputError); // q must leave a noise tail
}

} // TEST_SUITE
