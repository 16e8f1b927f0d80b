#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <vector>

#include "core/rng.hpp"
#include "core/table.hpp"
#include "test_support.hpp"

using namespace uqx;
using uqx::testing::TempDir;

namespace {

FeatureTable small_table(std::vector<std::string> columns,
                         std::vector<std::vector<std::optional<double>>> cells,
                         std::vector<double> target) {
    FeatureTable t;
    t.columns = std::move(columns);
    t.cells = std::move(cells);
    t.target = std::move(target);
    for (std::size_t i = 0; i < t.cells.size(); ++i)
        t.rows.push_back({"d", "s" + std::to_string(i), static_cast<std::int64_t>(i + 1)});
    t.check_consistent();
    return t;
}

FeatureTable random_table(Rng& rng, std::size_t n_rows, std::size_t n_cols,
                          double missing_rate) {
    std::vector<std::vector<std::optional<double>>> cells(n_rows);
    for (auto& row : cells) {
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (rng.uniform() < missing_rate)
                row.push_back(std::nullopt);
            else
                row.push_back(rng.uniform(-3.0, 3.0));
        }
    }
    // Guarantee at least one observed value per column.
    for (std::size_t j = 0; j < n_cols; ++j) cells[0][j] = rng.uniform(-3.0, 3.0);
    std::vector<std::string> cols;
    for (std::size_t j = 0; j < n_cols; ++j) cols.push_back("f" + std::to_string(j));
    std::vector<double> target;
    for (std::size_t i = 0; i < n_rows; ++i) target.push_back(rng.uniform());
    return small_table(std::move(cols), std::move(cells), std::move(target));
}

// Literal transcription of the imputation contract.
FeatureTable knn_impute_oracle(const FeatureTable& t, int k) {
    const std::size_t n = t.n_rows(), d = t.n_cols();
    FeatureTable out = t;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (t.cells[i][j].has_value()) continue;

            std::vector<std::pair<double, std::size_t>> candidates;
            for (std::size_t r = 0; r < n; ++r) {
                if (r == i || !t.cells[r][j].has_value()) continue;
                double sum = 0.0;
                std::size_t shared = 0;
                for (std::size_t c = 0; c < d; ++c) {
                    if (t.cells[i][c].has_value() && t.cells[r][c].has_value()) {
                        const double diff = *t.cells[i][c] - *t.cells[r][c];
                        sum += diff * diff;
                        ++shared;
                    }
                }
                if (shared == 0) continue;
                const double dist =
                    std::sqrt(static_cast<double>(d) / static_cast<double>(shared) * sum);
                candidates.emplace_back(dist, r);
            }
            std::sort(candidates.begin(), candidates.end());

            double fill = 0.0;
            if (!candidates.empty()) {
                const std::size_t take = std::min<std::size_t>(candidates.size(), k);
                for (std::size_t q = 0; q < take; ++q)
                    fill += *t.cells[candidates[q].second][j];
                fill /= static_cast<double>(take);
            } else {
                double mean = 0.0;
                std::size_t count = 0;
                for (std::size_t r = 0; r < n; ++r)
                    if (t.cells[r][j].has_value()) {
                        mean += *t.cells[r][j];
                        ++count;
                    }
                REQUIRE(count > 0);
                fill = mean / static_cast<double>(count);
            }
            out.cells[i][j] = fill;
        }
    }
    return out;
}

} // namespace

TEST_SUITE("table") {

TEST_CASE("csv roundtrip preserves values and missing cells") {
    const TempDir dir("table_csv");
    FeatureTable t = small_table(
        {"a", "b"},
        {{1.5, std::nullopt}, {-0.25, 1e-7}, {std::nullopt, 3.0}},
        {0.1, 0.2, 0.30000000000000004});
    const std::string path = dir.path("t.csv");
    write_feature_csv(t, path);
    const FeatureTable back = read_feature_csv(path);

    REQUIRE(back.n_rows() == 3);
    REQUIRE(back.columns == t.columns);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.rows[i].dataset_id == t.rows[i].dataset_id);
        CHECK(back.rows[i].subject_id == t.rows[i].subject_id);
        CHECK(back.rows[i].lesion_id == t.rows[i].lesion_id);
        CHECK(back.target[i] == t.target[i]);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(back.cells[i][j].has_value() == t.cells[i][j].has_value());
            if (t.cells[i][j].has_value()) CHECK(*back.cells[i][j] == *t.cells[i][j]);
        }
    }
    // Re-serialisation is byte-stable.
    CHECK(feature_csv_text(back) == feature_csv_text(t));
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(1e-7) == "1e-07");
    CHECK(format_double(0.1) == "0.1");
    const double v = 0.30000000000000004;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv schema violations are rejected") {
    const TempDir dir("table_bad");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir.path(name));
        f << text;
        return dir.path(name);
    };
    CHECK_THROWS_AS(read_feature_csv(dir.path("missing.csv")), InputError);
    CHECK_THROWS_AS(read_feature_csv(write("h.csv", "wrong,header\n")), InputError);
    CHECK_THROWS_AS(
        read_feature_csv(write("c.csv", "dataset_id,subject_id,lesion_id,a,lsu\nd,s,1,2\n")),
        InputError);
    CHECK_THROWS_AS(
        read_feature_csv(write("t.csv", "dataset_id,subject_id,lesion_id,a,lsu\nd,s,1,2,\n")),
        InputError);
    CHECK_THROWS_AS(
        read_feature_csv(write("v.csv", "dataset_id,subject_id,lesion_id,a,lsu\nd,s,1,x,0.5\n")),
        InputError);
}

TEST_CASE("forced neighbour and constant neighbourhood") {
    // Two rows: the missing cell takes the other row's value.
    FeatureTable two = small_table(
        {"a", "b"}, {{1.0, 5.0}, {2.0, std::nullopt}}, {0.1, 0.2});
    const FeatureTable imputed = knn_impute(two, 5);
    CHECK(imputed.cells[1][1].has_value());
    CHECK(*imputed.cells[1][1] == 5.0);
    CHECK(*imputed.cells[0][0] == 1.0);

    // Five nearest neighbours all hold value v.
    std::vector<std::vector<std::optional<double>>> cells;
    for (int i = 0; i < 6; ++i)
        cells.push_back({static_cast<double>(i) * 0.1, 7.5});
    cells.push_back({0.25, std::nullopt});
    FeatureTable six = small_table({"x", "v"}, std::move(cells),
                                   {0, 0, 0, 0, 0, 0, 0});
    const FeatureTable filled = knn_impute(six, 5);
    CHECK(*filled.cells[6][1] == 7.5);
}

TEST_CASE("imputation matches brute-force oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const FeatureTable t = random_table(rng, 20, 10, 0.10);
        const FeatureTable got = knn_impute(t, 5);
        const FeatureTable want = knn_impute_oracle(t, 5);
        for (std::size_t i = 0; i < t.n_rows(); ++i)
            for (std::size_t j = 0; j < t.n_cols(); ++j) {
                REQUIRE(got.cells[i][j].has_value());
                CHECK(*got.cells[i][j] == *want.cells[i][j]);
                if (t.cells[i][j].has_value()) CHECK(*got.cells[i][j] == *t.cells[i][j]);
            }
    }
}

TEST_CASE("fully missing column cannot be imputed") {
    FeatureTable t = small_table(
        {"a", "dead"}, {{1.0, std::nullopt}, {2.0, std::nullopt}}, {0.1, 0.2});
    CHECK_THROWS_AS(knn_impute(t, 5), NumericError);
}

TEST_CASE("column-mean fallback when no neighbour shares a column") {
    // Row 2 observes only column b; rows 0-1 observe only column a, so no
    // candidate for (2, a) shares an observed column.
    FeatureTable t = small_table(
        {"a", "b"},
        {{1.0, std::nullopt}, {3.0, std::nullopt}, {std::nullopt, 9.0}},
        {0.1, 0.2, 0.3});
    const FeatureTable got = knn_impute(t, 5);
    CHECK(*got.cells[2][0] == doctest::Approx(2.0));
    CHECK(*got.cells[0][1] == 9.0);
    CHECK(*got.cells[1][1] == 9.0);
}

TEST_CASE("variance filter drops flat columns") {
    // 100-row column: 99 zeros and one 1e-4 has population variance 9.9e-11.
    std::vector<std::vector<std::optional<double>>> cells;
    for (int i = 0; i < 100; ++i)
        cells.push_back({i == 0 ? 1e-4 : 0.0, static_cast<double>(i), 5.0});
    std::vector<double> target(100, 0.5);
    FeatureTable t = small_table({"tiny", "live", "flat"}, std::move(cells), std::move(target));

    double mean = 1e-4 / 100.0, var = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double v = (i == 0 ? 1e-4 : 0.0) - mean;
        var += v * v;
    }
    var /= 100.0;
    CHECK(var == doctest::Approx(9.9e-11).epsilon(1e-6));

    const FeatureTable kept = variance_filter(t, 1e-6);
    CHECK(kept.columns == std::vector<std::string>{"live"});
    CHECK(kept.n_rows() == 100);

    CHECK_THROWS_AS(variance_filter(kept, 1e12), NumericError);

    FeatureTable holes = small_table({"a"}, {{std::nullopt}, {1.0}}, {0.1, 0.2});
    CHECK_THROWS_AS(variance_filter(holes, 1e-6), InputError);
}

TEST_CASE("standardize z-scores with population statistics") {
    FeatureTable t = small_table({"a"}, {{1.0}, {2.0}, {3.0}}, {0.1, 0.2, 0.3});
    const auto [z, params] = standardize(t);
    const double want = 1.0 / std::sqrt(2.0 / 3.0);
    CHECK(*z.cells[0][0] == doctest::Approx(-want).epsilon(1e-4));
    CHECK(*z.cells[0][0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(*z.cells[1][0] == doctest::Approx(0.0));
    CHECK(*z.cells[2][0] == doctest::Approx(1.2247).epsilon(1e-4));
    CHECK(params.mean[0] == 2.0);
    CHECK(params.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));

    // Column mean 0, population std 1 after the transform.
    double mean = 0.0;
    for (int i = 0; i < 3; ++i) mean += *z.cells[i][0];
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));

    // Idempotence: standardizing standardized data changes nothing.
    const auto [z2, p2] = standardize(z);
    for (int i = 0; i < 3; ++i)
        CHECK(*z2.cells[i][0] == doctest::Approx(*z.cells[i][0]).epsilon(1e-12));

    // Round trip via stored params.
    for (int i = 0; i < 3; ++i) {
        const double back = *z.cells[i][0] * params.stddev[0] + params.mean[0];
        CHECK(back == doctest::Approx(*t.cells[i][0]).epsilon(1e-10));
    }

    FeatureTable flat = small_table({"a"}, {{2.0}, {2.0}}, {0.1, 0.2});
    CHECK_THROWS_AS(standardize(flat), NumericError);
}

TEST_CASE("select_columns projects and reorders") {
    FeatureTable t = small_table({"a", "b", "c"},
                                 {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}}, {0.1, 0.2});
    const std::vector<std::string> pick = {"c", "a"};
    const FeatureTable s = select_columns(t, pick);
    CHECK(s.columns == pick);
    CHECK(*s.cells[0][0] == 3.0);
    CHECK(*s.cells[0][1] == 1.0);
    CHECK(*s.cells[1][0] == 6.0);
    const std::vector<std::string> missing = {"nope"};
    CHECK_THROWS_AS(select_columns(t, missing), InputError);
}

} // TEST_SUITE
