#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/shape_features.hpp"
#include "test_support.hpp"

using namespace uqx;
using uqx::testing::make_mask;

namespace {

double get(const FeatureVector& fv, const std::string& name) {
    const auto v = fv.find(name);
    REQUIRE(v.has_value());
    return *v;
}

BinaryMask cube(int n, int side, Spacing3 sp = {1, 1, 1}) {
    return make_mask(
        {n, n, n},
        [side](int x, int y, int z) { return x < side && y < side && z < side; }, sp);
}

BinaryMask ellipsoid_mask(Dims3 dims, double a, double b, double c) {
    const double cx = (dims.nx - 1) / 2.0, cy = (dims.ny - 1) / 2.0, cz = (dims.nz - 1) / 2.0;
    return make_mask(dims, [=](int x, int y, int z) {
        const double u = (x - cx) / a, v = (y - cy) / b, w = (z - cz) / c;
        return u * u + v * v + w * w <= 1.0;
    });
}

} // namespace

TEST_SUITE("shape") {

TEST_CASE("cube volume and surface are exact") {
    const FeatureVector fv = shape_features(cube(8, 4), "s");
    CHECK(get(fv, "s__volume") == 64.0);
    CHECK(get(fv, "s__surface_area") == 6.0 * 16.0);
    CHECK(get(fv, "s__surface_to_volume_ratio") == doctest::Approx(96.0 / 64.0));
    CHECK(get(fv, "s__compactness") ==
          doctest::Approx(36.0 * std::numbers::pi * 64.0 * 64.0 / (96.0 * 96.0 * 96.0)));
    CHECK(get(fv, "s__sphericity") ==
          doctest::Approx(std::pow(std::numbers::pi, 1.0 / 3.0) *
                          std::pow(6.0 * 64.0, 2.0 / 3.0) / 96.0));
    // Cube of side s has max diagonal s*sqrt(3) between opposite corner
    // voxel centres: (side-1)*sqrt(3) here.
    CHECK(get(fv, "s__max_3d_diameter") == doctest::Approx(3.0 * std::sqrt(3.0)));
    CHECK(get(fv, "s__max_2d_diameter_axial") == doctest::Approx(3.0 * std::sqrt(2.0)));
    CHECK(get(fv, "s__elongation") == doctest::Approx(1.0));
    CHECK(get(fv, "s__flatness") == doctest::Approx(1.0));
}

TEST_CASE("anisotropic spacing scales physical measures") {
    const FeatureVector fv = shape_features(cube(6, 2, {2.0, 1.0, 0.5}), "s");
    CHECK(get(fv, "s__volume") == 8.0 * 1.0);
    // 2x2x2 voxel block, physical extents 4 x 2 x 1.
    const double want_surface = 2.0 * (2.0 * 1.0) + 2.0 * (4.0 * 1.0) + 2.0 * (4.0 * 2.0);
    CHECK(get(fv, "s__surface_area") == doctest::Approx(want_surface));
}

TEST_CASE("surface to volume ratio decreases with size") {
    const double v1 = get(shape_features(cube(8, 1), "s"), "s__surface_to_volume_ratio");
    const double v2 = get(shape_features(cube(8, 2), "s"), "s__surface_to_volume_ratio");
    const double v4 = get(shape_features(cube(8, 4), "s"), "s__surface_to_volume_ratio");
    CHECK(v1 > v2);
    CHECK(v2 > v4);
}

TEST_CASE("single voxel conventions") {
    const FeatureVector fv = shape_features(cube(5, 1), "s");
    CHECK(get(fv, "s__volume") == 1.0);
    CHECK(get(fv, "s__surface_area") == 6.0);
    CHECK(get(fv, "s__max_3d_diameter") == 0.0);
    CHECK(get(fv, "s__max_2d_diameter_axial") == 0.0);
    CHECK(get(fv, "s__major_axis_length") == 0.0);
    CHECK(get(fv, "s__minor_axis_length") == 0.0);
    CHECK(get(fv, "s__least_axis_length") == 0.0);
    CHECK(get(fv, "s__elongation") == 1.0);
    CHECK(get(fv, "s__flatness") == 1.0);
}

TEST_CASE("analytic ellipsoid oracle") {
    const double a = 10.0, b = 7.0, c = 5.0;
    const FeatureVector fv = shape_features(ellipsoid_mask({30, 24, 20}, a, b, c), "s");

    const double volume_want = 4.0 / 3.0 * std::numbers::pi * a * b * c;
    CHECK(get(fv, "s__volume") == doctest::Approx(volume_want).epsilon(0.05));

    // Exposed-face digitization inflates a smooth surface by up to ~1.5x.
    const double p = 1.6075;
    const double surface_want =
        4.0 * std::numbers::pi *
        std::pow((std::pow(a * b, p) + std::pow(a * c, p) + std::pow(b * c, p)) / 3.0, 1.0 / p);
    const double surface_got = get(fv, "s__surface_area");
    CHECK(surface_got > surface_want);
    CHECK(surface_got < 1.7 * surface_want);

    CHECK(get(fv, "s__max_3d_diameter") == doctest::Approx(2.0 * a).epsilon(0.10));
    CHECK(get(fv, "s__max_2d_diameter_axial") == doctest::Approx(2.0 * a).epsilon(0.10));
    CHECK(get(fv, "s__max_2d_diameter_coronal") == doctest::Approx(2.0 * a).epsilon(0.10));
    CHECK(get(fv, "s__max_2d_diameter_sagittal") == doctest::Approx(2.0 * b).epsilon(0.10));

    // Uniform solid ellipsoid has axis variance a^2/5.
    CHECK(get(fv, "s__major_axis_length") ==
          doctest::Approx(4.0 * a / std::sqrt(5.0)).epsilon(0.05));
    CHECK(get(fv, "s__minor_axis_length") ==
          doctest::Approx(4.0 * b / std::sqrt(5.0)).epsilon(0.05));
    CHECK(get(fv, "s__least_axis_length") ==
          doctest::Approx(4.0 * c / std::sqrt(5.0)).epsilon(0.05));
    CHECK(get(fv, "s__elongation") == doctest::Approx(b / a).epsilon(0.05));
    CHECK(get(fv, "s__flatness") == doctest::Approx(c / a).epsilon(0.05));
}

TEST_CASE("axis permutation invariance") {
    const BinaryMask xyz = ellipsoid_mask({26, 20, 16}, 8, 6, 4);
    const BinaryMask zyx = make_mask({16, 20, 26}, [&](int x, int y, int z) {
        return xyz.at(z, y, x) != 0;
    });
    const FeatureVector fa = shape_features(xyz, "s");
    const FeatureVector fb = shape_features(zyx, "s");
    for (const char* name :
         {"s__volume", "s__surface_area", "s__sphericity", "s__compactness",
          "s__max_3d_diameter", "s__major_axis_length", "s__minor_axis_length",
          "s__least_axis_length", "s__elongation", "s__flatness"}) {
        CHECK(get(fa, name) == doctest::Approx(get(fb, name)).epsilon(1e-9));
    }
    // In-plane diameters swap with the axes.
    CHECK(get(fa, "s__max_2d_diameter_axial") ==
          doctest::Approx(get(fb, "s__max_2d_diameter_sagittal")).epsilon(1e-9));
}

TEST_CASE("translation invariance") {
    const BinaryMask base = make_mask({12, 12, 12}, [](int x, int y, int z) {
        return x >= 2 && x <= 5 && y >= 3 && y <= 5 && z >= 2 && z <= 3;
    });
    const BinaryMask moved = make_mask({12, 12, 12}, [](int x, int y, int z) {
        return x >= 6 && x <= 9 && y >= 6 && y <= 8 && z >= 7 && z <= 8;
    });
    const FeatureVector fa = shape_features(base, "s");
    const FeatureVector fb = shape_features(moved, "s");
    for (std::size_t i = 0; i < fa.size(); ++i) {
        REQUIRE(fa.value(i).has_value());
        CHECK(*fa.value(i) == doctest::Approx(*fb.value(i)).epsilon(1e-9));
    }
}

TEST_CASE("empty roi is rejected") {
    const BinaryMask empty = make_mask({4, 4, 4}, [](int, int, int) { return false; });
    CHECK_THROWS_AS(shape_features(empty, "s"), InputError);
}

} // TEST_SUITE
