#include <doctest.h>

#include <vector>

#include "core/location.hpp"
#include "test_support.hpp"

using namespace uqx;
using uqx::testing::make_mask;
using uqx::testing::TempDir;

namespace {

double get(const FeatureVector& fv, const std::string& name) {
    const auto v = fv.find(name);
    REQUIRE(v.has_value());
    return *v;
}

} // namespace

TEST_SUITE("location") {

TEST_CASE("region fractions and gm overlap") {
    LabelMap atlas({4, 4, 4}, {1, 1, 1});
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) atlas.at(x, y, z) = x < 2 ? 1 : 2;
    const std::vector<AtlasRegion> regions = {{1, "frontal_left"}, {2, "frontal_right"}};

    const BinaryMask roi = make_mask({4, 4, 4}, [](int x, int y, int z) {
        return y == 0 && z == 0 && x >= 1 && x <= 2;
    });
    const BinaryMask gm = make_mask({4, 4, 4}, [](int x, int, int) { return x >= 2; });

    const FeatureVector fv = location_features(roi, atlas, regions, gm, "lesion__location");
    CHECK(get(fv, "lesion__location__frontal_left") == 0.5);
    CHECK(get(fv, "lesion__location__frontal_right") == 0.5);
    CHECK(get(fv, "lesion__location__gm_overlap") == 0.5);
    CHECK(fv.size() == 3);

    const BinaryMask outside =
        make_mask({4, 4, 4}, [](int x, int, int) { return x == 3; });
    const BinaryMask no_gm = make_mask({4, 4, 4}, [](int, int, int) { return false; });
    const FeatureVector fv2 = location_features(outside, atlas, regions, no_gm, "l");
    CHECK(get(fv2, "l__frontal_left") == 0.0);
    CHECK(get(fv2, "l__frontal_right") == 1.0);
    CHECK(get(fv2, "l__gm_overlap") == 0.0);
}

TEST_CASE("fractions cover the roi when the atlas does") {
    LabelMap atlas({5, 5, 5}, {1, 1, 1});
    for (std::size_t i = 0; i < atlas.size(); ++i)
        atlas[i] = static_cast<std::int32_t>(i % 3) + 1;
    const std::vector<AtlasRegion> regions = {{1, "a"}, {2, "b"}, {3, "c"}};
    const BinaryMask roi = make_mask({5, 5, 5}, [](int x, int y, int) { return x + y < 4; });
    const BinaryMask gm = make_mask({5, 5, 5}, [](int, int, int) { return false; });

    const FeatureVector fv = location_features(roi, atlas, regions, gm, "l");
    const double total = get(fv, "l__a") + get(fv, "l__b") + get(fv, "l__c");
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty roi is rejected") {
    LabelMap atlas({3, 3, 3}, {1, 1, 1});
    const std::vector<AtlasRegion> regions = {{1, "a"}};
    const BinaryMask empty = make_mask({3, 3, 3}, [](int, int, int) { return false; });
    const BinaryMask gm = make_mask({3, 3, 3}, [](int, int, int) { return false; });
    CHECK_THROWS_AS(location_features(empty, atlas, regions, gm, "l"), InputError);
}

TEST_CASE("region table roundtrip") {
    const TempDir dir("location");
    const std::vector<AtlasRegion> regions = {
        {1, "frontal_right"}, {2, "parietal_right"}, {19, "brainstem"}};
    const std::string path = dir.path("regions.json");
    write_atlas_regions(regions, path);
    const std::vector<AtlasRegion> back = read_atlas_regions(path);
    REQUIRE(back.size() == regions.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == regions[i].id);
        CHECK(back[i].column == regions[i].column);
    }
}

TEST_CASE("region table validation") {
    const TempDir dir("location_bad");
    const std::string path = dir.path("regions.json");
    CHECK_THROWS_AS(read_atlas_regions(dir.path("missing.json")), InputError);
    CHECK_THROWS_AS(write_atlas_regions({{0, "zero"}}, path), InputError);
    CHECK_THROWS_AS(write_atlas_regions({{1, "a"}, {1, "b"}}, path), InputError);
}

} // TEST_SUITE
