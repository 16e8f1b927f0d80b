#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/ensemble.hpp"
#include "core/location.hpp"
#include "core/morphology.hpp"
#include "core/synth.hpp"
#include "core/volume_io.hpp"
#include "test_support.hpp"

using namespace uqx;
using uqx::testing::TempDir;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

CohortSpec tiny_spec(std::uint64_t seed) {
    CohortSpec spec;
    spec.dataset_id = "tiny";
    spec.seed = seed;
    spec.n_subjects = 2;
    spec.dims = {40, 40, 40};
    spec.lesions_min = 2;
    spec.lesions_max = 3;
    spec.axis_min_mm = 2.0;
    spec.axis_max_mm = 3.5;
    spec.ensemble_size = 3;
    spec.c_sv = 0.2;
    spec.c_gm = 0.1;
    spec.disagreement_noise = 0.05;
    return spec;
}

Volume prob_from_mask(const BinaryMask& m) {
    Volume v(m.dims(), m.spacing(), 0.0f);
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i] ? 1.0f : 0.0f;
    return v;
}

struct SubjectArtifacts {
    BinaryMask gt;
    std::vector<BinaryMask> members;
};

SubjectArtifacts load_subject(const std::string& dir, int ensemble_size) {
    SubjectArtifacts a;
    a.gt = read_mask_bundle(dir + "/gt");
    for (int k = 0; k < ensemble_size; ++k)
        a.members.push_back(read_mask_bundle(dir + "/member_" + std::to_string(k)));
    return a;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() >= 3);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(va * vb);
}

// Exposed-face surface over volume for one labelled component, unit spacing.
double surface_over_volume(const LabelMap& labels, std::int32_t label) {
    const Dims3 d = labels.dims();
    double area = 0.0;
    std::size_t volume = 0;
    constexpr int off[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                               {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                if (labels.at(x, y, z) != label) continue;
                ++volume;
                for (const auto& o : off) {
                    const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (!labels.in_bounds(nx, ny, nz) || labels.at(nx, ny, nz) != label)
                        area += 1.0;
                }
            }
    REQUIRE(volume > 0);
    return area / static_cast<double>(volume);
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("cohort spec file controls every field") {
    const TempDir dir("synth_spec");
    {
        std::ofstream f(dir.path("spec.json"));
        f << R"({
  "dataset_id": "demo",
  "seed": 99,
  "n_subjects": 4,
  "dims": [48, 50, 52],
  "spacing_mm": [1.0, 1.0, 2.0],
  "lesions_per_subject": [2, 5],
  "axis_mm": [2.5, 4.0],
  "elongation": [1.2, 2.0],
  "cortical_fraction": 0.7,
  "ensemble_size": 4,
  "disagreement": {"c_sv": 0.3, "c_gm": 0.15, "noise": 0.02},
  "intensity": {"wm": 900.0, "gm": 700.0, "lesion_factor": 0.5, "noise": 10.0, "background": 50.0},
  "demographics_missing_rate": 0.1
})";
    }
    const CohortSpec spec = load_cohort_spec(dir.path("spec.json"));
    CHECK(spec.dataset_id == "demo");
    CHECK(spec.seed == 99);
    CHECK(spec.n_subjects == 4);
    CHECK(spec.dims.nx == 48);
    CHECK(spec.dims.ny == 50);
    CHECK(spec.dims.nz == 52);
    CHECK(spec.spacing.sz == 2.0);
    CHECK(spec.lesions_min == 2);
    CHECK(spec.lesions_max == 5);
    CHECK(spec.axis_min_mm == 2.5);
    CHECK(spec.axis_max_mm == 4.0);
    CHECK(spec.elongation_min == 1.2);
    CHECK(spec.elongation_max == 2.0);
    CHECK(spec.cortical_fraction == 0.7);
    CHECK(spec.ensemble_size == 4);
    CHECK(spec.c_sv == 0.3);
    CHECK(spec.c_gm == 0.15);
    CHECK(spec.disagreement_noise == 0.02);
    CHECK(spec.wm_intensity == 900.0);
    CHECK(spec.gm_intensity == 700.0);
    CHECK(spec.lesion_factor == 0.5);
    CHECK(spec.image_noise == 10.0);
    CHECK(spec.background_intensity == 50.0);
    CHECK(spec.demographics_missing_rate == 0.1);

    {
        std::ofstream f(dir.path("broken.json"));
        f << "{oops";
    }
    CHECK_THROWS_AS(load_cohort_spec(dir.path("broken.json")), InputError);
    CHECK_THROWS_AS(load_cohort_spec(dir.path("absent.json")), InputError);
    {
        std::ofstream f(dir.path("badfield.json"));
        f << R"({"n_subjects": "three"})";
    }
    CHECK_THROWS_AS(load_cohort_spec(dir.path("badfield.json")), InputError);
}

TEST_CASE("generated cohort is structurally sound") {
    const TempDir dir("synth_struct");
    const CohortSpec spec = tiny_spec(7);
    generate_cohort(spec, dir.path("cohort"));

    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(dir.path("cohort/manifest.json")));
    CHECK(manifest.at("dataset_id") == "tiny");
    REQUIRE(manifest.at("subjects").size() == 2);

    const auto regions = read_atlas_regions(dir.path("cohort/atlas_regions.json"));
    CHECK(regions.size() == 19);

    const std::string demo = slurp(dir.path("cohort/demographics.csv"));
    CHECK(demo.rfind("subject_id,", 0) == 0);
    CHECK(std::count(demo.begin(), demo.end(), '\n') == 3); // header + 2 subjects

    for (const auto& subj : manifest.at("subjects")) {
        const std::string base = dir.path("cohort");
        const Volume image = read_volume_bundle(base + "/" + subj.at("image").get<std::string>());
        const BinaryMask gt = read_mask_bundle(base + "/" + subj.at("gt_mask").get<std::string>());
        const BinaryMask gm = read_mask_bundle(base + "/" + subj.at("gm_mask").get<std::string>());
        const LabelMap atlas = read_label_bundle(base + "/" + subj.at("atlas").get<std::string>());
        CHECK(image.dims().nx == 40);
        CHECK(gt.dims().nx == 40);
        CHECK(gm.dims().nx == 40);
        CHECK(atlas.dims().nx == 40);

        // Atlas labels stay within the declared region table (plus background).
        std::size_t out_of_range = 0;
        for (std::size_t i = 0; i < atlas.size(); ++i)
            if (atlas[i] < 0 || atlas[i] > 19) ++out_of_range;
        CHECK(out_of_range == 0);

        const auto members = subj.at("members");
        REQUIRE(members.size() == 3);

        // Planted lesion count and size floor.
        const LabelMap labels = connected_components(gt, Connectivity::c26);
        const std::int32_t n_lesions = max_label(labels);
        CHECK(n_lesions >= spec.lesions_min);
        CHECK(n_lesions <= spec.lesions_max);
        const auto sizes = label_sizes(labels);
        for (std::int32_t l = 1; l <= n_lesions; ++l)
            CHECK(sizes[static_cast<std::size_t>(l)] >= 4);

        // Placement clearance: growing one lesion by 3 voxels never touches
        // another lesion.
        for (std::int32_t l = 1; l <= n_lesions; ++l) {
            const BinaryMask lesion = mask_of_label(labels, l);
            const BinaryMask grown = dilate(lesion, 3);
            std::size_t touched = 0;
            for (std::size_t i = 0; i < grown.size(); ++i)
                if (grown[i] && gt[i] && labels[i] != l) ++touched;
            CHECK(touched == 0);
        }

        // Lesions darken the image: mean intensity inside lesions sits well
        // below the white-matter level.
        double inside = 0.0;
        std::size_t n_inside = 0;
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (gt[i]) {
                inside += image[i];
                ++n_inside;
            }
        REQUIRE(n_inside > 0);
        CHECK(inside / static_cast<double>(n_inside) < 0.8 * 1000.0);
    }
}

TEST_CASE("identical specs produce byte-identical cohorts") {
    const TempDir dir("synth_repro");
    const CohortSpec spec = tiny_spec(31);
    generate_cohort(spec, dir.path("a"));
    generate_cohort(spec, dir.path("b"));

    for (const char* rel : {"manifest.json", "atlas_regions.json", "demographics.csv",
                            "s000/image.raw", "s000/image.json", "s000/gt.raw",
                            "s000/member_0.raw", "s001/member_2.raw", "s001/atlas.raw"}) {
        CHECK(slurp(dir.path("a") + "/" + rel) == slurp(dir.path("b") + "/" + rel));
    }

    CohortSpec other = spec;
    other.seed = 32;
    generate_cohort(other, dir.path("c"));
    CHECK(slurp(dir.path("a") + "/s000/image.raw") != slurp(dir.path("c") + "/s000/image.raw"));
}

TEST_CASE("zero disagreement reproduces the planted lesions exactly") {
    const TempDir dir("synth_zero");
    CohortSpec spec = tiny_spec(13);
    spec.c_sv = 0.0;
    spec.c_gm = 0.0;
    spec.disagreement_noise = 0.0;
    generate_cohort(spec, dir.path("cohort"));

    for (const char* subj : {"s000", "s001"}) {
        const std::string base = dir.path("cohort") + "/" + subj;
        const SubjectArtifacts a = load_subject(base, spec.ensemble_size);
        for (const BinaryMask& m : a.members) REQUIRE(m.data() == a.gt.data());

        std::vector<Volume> probs;
        for (const BinaryMask& m : a.members) probs.push_back(prob_from_mask(m));
        const EnsemblePrediction ens = make_ensemble(std::move(probs));
        const AggregatedPrediction agg = aggregate(ens, 0.5);
        CHECK(agg.n_lesions >= spec.lesions_min);
        for (double u : lsu_all(agg, ens, 0.5)) CHECK(u == 0.0);
    }
}

TEST_CASE("surface-heavy lesions are reproducibly harder for the ensemble") {
    const TempDir dir("synth_sv");
    CohortSpec spec;
    spec.dataset_id = "svlaw";
    spec.seed = 517;
    spec.n_subjects = 15;
    spec.dims = {48, 48, 48};
    spec.lesions_min = 5;
    spec.lesions_max = 7;
    spec.axis_min_mm = 2.0;
    spec.axis_max_mm = 4.0;
    spec.cortical_fraction = 0.3;
    spec.ensemble_size = 5;
    spec.c_sv = 0.35;
    spec.c_gm = 0.0;
    spec.disagreement_noise = 0.02;
    generate_cohort(spec, dir.path("cohort"));

    std::vector<double> lsus, svs;
    for (int si = 0; si < spec.n_subjects; ++si) {
        char name[16];
        std::snprintf(name, sizeof(name), "s%03d", si);
        const std::string base = dir.path("cohort") + "/" + name;
        const SubjectArtifacts a = load_subject(base, spec.ensemble_size);

        std::vector<Volume> probs;
        for (const BinaryMask& m : a.members) probs.push_back(prob_from_mask(m));
        const EnsemblePrediction ens = make_ensemble(std::move(probs));
        const AggregatedPrediction agg = aggregate(ens, 0.5);
        const std::vector<double> us = lsu_all(agg, ens, 0.5);
        for (std::int32_t l = 1; l <= agg.n_lesions; ++l) {
            lsus.push_back(us[static_cast<std::size_t>(l - 1)]);
            svs.push_back(surface_over_volume(agg.labels, l));
        }
    }
    CHECK(lsus.size() >= 75);
    CHECK(pearson(lsus, svs) > 0.4);
}

TEST_CASE("infeasible placement fails loudly") {
    const TempDir dir("synth_full");
    CohortSpec spec;
    spec.seed = 3;
    spec.n_subjects = 1;
    spec.dims = {48, 48, 48};
    spec.lesions_min = 40;
    spec.lesions_max = 40;
    spec.axis_min_mm = 5.0;
    spec.axis_max_mm = 5.4;
    spec.cortical_fraction = 0.0;
    spec.ensemble_size = 2;
    CHECK_THROWS_AS(generate_cohort(spec, dir.path("cohort")), InputError);
}

TEST_CASE("invalid cohort parameters are rejected") {
    const TempDir dir("synth_invalid");
    CohortSpec spec = tiny_spec(1);
    spec.ensemble_size = 1;
    CHECK_THROWS_AS(generate_cohort(spec, dir.path("x")), InputError);
    spec = tiny_spec(1);
    spec.axis_max_mm = 30.0; // larger than the phantom allows
    CHECK_THROWS_AS(generate_cohort(spec, dir.path("x")), InputError);
    spec = tiny_spec(1);
    spec.lesions_min = 0;
    CHECK_THROWS_AS(generate_cohort(spec, dir.path("x")), InputError);
    spec = tiny_spec(1);
    spec.demographics_missing_rate = 1.0;
    CHECK_THROWS_AS(generate_cohort(spec, dir.path("x")), InputError);
}

TEST_CASE("demographics rows honour the missing-value rate") {
    const TempDir dir("synth_demo");
    CohortSpec spec = tiny_spec(77);
    spec.n_subjects = 6;
    spec.demographics_missing_rate = 0.5;
    generate_cohort(spec, dir.path("cohort"));
    const std::string demo = slurp(dir.path("cohort/demographics.csv"));
    CHECK(demo.find(",,") != std::string::npos);

    CohortSpec full = tiny_spec(77);
    full.n_subjects = 6;
    generate_cohort(full, dir.path("full"));
    const std::string all = slurp(dir.path("full/demographics.csv"));
    CHECK(all.find(",,") == std::string::npos);
}

} // TEST_SUITE
