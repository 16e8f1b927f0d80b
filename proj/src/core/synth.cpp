#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "feature_extract.hpp"
#include "location.hpp"
#include "morphology.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "table.hpp"
#include "volume_io.hpp"

namespace uqx {

namespace {

using nlohmann::json;

constexpr const char* kRegionStems[9] = {
    "frontal", "parietal", "temporal", "occipital", "cingulate",
    "insula",  "thalamus", "caudate",  "putamen",
};

std::vector<AtlasRegion> synthetic_regions() {
    std::vector<AtlasRegion> regions;
    for (int s = 0; s < 9; ++s)
        regions.push_back({s + 1, std::string(kRegionStems[s]) + "_right"});
    for (int s = 0; s < 9; ++s)
        regions.push_back({10 + s, std::string(kRegionStems[s]) + "_left"});
    regions.push_back({19, "brainstem"});
    return regions;
}

struct Phantom {
    double cx, cy, cz;      // brain centre, mm
    double brain_radius;    // mm
    double gm_inner;        // inner radius of the cortical shell
    double brainstem_radius;
};

Phantom make_phantom(const CohortSpec& spec) {
    Phantom p;
    p.cx = (spec.dims.nx - 1) * spec.spacing.sx / 2.0;
    p.cy = (spec.dims.ny - 1) * spec.spacing.sy / 2.0;
    p.cz = (spec.dims.nz - 1) * spec.spacing.sz / 2.0;
    const double extent = std::min({spec.dims.nx * spec.spacing.sx,
                                    spec.dims.ny * spec.spacing.sy,
                                    spec.dims.nz * spec.spacing.sz});
    p.brain_radius = extent / 2.0 - 2.0;
    p.gm_inner = 0.85 * p.brain_radius;
    p.brainstem_radius = 0.2 * p.brain_radius;
    return p;
}

struct Ellipsoid {
    double cx, cy, cz; // mm
    double ax, ay, az; // semi-axes, mm
};

// Voxelise: centres with sum((p - c)/a)^2 <= 1, clipped to the brain ball.
std::vector<std::size_t> ellipsoid_voxels(const Ellipsoid& e, const BinaryMask& brain) {
    const Dims3 d = brain.dims();
    const Spacing3 s = brain.spacing();
    const int x0 = std::max(0, static_cast<int>(std::ceil((e.cx - e.ax) / s.sx)));
    const int x1 = std::min(d.nx - 1, static_cast<int>(std::floor((e.cx + e.ax) / s.sx)));
    const int y0 = std::max(0, static_cast<int>(std::ceil((e.cy - e.ay) / s.sy)));
    const int y1 = std::min(d.ny - 1, static_cast<int>(std::floor((e.cy + e.ay) / s.sy)));
    const int z0 = std::max(0, static_cast<int>(std::ceil((e.cz - e.az) / s.sz)));
    const int z1 = std::min(d.nz - 1, static_cast<int>(std::floor((e.cz + e.az) / s.sz)));

    std::vector<std::size_t> voxels;
    for (int z = z0; z <= z1; ++z) {
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = (x * s.sx - e.cx) / e.ax;
                const double dy = (y * s.sy - e.cy) / e.ay;
                const double dz = (z * s.sz - e.cz) / e.az;
                if (dx * dx + dy * dy + dz * dz <= 1.0) {
                    const std::size_t i = brain.index(x, y, z);
                    if (brain[i]) voxels.push_back(i);
                }
            }
        }
    }
    return voxels;
}

double exposed_surface_over_volume(const std::vector<std::size_t>& voxels,
                                   const BinaryMask& grid_shape) {
    BinaryMask m(grid_shape.dims(), grid_shape.spacing(), 0);
    for (std::size_t i : voxels) m[i] = 1;
    const Spacing3 s = m.spacing();
    const double face_area[3] = {s.sy * s.sz, s.sx * s.sz, s.sx * s.sy};
    constexpr int face_offsets[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                        {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    double area = 0.0;
    for (std::size_t i : voxels) {
        int x, y, z;
        m.coords(i, x, y, z);
        for (int f = 0; f < 6; ++f) {
            const int nx = x + face_offsets[f][0];
            const int ny = y + face_offsets[f][1];
            const int nz = z + face_offsets[f][2];
            if (!m.in_bounds(nx, ny, nz) || !m.at(nx, ny, nz)) area += face_area[f / 2];
        }
    }
    return area / (static_cast<double>(voxels.size()) * s.voxel_volume());
}

struct SubjectData {
    Volume image;
    BinaryMask gt;
    BinaryMask gm;
    LabelMap atlas;
    std::vector<BinaryMask> members;
    std::string demographics_row;
};

struct PlantedLesion {
    Ellipsoid shape;
    std::vector<std::size_t> voxels;
    double delta = 0.0;
};

SubjectData build_subject(const CohortSpec& spec, const Phantom& ph, std::uint64_t subject) {
    const Dims3 d = spec.dims;
    const Spacing3 s = spec.spacing;

    BinaryMask brain(d, s, 0);
    BinaryMask gm(d, s, 0);
    LabelMap atlas(d, s, 0);
    for (int z = 0; z < d.nz; ++z) {
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                const double px = x * s.sx - ph.cx;
                const double py = y * s.sy - ph.cy;
                const double pz = z * s.sz - ph.cz;
                const double r = std::sqrt(px * px + py * py + pz * pz);
                if (r > ph.brain_radius) continue;
                brain.at(x, y, z) = 1;
                if (r >= ph.gm_inner) gm.at(x, y, z) = 1;
                if (r < ph.brainstem_radius) {
                    atlas.at(x, y, z) = 19;
                } else {
                    const double theta = std::atan2(pz, py) + std::numbers::pi;
                    int sector = static_cast<int>(theta / (2.0 * std::numbers::pi) * 9.0);
                    sector = std::clamp(sector, 0, 8);
                    atlas.at(x, y, z) = 1 + sector + (px < 0.0 ? 9 : 0);
                }
            }
        }
    }

    // Lesion placement by rejection sampling; accepted lesions keep a
    // Chebyshev clearance of 4 voxels so ensemble perturbations never merge
    // neighbouring lesions.
    Rng place_rng = Rng::derive(spec.seed, subject * 8 + 0);
    const int n_lesions =
        spec.lesions_min +
        static_cast<int>(place_rng.uniform_int(
            static_cast<std::uint64_t>(spec.lesions_max - spec.lesions_min + 1)));

    BinaryMask gt(d, s, 0);
    BinaryMask occupied(d, s, 0);
    std::vector<PlantedLesion> lesions;
    for (int li = 0; li < n_lesions; ++li) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double base = place_rng.uniform(spec.axis_min_mm, spec.axis_max_mm);
            const double e = place_rng.uniform(spec.elongation_min, spec.elongation_max);
            double axes[3] = {base * e, base, base / std::sqrt(e)};
            const auto perm = static_cast<int>(place_rng.uniform_int(6));
            constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                         {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
            const double ax = axes[perms[perm][0]];
            const double ay = axes[perms[perm][1]];
            const double az = axes[perms[perm][2]];
            const double max_axis = std::max({ax, ay, az});

            // Direction uniform on the sphere, radius by lesion class.
            double ux = place_rng.normal(), uy = place_rng.normal(), uz = place_rng.normal();
            const double norm = std::sqrt(ux * ux + uy * uy + uz * uz);
            if (norm < 1e-9) continue;
            ux /= norm;
            uy /= norm;
            uz /= norm;

            const bool cortical = place_rng.uniform() < spec.cortical_fraction;
            double r_lo, r_hi;
            if (cortical) {
                r_lo = ph.gm_inner - max_axis;
                r_hi = ph.brain_radius - max_axis - 1.0;
            } else {
                r_lo = ph.brainstem_radius + max_axis + 1.0;
                r_hi = ph.gm_inner - max_axis - 1.0;
            }
            if (r_hi <= r_lo) continue;
            const double r = place_rng.uniform(r_lo, r_hi);

            Ellipsoid cand{ph.cx + r * ux, ph.cy + r * uy, ph.cz + r * uz, ax, ay, az};
            const std::vector<std::size_t> voxels = ellipsoid_voxels(cand, brain);
            if (voxels.size() < 4) continue;
            bool clear = true;
            for (std::size_t i : voxels) {
                if (occupied[i]) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;

            BinaryMask lesion_mask(d, s, 0);
            for (std::size_t i : voxels) {
                lesion_mask[i] = 1;
                gt[i] = 1;
            }
            const BinaryMask grown = dilate(lesion_mask, 3);
            for (std::size_t i = 0; i < occupied.size(); ++i)
                if (grown[i]) occupied[i] = 1;

            PlantedLesion lesion;
            lesion.shape = cand;
            lesion.voxels = voxels;
            lesions.push_back(std::move(lesion));
            placed = true;
        }
        require_input(placed, "cohort spec infeasible: lesion placement failed after "
                              "1000 attempts (subject " + std::to_string(subject) + ")");
    }

    // Disagreement scale per lesion, from its own geometry.
    for (PlantedLesion& lesion : lesions) {
        const double sv = exposed_surface_over_volume(lesion.voxels, brain);
        std::size_t in_gm = 0;
        for (std::size_t i : lesion.voxels) in_gm += gm[i];
        const double overlap =
            static_cast<double>(in_gm) / static_cast<double>(lesion.voxels.size());
        const double ambiguity = 1.0 - std::abs(2.0 * overlap - 1.0);
        lesion.delta = spec.c_sv * sv + spec.c_gm * ambiguity + spec.disagreement_noise;
    }

    Rng member_rng = Rng::derive(spec.seed, subject * 8 + 1);
    std::vector<BinaryMask> members(static_cast<std::size_t>(spec.ensemble_size),
                                    BinaryMask(d, s, 0));
    for (const PlantedLesion& lesion : lesions) {
        for (int k = 0; k < spec.ensemble_size; ++k) {
            const double raw = lesion.delta * member_rng.normal();
            // Clamp below half the placement clearance so members of
            // different lesions stay disjoint.
            const double offset = std::clamp(raw, -1.8, 1.8);
            Ellipsoid m = lesion.shape;
            m.ax = std::max(m.ax + offset, 0.3 * m.ax);
            m.ay = std::max(m.ay + offset, 0.3 * m.ay);
            m.az = std::max(m.az + offset, 0.3 * m.az);
            for (std::size_t i : ellipsoid_voxels(m, brain))
                members[static_cast<std::size_t>(k)][i] = 1;
        }
    }

    Rng image_rng = Rng::derive(spec.seed, subject * 8 + 2);
    Volume image(d, s, 0.0f);
    for (std::size_t i = 0; i < image.size(); ++i) {
        double value = spec.background_intensity;
        if (brain[i]) value = gm[i] ? spec.gm_intensity : spec.wm_intensity;
        if (gt[i]) value *= spec.lesion_factor;
        value += spec.image_noise * image_rng.normal();
        image[i] = static_cast<float>(value);
    }

    SubjectData out;
    out.image = std::move(image);
    out.gt = std::move(gt);
    out.gm = std::move(gm);
    out.atlas = std::move(atlas);
    out.members = std::move(members);
    return out;
}

std::string demographics_row(const CohortSpec& spec, std::uint64_t subject,
                             const std::string& subject_id) {
    Rng rng = Rng::derive(spec.seed, subject * 8 + 3);

    const double age = rng.uniform(20.0, 60.0);
    const bool male = rng.uniform() < 0.45;
    const double duration = rng.uniform(0.0, 25.0);
    const double edss = static_cast<double>(rng.uniform_int(15)) / 2.0;

    const double quality[13] = {
        rng.uniform(0.3, 0.6),    rng.uniform(2.5, 4.5),  rng.uniform(0.35, 0.55),
        rng.uniform(1000.0, 6000.0), rng.uniform(2.5, 4.5), rng.uniform(0.7, 1.0),
        rng.uniform(0.2, 0.6),    rng.uniform(0.0, 0.01), rng.uniform(5.0, 15.0),
        rng.uniform(8.0, 18.0),   rng.uniform(8.0, 20.0), rng.uniform(10.0, 25.0),
        rng.uniform(1.0, 10.0),
    };

    auto cell = [&](double v) {
        if (spec.demographics_missing_rate > 0.0 &&
            rng.uniform() < spec.demographics_missing_rate)
            return std::string();
        return format_double(v);
    };

    std::string row = subject_id;
    for (double q : quality) row += "," + cell(q);
    row += "," + cell(age);
    row += "," + format_double(male ? 1.0 : 0.0);
    row += "," + format_double(male ? 0.0 : 1.0);
    row += "," + cell(duration);
    row += "," + cell(edss);
    return row;
}

std::string subject_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", index);
    return buf;
}

} // namespace

CohortSpec load_cohort_spec(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open cohort spec: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed cohort spec " + path + ": " + e.what());
    }

    CohortSpec spec;
    try {
        if (j.contains("dataset_id")) spec.dataset_id = j["dataset_id"].get<std::string>();
        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("n_subjects")) spec.n_subjects = j["n_subjects"].get<int>();
        if (j.contains("dims")) {
            const auto& d = j["dims"];
            require_input(d.is_array() && d.size() == 3, "cohort dims must have 3 entries");
            spec.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
        }
        if (j.contains("spacing_mm")) {
            const auto& sp = j["spacing_mm"];
            require_input(sp.is_array() && sp.size() == 3,
                          "cohort spacing_mm must have 3 entries");
            spec.spacing = {sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
        }
        if (j.contains("lesions_per_subject")) {
            const auto& l = j["lesions_per_subject"];
            require_input(l.is_array() && l.size() == 2,
                          "lesions_per_subject must be [min, max]");
            spec.lesions_min = l[0].get<int>();
            spec.lesions_max = l[1].get<int>();
        }
        if (j.contains("axis_mm")) {
            const auto& a = j["axis_mm"];
            require_input(a.is_array() && a.size() == 2, "axis_mm must be [min, max]");
            spec.axis_min_mm = a[0].get<double>();
            spec.axis_max_mm = a[1].get<double>();
        }
        if (j.contains("elongation")) {
            const auto& e = j["elongation"];
            require_input(e.is_array() && e.size() == 2, "elongation must be [min, max]");
            spec.elongation_min = e[0].get<double>();
            spec.elongation_max = e[1].get<double>();
        }
        if (j.contains("cortical_fraction"))
            spec.cortical_fraction = j["cortical_fraction"].get<double>();
        if (j.contains("ensemble_size")) spec.ensemble_size = j["ensemble_size"].get<int>();
        if (j.contains("disagreement")) {
            const auto& dis = j["disagreement"];
            if (dis.contains("c_sv")) spec.c_sv = dis["c_sv"].get<double>();
            if (dis.contains("c_gm")) spec.c_gm = dis["c_gm"].get<double>();
            if (dis.contains("noise")) spec.disagreement_noise = dis["noise"].get<double>();
        }
        if (j.contains("intensity")) {
            const auto& in_j = j["intensity"];
            if (in_j.contains("wm")) spec.wm_intensity = in_j["wm"].get<double>();
            if (in_j.contains("gm")) spec.gm_intensity = in_j["gm"].get<double>();
            if (in_j.contains("lesion_factor"))
                spec.lesion_factor = in_j["lesion_factor"].get<double>();
            if (in_j.contains("noise")) spec.image_noise = in_j["noise"].get<double>();
            if (in_j.contains("background"))
                spec.background_intensity = in_j["background"].get<double>();
        }
        if (j.contains("demographics_missing_rate"))
            spec.demographics_missing_rate = j["demographics_missing_rate"].get<double>();
    } catch (const json::exception& e) {
        throw InputError("cohort spec " + path + " has invalid fields: " + e.what());
    }
    return spec;
}

void generate_cohort(const CohortSpec& spec, const std::string& out_dir, int n_threads) {
    require_input(spec.n_subjects >= 1, "cohort needs at least 1 subject");
    require_input(spec.lesions_min >= 1 && spec.lesions_max >= spec.lesions_min,
                  "lesions_per_subject range is invalid");
    require_input(spec.axis_min_mm > 0.0 && spec.axis_max_mm >= spec.axis_min_mm,
                  "axis_mm range is invalid");
    require_input(spec.elongation_min >= 1.0 && spec.elongation_max >= spec.elongation_min,
                  "elongation range is invalid");
    require_input(spec.cortical_fraction >= 0.0 && spec.cortical_fraction <= 1.0,
                  "cortical_fraction must be in [0, 1]");
    require_input(spec.ensemble_size >= 2, "ensemble_size must be >= 2");
    require_input(spec.c_sv >= 0.0 && spec.c_gm >= 0.0 && spec.disagreement_noise >= 0.0,
                  "disagreement coefficients must be >= 0");
    require_input(spec.demographics_missing_rate >= 0.0 &&
                      spec.demographics_missing_rate < 1.0,
                  "demographics_missing_rate must be in [0, 1)");

    const Phantom ph = make_phantom(spec);
    require_input(ph.brain_radius > 4.0 * spec.axis_max_mm,
                  "cohort volume is too small for the requested lesion sizes");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    write_atlas_regions(synthetic_regions(), out_dir + "/atlas_regions.json");

    std::vector<std::string> demo_rows(static_cast<std::size_t>(spec.n_subjects));
    parallel_for(static_cast<std::size_t>(spec.n_subjects), n_threads, [&](std::size_t si) {
        const std::string name = subject_name(static_cast<int>(si));
        const fs::path subj_dir = fs::path(out_dir) / name;
        fs::create_directories(subj_dir);

        const SubjectData data = build_subject(spec, ph, si);
        write_volume_bundle(data.image, (subj_dir / "image").string());
        write_mask_bundle(data.gt, (subj_dir / "gt").string());
        write_mask_bundle(data.gm, (subj_dir / "gm").string());
        write_label_bundle(data.atlas, (subj_dir / "atlas").string());
        for (std::size_t k = 0; k < data.members.size(); ++k)
            write_mask_bundle(data.members[k],
                              (subj_dir / ("member_" + std::to_string(k))).string());
        demo_rows[si] = demographics_row(spec, si, name);
    });

    std::string csv = "subject_id";
    for (const char* n : kQualityColumnNames) csv += std::string(",") + n;
    for (const char* n : kDemographicColumnNames) csv += std::string(",") + n;
    csv += "\n";
    for (const auto& row : demo_rows) csv += row + "\n";
    std::ofstream demo_out(out_dir + "/demographics.csv", std::ios::binary | std::ios::trunc);
    require_input(demo_out.good(), "cannot write demographics.csv in " + out_dir);
    demo_out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    require_input(demo_out.good(), "failed to write demographics.csv in " + out_dir);

    nlohmann::ordered_json manifest;
    manifest["dataset_id"] = spec.dataset_id;
    manifest["atlas_regions"] = "atlas_regions.json";
    manifest["demographics"] = "demographics.csv";
    manifest["subjects"] = nlohmann::ordered_json::array();
    for (int si = 0; si < spec.n_subjects; ++si) {
        const std::string name = subject_name(si);
        nlohmann::ordered_json subj;
        subj["subject_id"] = name;
        subj["image"] = name + "/image";
        subj["gt_mask"] = name + "/gt";
        subj["gm_mask"] = name + "/gm";
        subj["atlas"] = name + "/atlas";
        auto members = nlohmann::ordered_json::array();
        for (int k = 0; k < spec.ensemble_size; ++k)
            members.push_back(name + "/member_" + std::to_string(k));
        subj["members"] = members;
        manifest["subjects"].push_back(subj);
    }
    std::ofstream man_out(out_dir + "/manifest.json", std::ios::trunc);
    require_input(man_out.good(), "cannot write manifest.json in " + out_dir);
    man_out << manifest.dump(2) << "\n";
    require_input(man_out.good(), "failed to write manifest.json in " + out_dir);
}

} // namespace uqx
