#include "shape_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace uqx {

const char* const kShapeFeatureNames[14] = {
    "volume",
    "surface_area",
    "surface_to_volume_ratio",
    "sphericity",
    "compactness",
    "max_3d_diameter",
    "max_2d_diameter_axial",
    "max_2d_diameter_coronal",
    "max_2d_diameter_sagittal",
    "major_axis_length",
    "minor_axis_length",
    "least_axis_length",
    "elongation",
    "flatness",
};

namespace {

struct VoxelPoint {
    int x, y, z;
    double px, py, pz; // physical centre in mm
};

double max_pair_sq(const std::vector<VoxelPoint>& pts, int skip_axis) {
    double best = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double dx = skip_axis == 0 ? 0.0 : pts[a].px - pts[b].px;
            const double dy = skip_axis == 1 ? 0.0 : pts[a].py - pts[b].py;
            const double dz = skip_axis == 2 ? 0.0 : pts[a].pz - pts[b].pz;
            best = std::max(best, dx * dx + dy * dy + dz * dz);
        }
    }
    return best;
}

// Largest in-plane diameter across slices perpendicular to `axis`.
double max_planar_diameter(const std::vector<VoxelPoint>& boundary, int axis) {
    std::vector<std::vector<VoxelPoint>> slices;
    auto slice_of = [axis](const VoxelPoint& p) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; };
    int max_slice = 0;
    for (const auto& p : boundary) max_slice = std::max(max_slice, slice_of(p));
    slices.resize(static_cast<std::size_t>(max_slice) + 1);
    for (const auto& p : boundary) slices[static_cast<std::size_t>(slice_of(p))].push_back(p);

    double best = 0.0;
    for (const auto& s : slices) best = std::max(best, max_pair_sq(s, axis));
    return std::sqrt(best);
}

} // namespace

FeatureVector shape_features(const BinaryMask& roi, const std::string& prefix) {
    const Dims3 d = roi.dims();
    const Spacing3 sp = roi.spacing();

    std::vector<VoxelPoint> voxels;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                if (roi.at(x, y, z))
                    voxels.push_back({x, y, z, x * sp.sx, y * sp.sy, z * sp.sz});
    require_input(!voxels.empty(), "shape_features: ROI is empty");

    const double volume = static_cast<double>(voxels.size()) * sp.voxel_volume();

    // Exposed-face surface area and face-exposed boundary voxels.
    const double face_area[3] = {sp.sy * sp.sz, sp.sx * sp.sz, sp.sx * sp.sy};
    constexpr int face_offsets[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                        {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    double surface = 0.0;
    std::vector<VoxelPoint> boundary;
    for (const auto& v : voxels) {
        bool exposed = false;
        for (int f = 0; f < 6; ++f) {
            const int nx = v.x + face_offsets[f][0];
            const int ny = v.y + face_offsets[f][1];
            const int nz = v.z + face_offsets[f][2];
            if (!roi.in_bounds(nx, ny, nz) || !roi.at(nx, ny, nz)) {
                surface += face_area[f / 2];
                exposed = true;
            }
        }
        if (exposed) boundary.push_back(v);
    }

    const double s2v = surface / volume;
    const double sphericity =
        std::pow(std::numbers::pi, 1.0 / 3.0) * std::pow(6.0 * volume, 2.0 / 3.0) / surface;
    const double compactness = 36.0 * std::numbers::pi * volume * volume /
                               (surface * surface * surface);

    const double max_3d = std::sqrt(max_pair_sq(boundary, -1));
    const double max_axial = max_planar_diameter(boundary, 2);
    const double max_coronal = max_planar_diameter(boundary, 1);
    const double max_sagittal = max_planar_diameter(boundary, 0);

    // Principal axes from the population covariance of voxel centres.
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& v : voxels) mean += Eigen::Vector3d(v.px, v.py, v.pz);
    mean /= static_cast<double>(voxels.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& v : voxels) {
        const Eigen::Vector3d c = Eigen::Vector3d(v.px, v.py, v.pz) - mean;
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(voxels.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const double least_l = std::max(0.0, eig.eigenvalues()[0]);
    const double minor_l = std::max(0.0, eig.eigenvalues()[1]);
    const double major_l = std::max(0.0, eig.eigenvalues()[2]);

    const double major_axis = 4.0 * std::sqrt(major_l);
    const double minor_axis = 4.0 * std::sqrt(minor_l);
    const double least_axis = 4.0 * std::sqrt(least_l);
    const double elongation = major_l > 0.0 ? std::sqrt(minor_l / major_l) : 1.0;
    const double flatness = major_l > 0.0 ? std::sqrt(least_l / major_l) : 1.0;

    const double stats[14] = {
        volume,     surface,    s2v,         sphericity, compactness,
        max_3d,     max_axial,  max_coronal, max_sagittal,
        major_axis, minor_axis, least_axis,  elongation, flatness,
    };

    FeatureVector out;
    for (int i = 0; i < 14; ++i)
        out.push(prefix + "__" + kShapeFeatureNames[i], stats[i]);
    return out;
}

} // namespace uqx
