#include "morphology.hpp"

#include <algorithm>
#include <cstdlib>

namespace uqx {

namespace {

bool offset_in_class(int dx, int dy, int dz, Connectivity conn) {
    const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
    if (manhattan == 0) return false;
    switch (conn) {
        case Connectivity::c6: return manhattan == 1;
        case Connectivity::c18: return manhattan <= 2;
        case Connectivity::c26: return true;
    }
    return false;
}

// Offsets that precede the current voxel in the x-fastest raster scan.
bool precedes_in_scan(int dx, int dy, int dz) {
    if (dz != 0) return dz < 0;
    if (dy != 0) return dy < 0;
    return dx < 0;
}

class UnionFind {
public:
    std::int32_t make() {
        parent_.push_back(static_cast<std::int32_t>(parent_.size()));
        return parent_.back();
    }

    std::int32_t find(std::int32_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<std::int32_t> parent_;
};

} // namespace

std::vector<std::array<int, 3>> neighbor_offsets(Connectivity conn) {
    std::vector<std::array<int, 3>> offsets;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                if (offset_in_class(dx, dy, dz, conn)) offsets.push_back({dx, dy, dz});
    return offsets;
}

LabelMap connected_components(const BinaryMask& mask, Connectivity conn) {
    std::vector<std::array<int, 3>> prior;
    for (const auto& o : neighbor_offsets(conn))
        if (precedes_in_scan(o[0], o[1], o[2])) prior.push_back(o);

    const Dims3 d = mask.dims();
    LabelMap provisional(d, mask.spacing(), 0);
    UnionFind uf;
    uf.make(); // slot 0 stays the background sentinel

    for (int z = 0; z < d.nz; ++z) {
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                if (mask.at(x, y, z) == 0) continue;
                std::int32_t assigned = 0;
                for (const auto& o : prior) {
                    const int px = x + o[0], py = y + o[1], pz = z + o[2];
                    if (!mask.in_bounds(px, py, pz)) continue;
                    const std::int32_t neighbor = provisional.at(px, py, pz);
                    if (neighbor == 0) continue;
                    if (assigned == 0) assigned = neighbor;
                    else uf.unite(assigned, neighbor);
                }
                if (assigned == 0) assigned = uf.make();
                provisional.at(x, y, z) = assigned;
            }
        }
    }

    // Second pass: collapse to roots and number components by the raster
    // position of their first voxel.
    LabelMap labels(d, mask.spacing(), 0);
    std::int32_t next_label = 0;
    std::vector<std::int32_t> final_of_root(1, 0);
    for (std::size_t i = 0; i < provisional.size(); ++i) {
        const std::int32_t p = provisional[i];
        if (p == 0) continue;
        const std::int32_t root = uf.find(p);
        if (static_cast<std::size_t>(root) >= final_of_root.size())
            final_of_root.resize(static_cast<std::size_t>(root) + 1, 0);
        if (final_of_root[root] == 0) final_of_root[root] = ++next_label;
        labels[i] = final_of_root[root];
    }
    return labels;
}

std::int32_t max_label(const LabelMap& labels) {
    std::int32_t m = 0;
    for (std::int32_t v : labels.data()) m = std::max(m, v);
    return m;
}

std::vector<std::vector<std::size_t>> label_voxels(const LabelMap& labels) {
    const std::int32_t n = max_label(labels);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::int32_t v = labels[i];
        if (v > 0) out[static_cast<std::size_t>(v)].push_back(i);
    }
    return out;
}

std::vector<std::size_t> label_sizes(const LabelMap& labels) {
    const std::int32_t n = max_label(labels);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t v : labels.data())
        if (v > 0) ++sizes[static_cast<std::size_t>(v)];
    return sizes;
}

BinaryMask mask_of_label(const LabelMap& labels, std::int32_t label) {
    require_input(label >= 1, "component label must be >= 1");
    BinaryMask out(labels.dims(), labels.spacing(), 0);
    bool found = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            out[i] = 1;
            found = true;
        }
    }
    require_input(found, "component label not present in label map");
    return out;
}

namespace {

void dilate_axis(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
                 std::size_t n, std::size_t stride, std::size_t lines,
                 std::size_t line_stride_outer, std::size_t outer, std::size_t outer_stride) {
    for (std::size_t a = 0; a < outer; ++a) {
        for (std::size_t b = 0; b < lines; ++b) {
            const std::size_t base = a * outer_stride + b * line_stride_outer;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx = base + i * stride;
                std::uint8_t v = in[idx];
                if (!v && i > 0) v = in[idx - stride];
                if (!v && i + 1 < n) v = in[idx + stride];
                out[idx] = v;
            }
        }
    }
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, int iterations) {
    require_input(iterations >= 0, "dilation iterations must be >= 0");
    const Dims3 d = mask.dims();
    const auto nx = static_cast<std::size_t>(d.nx);
    const auto ny = static_cast<std::size_t>(d.ny);
    const auto nz = static_cast<std::size_t>(d.nz);

    BinaryMask current = mask;
    std::vector<std::uint8_t> scratch(current.size());
    for (int it = 0; it < iterations; ++it) {
        dilate_axis(current.data(), scratch, nx, 1, ny, nx, nz, nx * ny);
        current.data().swap(scratch);
        dilate_axis(current.data(), scratch, ny, nx, nx, 1, nz, nx * ny);
        current.data().swap(scratch);
        dilate_axis(current.data(), scratch, nz, nx * ny, nx, 1, ny, nx);
        current.data().swap(scratch);
    }
    return current;
}

BinaryMask perilesional_shell(const BinaryMask& lesion, int width) {
    require_input(width >= 1, "shell width must be >= 1");
    BinaryMask grown = dilate(lesion, width);
    for (std::size_t i = 0; i < grown.size(); ++i) {
        if (lesion[i]) grown[i] = 0;
    }
    return grown;
}

double overlap_fraction(const BinaryMask& roi, const BinaryMask& region) {
    require_same_geometry(roi, region, "overlap_fraction");
    std::size_t roi_n = 0, both = 0;
    for (std::size_t i = 0; i < roi.size(); ++i) {
        if (roi[i]) {
            ++roi_n;
            if (region[i]) ++both;
        }
    }
    require_input(roi_n > 0, "overlap_fraction: ROI is empty");
    return static_cast<double>(both) / static_cast<double>(roi_n);
}

} // namespace uqx
