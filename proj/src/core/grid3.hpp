#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace uqx {

struct Dims3 {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }

    bool operator==(const Dims3&) const = default;
};

struct Spacing3 {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    double voxel_volume() const { return sx * sy * sz; }

    bool operator==(const Spacing3&) const = default;
};

enum class Connectivity : int {
    c6 = 6,
    c18 = 18,
    c26 = 26,
};

// Dense 3D raster in x-fastest order: flat index = x + nx*(y + ny*z).
// Spacing is in millimetres per voxel along each axis.
template <typename T>
class Grid3 {
public:
    Grid3() = default;

    Grid3(Dims3 dims, Spacing3 spacing, T fill = T{})
        : dims_(dims), spacing_(spacing), data_(checked_count(dims), fill) {
        check_spacing(spacing);
    }

    Grid3(Dims3 dims, Spacing3 spacing, std::vector<T> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        check_spacing(spacing);
        require_input(data_.size() == checked_count(dims),
                      "grid data length does not match dims");
    }

    const Dims3& dims() const { return dims_; }
    const Spacing3& spacing() const { return spacing_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims_.nx) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(z));
    }

    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && x < dims_.nx && y >= 0 && y < dims_.ny && z >= 0 && z < dims_.nz;
    }

    T& at(int x, int y, int z) { return data_[index(x, y, z)]; }
    const T& at(int x, int y, int z) const { return data_[index(x, y, z)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    // Inverse of index(); used by geometry code that walks flat indices.
    void coords(std::size_t i, int& x, int& y, int& z) const {
        const auto nx = static_cast<std::size_t>(dims_.nx);
        const auto ny = static_cast<std::size_t>(dims_.ny);
        x = static_cast<int>(i % nx);
        y = static_cast<int>((i / nx) % ny);
        z = static_cast<int>(i / (nx * ny));
    }

private:
    static std::size_t checked_count(const Dims3& dims) {
        require_input(dims.nx >= 1 && dims.ny >= 1 && dims.nz >= 1,
                      "grid dims must be >= 1 along every axis");
        return dims.count();
    }

    static void check_spacing(const Spacing3& s) {
        require_input(s.sx > 0.0 && s.sy > 0.0 && s.sz > 0.0,
                      "voxel spacing must be strictly positive");
    }

    Dims3 dims_;
    Spacing3 spacing_;
    std::vector<T> data_;
};

using Volume = Grid3<float>;
using BinaryMask = Grid3<std::uint8_t>;
using LabelMap = Grid3<std::int32_t>;

template <typename A, typename B>
void require_same_geometry(const Grid3<A>& a, const Grid3<B>& b, const std::string& what) {
    require_input(a.dims() == b.dims() && a.spacing() == b.spacing(),
                  what + ": grids must share dims and spacing");
}

inline void require_finite(const Volume& v, const std::string& what) {
    for (float x : v.data()) {
        require_input(std::isfinite(x), what + ": volume contains non-finite values");
    }
}

inline void require_binary(const BinaryMask& m, const std::string& what) {
    for (std::uint8_t x : m.data()) {
        require_input(x <= 1, what + ": mask values must be 0 or 1");
    }
}

inline std::size_t foreground_count(const BinaryMask& m) {
    std::size_t n = 0;
    for (std::uint8_t x : m.data()) n += x;
    return n;
}

} // namespace uqx
