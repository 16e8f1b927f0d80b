#include "volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace uqx {

static_assert(std::endian::native == std::endian::little,
              "raster IO assumes a little-endian host");

namespace {

using nlohmann::json;

struct BundleHeader {
    Dims3 dims;
    Spacing3 spacing;
    std::string dtype;
};

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require_input(in.good(), "cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<char> bytes(size);
    in.read(bytes.data(), static_cast<std::streamsize>(size));
    require_input(in.good() || size == 0, "failed to read file: " + path);
    return bytes;
}

void write_file_bytes(const std::string& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require_input(out.good(), "cannot open file for writing: " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    require_input(out.good(), "failed to write file: " + path);
}

BundleHeader read_bundle_header(const std::string& base) {
    const std::string sidecar = base + ".json";
    std::ifstream in(sidecar);
    require_input(in.good(), "cannot open bundle sidecar: " + sidecar);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed bundle sidecar " + sidecar + ": " + e.what());
    }

    BundleHeader h;
    try {
        const auto dims = j.at("dims");
        const auto spacing = j.at("spacing_mm");
        require_input(dims.is_array() && dims.size() == 3, "sidecar dims must have 3 entries");
        require_input(spacing.is_array() && spacing.size() == 3,
                      "sidecar spacing_mm must have 3 entries");
        h.dims = {dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>()};
        h.spacing = {spacing[0].get<double>(), spacing[1].get<double>(),
                     spacing[2].get<double>()};
        h.dtype = j.at("dtype").get<std::string>();
        require_input(j.at("order").get<std::string>() == "x-fastest",
                      "unsupported raster order in " + sidecar);
        require_input(j.at("byte_order").get<std::string>() == "little",
                      "unsupported byte order in " + sidecar);
    } catch (const json::exception& e) {
        throw InputError("bundle sidecar " + sidecar + " is missing fields: " + e.what());
    }
    require_input(h.dtype == "f32" || h.dtype == "u8",
                  "unsupported dtype '" + h.dtype + "' in " + sidecar);
    return h;
}

std::vector<char> read_bundle_payload(const std::string& base, const BundleHeader& h) {
    const std::string raw = base + ".raw";
    std::vector<char> bytes = read_file_bytes(raw);
    const std::size_t unit = h.dtype == "f32" ? 4 : 1;
    require_input(bytes.size() == h.dims.count() * unit,
                  "raw payload size does not match sidecar dims: " + raw);
    return bytes;
}

void write_bundle(const std::string& base, const Dims3& d, const Spacing3& s,
                  const std::string& dtype, const void* data, std::size_t size) {
    nlohmann::ordered_json j;
    j["dims"] = {d.nx, d.ny, d.nz};
    j["spacing_mm"] = {s.sx, s.sy, s.sz};
    j["dtype"] = dtype;
    j["order"] = "x-fastest";
    j["byte_order"] = "little";
    const std::string text = j.dump(2) + "\n";
    write_file_bytes(base + ".json", text.data(), text.size());
    write_file_bytes(base + ".raw", data, size);
}

} // namespace

Volume read_volume_bundle(const std::string& base) {
    const BundleHeader h = read_bundle_header(base);
    const std::vector<char> bytes = read_bundle_payload(base, h);
    std::vector<float> values(h.dims.count());
    if (h.dtype == "f32") {
        std::memcpy(values.data(), bytes.data(), bytes.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = static_cast<float>(static_cast<std::uint8_t>(bytes[i]));
    }
    Volume v(h.dims, h.spacing, std::move(values));
    require_finite(v, base);
    return v;
}

BinaryMask read_mask_bundle(const std::string& base) {
    const BundleHeader h = read_bundle_header(base);
    require_input(h.dtype == "u8", "mask bundle must have dtype u8: " + base);
    const std::vector<char> bytes = read_bundle_payload(base, h);
    std::vector<std::uint8_t> values(h.dims.count());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto b = static_cast<std::uint8_t>(bytes[i]);
        require_input(b <= 1, "mask bundle has values other than 0/1: " + base);
        values[i] = b;
    }
    return BinaryMask(h.dims, h.spacing, std::move(values));
}

LabelMap read_label_bundle(const std::string& base) {
    const BundleHeader h = read_bundle_header(base);
    require_input(h.dtype == "u8", "label bundle must have dtype u8: " + base);
    const std::vector<char> bytes = read_bundle_payload(base, h);
    std::vector<std::int32_t> values(h.dims.count());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<std::uint8_t>(bytes[i]);
    return LabelMap(h.dims, h.spacing, std::move(values));
}

void write_volume_bundle(const Volume& v, const std::string& base) {
    require_finite(v, base);
    write_bundle(base, v.dims(), v.spacing(), "f32", v.data().data(),
                 v.size() * sizeof(float));
}

void write_mask_bundle(const BinaryMask& m, const std::string& base) {
    require_binary(m, base);
    write_bundle(base, m.dims(), m.spacing(), "u8", m.data().data(), m.size());
}

void write_label_bundle(const LabelMap& labels, const std::string& base) {
    std::vector<std::uint8_t> bytes(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::int32_t v = labels[i];
        require_input(v >= 0 && v <= 255, "label bundle supports labels 0..255: " + base);
        bytes[i] = static_cast<std::uint8_t>(v);
    }
    write_bundle(base, labels.dims(), labels.spacing(), "u8", bytes.data(), bytes.size());
}

namespace {

template <typename T>
T read_le(const std::vector<char>& bytes, std::size_t offset) {
    T v;
    std::memcpy(&v, bytes.data() + offset, sizeof(T));
    return v;
}

} // namespace

Volume read_nifti(const std::string& path) {
    constexpr std::size_t header_size = 348;
    constexpr std::int16_t dt_uint8 = 2;
    constexpr std::int16_t dt_float32 = 16;

    const std::vector<char> bytes = read_file_bytes(path);
    require_input(bytes.size() >= header_size, "NIfTI file too short: " + path);
    require_input(read_le<std::int32_t>(bytes, 0) == static_cast<std::int32_t>(header_size),
                  "not a little-endian NIfTI-1 file: " + path);

    const char* magic = bytes.data() + 344;
    require_input(std::memcmp(magic, "n+1", 3) == 0,
                  "only single-file .nii NIfTI-1 is supported: " + path);

    const auto rank = read_le<std::int16_t>(bytes, 40);
    require_input(rank == 3, "NIfTI volume must be 3D: " + path);
    Dims3 dims{read_le<std::int16_t>(bytes, 42), read_le<std::int16_t>(bytes, 44),
               read_le<std::int16_t>(bytes, 46)};
    require_input(dims.nx >= 1 && dims.ny >= 1 && dims.nz >= 1,
                  "NIfTI dims must be >= 1: " + path);

    const auto datatype = read_le<std::int16_t>(bytes, 70);
    require_input(datatype == dt_uint8 || datatype == dt_float32,
                  "unsupported NIfTI datatype (need uint8 or float32): " + path);

    Spacing3 spacing{read_le<float>(bytes, 80), read_le<float>(bytes, 84),
                     read_le<float>(bytes, 88)};
    require_input(spacing.sx > 0 && spacing.sy > 0 && spacing.sz > 0,
                  "NIfTI pixdim must be strictly positive: " + path);

    const auto vox_offset = static_cast<std::size_t>(read_le<float>(bytes, 108));
    require_input(vox_offset >= header_size, "NIfTI vox_offset below header size: " + path);

    const std::size_t count = dims.count();
    const std::size_t unit = datatype == dt_float32 ? 4 : 1;
    require_input(bytes.size() >= vox_offset + count * unit,
                  "NIfTI payload truncated: " + path);

    std::vector<float> values(count);
    if (datatype == dt_float32) {
        std::memcpy(values.data(), bytes.data() + vox_offset, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i)
            values[i] =
                static_cast<float>(static_cast<std::uint8_t>(bytes[vox_offset + i]));
    }
    Volume v(dims, spacing, std::move(values));
    require_finite(v, path);
    return v;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string bundle_base(const std::string& path) {
    if (has_suffix(path, ".json")) return path.substr(0, path.size() - 5);
    return path;
}

} // namespace

Volume read_volume_auto(const std::string& path) {
    if (has_suffix(path, ".nii")) return read_nifti(path);
    return read_volume_bundle(bundle_base(path));
}

BinaryMask read_mask_auto(const std::string& path) {
    if (has_suffix(path, ".nii")) {
        const Volume v = read_nifti(path);
        std::vector<std::uint8_t> values(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            require_input(v[i] == 0.0f || v[i] == 1.0f,
                          "mask NIfTI has values other than 0/1: " + path);
            values[i] = v[i] != 0.0f ? 1 : 0;
        }
        return BinaryMask(v.dims(), v.spacing(), std::move(values));
    }
    return read_mask_bundle(bundle_base(path));
}

} // namespace uqx
