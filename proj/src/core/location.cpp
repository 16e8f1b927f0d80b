#include "location.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

namespace uqx {

std::vector<AtlasRegion> read_atlas_regions(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open atlas region table: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed atlas region table " + path + ": " + e.what());
    }
    require_input(j.is_object() && j.contains("regions") && j["regions"].is_array(),
                  "atlas region table must contain a 'regions' array: " + path);

    std::vector<AtlasRegion> regions;
    std::map<std::int32_t, bool> seen;
    for (const auto& r : j["regions"]) {
        AtlasRegion region;
        try {
            region.id = r.at("id").get<std::int32_t>();
            region.column = r.at("column").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw InputError("atlas region entry missing id/column in " + path + ": " + e.what());
        }
        require_input(region.id >= 1, "atlas region ids must be >= 1: " + path);
        require_input(!seen[region.id], "duplicate atlas region id in " + path);
        seen[region.id] = true;
        regions.push_back(std::move(region));
    }
    require_input(!regions.empty(), "atlas region table is empty: " + path);
    return regions;
}

void write_atlas_regions(const std::vector<AtlasRegion>& regions, const std::string& path) {
    require_input(!regions.empty(), "atlas region table is empty");
    std::map<std::int32_t, bool> seen;
    for (const auto& r : regions) {
        require_input(r.id >= 1, "atlas region ids must be >= 1");
        require_input(!seen[r.id], "duplicate atlas region id");
        seen[r.id] = true;
    }

    nlohmann::ordered_json j;
    j["regions"] = nlohmann::ordered_json::array();
    for (const auto& r : regions) {
        nlohmann::ordered_json e;
        e["id"] = r.id;
        e["column"] = r.column;
        j["regions"].push_back(e);
    }
    std::ofstream out(path, std::ios::trunc);
    require_input(out.good(), "cannot open atlas region table for writing: " + path);
    out << j.dump(2) << "\n";
    require_input(out.good(), "failed to write atlas region table: " + path);
}

FeatureVector location_features(const BinaryMask& roi, const LabelMap& atlas,
                                std::span<const AtlasRegion> regions, const BinaryMask& gm,
                                const std::string& prefix) {
    require_same_geometry(roi, atlas, "location_features");
    require_same_geometry(roi, gm, "location_features");
    require_input(!regions.empty(), "location_features: empty region table");

    std::int32_t max_id = 0;
    for (const auto& r : regions) max_id = std::max(max_id, r.id);

    std::vector<std::uint64_t> per_region(static_cast<std::size_t>(max_id) + 1, 0);
    std::uint64_t roi_n = 0, gm_n = 0;
    for (std::size_t i = 0; i < roi.size(); ++i) {
        if (!roi[i]) continue;
        ++roi_n;
        if (gm[i]) ++gm_n;
        const std::int32_t id = atlas[i];
        if (id >= 1 && id <= max_id) ++per_region[static_cast<std::size_t>(id)];
    }
    require_input(roi_n > 0, "location_features: ROI is empty");

    FeatureVector out;
    for (const auto& r : regions)
        out.push(prefix + "__" + r.column,
                 static_cast<double>(per_region[static_cast<std::size_t>(r.id)]) /
                     static_cast<double>(roi_n));
    out.push(prefix + "__gm_overlap", static_cast<double>(gm_n) / static_cast<double>(roi_n));
    return out;
}

} // namespace uqx
