#include "feature_extract.hpp"

#include "first_order.hpp"
#include "glcm.hpp"
#include "shape_features.hpp"

namespace uqx {

const char* const kQualityColumnNames[13] = {
    "cjv",     "cnr",       "efc",       "fber",     "fwhm_avg", "inu_med", "inu_range",
    "qi_2",    "snr_csf",   "snr_gm",    "snr_total", "snr_wm",  "summary_bg_mad",
};

const char* const kDemographicColumnNames[5] = {
    "age", "sex_male", "sex_female", "disease_duration", "edss",
};

std::vector<std::string> patient_column_names() {
    std::vector<std::string> out;
    for (const char* n : kQualityColumnNames) out.push_back(std::string("patient__quality__") + n);
    for (const char* n : kDemographicColumnNames)
        out.push_back(std::string("patient__demographics__") + n);
    return out;
}

namespace {

template <typename Fn>
void push_group(FeatureVector& out, const std::string& prefix,
                std::span<const char* const> stat_names, Fn&& compute) {
    try {
        out.append(compute());
    } catch (const InputError&) {
        for (const char* n : stat_names) out.push_missing(prefix + "__" + n);
    }
}

} // namespace

FeatureVector extract_lesion_features(const RoiContext& ctx, double iou_adj_value,
                                      const FeatureVector& patient_cols) {
    require_input(foreground_count(ctx.lesion) > 0, "extract_lesion_features: lesion is empty");

    FeatureVector out;
    push_group(out, "lesion__intensity", kFirstOrderStatNames,
               [&] { return first_order_stats(ctx.image, ctx.lesion, "lesion__intensity"); });
    push_group(out, "perilesional__intensity", kFirstOrderStatNames, [&] {
        return first_order_stats(ctx.image, ctx.perilesional, "perilesional__intensity");
    });
    push_group(out, "pred__intensity", kFirstOrderStatNames,
               [&] { return first_order_stats(ctx.image, ctx.whole_pred, "pred__intensity"); });
    push_group(out, "lesion__texture", kGlcmFeatureNames,
               [&] { return glcm_features(glcm(ctx.image, ctx.lesion), "lesion__texture"); });
    push_group(out, "perilesional__texture", kGlcmFeatureNames, [&] {
        return glcm_features(glcm(ctx.image, ctx.perilesional), "perilesional__texture");
    });
    push_group(out, "lesion__shape", kShapeFeatureNames,
               [&] { return shape_features(ctx.lesion, "lesion__shape"); });

    try {
        out.append(location_features(ctx.lesion, ctx.atlas, ctx.regions, ctx.gm,
                                     "lesion__location"));
    } catch (const InputError&) {
        for (const auto& r : ctx.regions) out.push_missing("lesion__location__" + r.column);
        out.push_missing("lesion__location__gm_overlap");
    }

    out.push("lesion__quality__iou_adj", iou_adj_value);

    const std::vector<std::string> expected = patient_column_names();
    require_input(patient_cols.size() == expected.size(),
                  "patient column vector has unexpected length");
    for (std::size_t i = 0; i < expected.size(); ++i)
        require_input(patient_cols.name(i) == expected[i],
                      "patient column name mismatch: " + patient_cols.name(i));
    out.append(patient_cols);
    return out;
}

std::vector<std::string> lesion_feature_names(std::span<const AtlasRegion> regions) {
    std::vector<std::string> names;
    for (const char* n : kFirstOrderStatNames) names.push_back(std::string("lesion__intensity__") + n);
    for (const char* n : kFirstOrderStatNames)
        names.push_back(std::string("perilesional__intensity__") + n);
    for (const char* n : kFirstOrderStatNames) names.push_back(std::string("pred__intensity__") + n);
    for (const char* n : kGlcmFeatureNames) names.push_back(std::string("lesion__texture__") + n);
    for (const char* n : kGlcmFeatureNames)
        names.push_back(std::string("perilesional__texture__") + n);
    for (const char* n : kShapeFeatureNames) names.push_back(std::string("lesion__shape__") + n);
    for (const auto& r : regions) names.push_back("lesion__location__" + r.column);
    names.push_back("lesion__location__gm_overlap");
    names.push_back("lesion__quality__iou_adj");
    for (const auto& n : patient_column_names()) names.push_back(n);
    return names;
}

} // namespace uqx
