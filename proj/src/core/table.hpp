#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace uqx {

struct RowId {
    std::string dataset_id;
    std::string subject_id;
    std::int64_t lesion_id = 0;
};

// Per-lesion feature rows with an uncertainty target. Cells may be missing
// (empty CSV cells); the target is always observed. The CSV layout is
//   dataset_id,subject_id,lesion_id,<feature columns...>,lsu
// with floats rendered as shortest round-trip decimals so identical tables
// are identical bytes.
class FeatureTable {
public:
    std::vector<RowId> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> cells; // [row][column]
    std::vector<double> target;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }

    std::size_t column_index(const std::string& name) const;
    bool fully_observed() const;
    void check_consistent() const;
};

FeatureTable read_feature_csv(const std::string& path);
void write_feature_csv(const FeatureTable& table, const std::string& path);
std::string feature_csv_text(const FeatureTable& table);

// Shortest round-trip decimal rendering used for every float the library
// writes (CSV cells, JSON via explicit formatting).
std::string format_double(double v);

// Fills missing cells from the k nearest rows in the jointly observed
// feature subspace; distance sqrt(D/|S| * sum_{j in S} (a_j-b_j)^2) scales
// for the observed-column count. Neighbours must observe the target column
// and share at least one observed column; ties break on row index; rows
// with no usable neighbour fall back to the column mean of observed values.
FeatureTable knn_impute(const FeatureTable& table, int k = 5);

// Drops feature columns with population variance below the threshold.
// Requires a fully observed table (run after imputation).
FeatureTable variance_filter(const FeatureTable& table, double threshold = 1e-6);

struct StandardizationParams {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Z-scores every feature column with population statistics. Requires a
// fully observed table with strictly positive column variances.
std::pair<FeatureTable, StandardizationParams> standardize(const FeatureTable& table);

// Projects the table onto the named columns, in the given order.
FeatureTable select_columns(const FeatureTable& table, std::span<const std::string> names);

} // namespace uqx
