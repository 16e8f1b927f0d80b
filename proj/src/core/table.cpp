#include "table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace uqx {

std::string format_double(double v) {
    require_input(std::isfinite(v), "cannot format non-finite value");
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, v);
    require_input(res.ec == std::errc() && res.ptr == end,
                  "cannot parse number '" + cell + "' in " + where);
    require_input(std::isfinite(v), "non-finite number in " + where);
    return v;
}

std::int64_t parse_int(const std::string& cell, const std::string& where) {
    std::int64_t v = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, v);
    require_input(res.ec == std::errc() && res.ptr == end,
                  "cannot parse integer '" + cell + "' in " + where);
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::size_t FeatureTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InputError("unknown feature column: " + name);
}

bool FeatureTable::fully_observed() const {
    for (const auto& row : cells)
        for (const auto& cell : row)
            if (!cell) return false;
    return true;
}

void FeatureTable::check_consistent() const {
    require_input(rows.size() == cells.size() && rows.size() == target.size(),
                  "feature table row/cell/target counts disagree");
    for (const auto& row : cells)
        require_input(row.size() == columns.size(), "feature table row width mismatch");
}

FeatureTable read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    require_input(in.good(), "cannot open feature table: " + path);

    std::string line;
    require_input(static_cast<bool>(std::getline(in, line)), "feature table is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_line(line);
    require_input(header.size() >= 5 && header[0] == "dataset_id" && header[1] == "subject_id" &&
                      header[2] == "lesion_id" && header.back() == "lsu",
                  "feature table header must be dataset_id,subject_id,lesion_id,...,lsu: " + path);

    FeatureTable t;
    t.columns.assign(header.begin() + 3, header.end() - 1);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const std::string where = path + ":" + std::to_string(line_no);
        require_input(cells.size() == header.size(), "wrong cell count in " + where);

        RowId id;
        id.dataset_id = cells[0];
        id.subject_id = cells[1];
        id.lesion_id = parse_int(cells[2], where);
        t.rows.push_back(std::move(id));

        std::vector<std::optional<double>> row;
        row.reserve(t.columns.size());
        for (std::size_t i = 3; i + 1 < cells.size(); ++i) {
            if (cells[i].empty()) row.push_back(std::nullopt);
            else row.push_back(parse_double(cells[i], where));
        }
        t.cells.push_back(std::move(row));
        require_input(!cells.back().empty(), "missing lsu value in " + where);
        t.target.push_back(parse_double(cells.back(), where));
    }
    t.check_consistent();
    return t;
}

std::string feature_csv_text(const FeatureTable& table) {
    table.check_consistent();
    std::string out = "dataset_id,subject_id,lesion_id";
    for (const auto& c : table.columns) {
        require_input(c.find(',') == std::string::npos && !c.empty(),
                      "feature column names must be non-empty and comma-free");
        out += ',';
        out += c;
    }
    out += ",lsu\n";

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        out += table.rows[r].dataset_id;
        out += ',';
        out += table.rows[r].subject_id;
        out += ',';
        out += std::to_string(table.rows[r].lesion_id);
        for (const auto& cell : table.cells[r]) {
            out += ',';
            if (cell) out += format_double(*cell);
        }
        out += ',';
        out += format_double(table.target[r]);
        out += '\n';
    }
    return out;
}

void write_feature_csv(const FeatureTable& table, const std::string& path) {
    const std::string text = feature_csv_text(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require_input(out.good(), "cannot open feature table for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    require_input(out.good(), "failed to write feature table: " + path);
}

FeatureTable knn_impute(const FeatureTable& table, int k) {
    table.check_consistent();
    require_input(k >= 1, "knn_impute k must be >= 1");

    const std::size_t n = table.n_rows();
    const std::size_t d = table.n_cols();
    FeatureTable out = table;

    // Column means over observed cells, the fallback when no row qualifies.
    std::vector<std::optional<double>> col_mean(d);
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (table.cells[r][c]) {
                sum += *table.cells[r][c];
                ++cnt;
            }
        }
        if (cnt > 0) col_mean[c] = sum / static_cast<double>(cnt);
    }

    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            if (table.cells[r][c]) continue;

            // (distance, row) pairs over candidate donors.
            std::vector<std::pair<double, std::size_t>> donors;
            for (std::size_t o = 0; o < n; ++o) {
                if (o == r || !table.cells[o][c]) continue;
                double sum_sq = 0.0;
                std::size_t shared = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    if (table.cells[r][j] && table.cells[o][j]) {
                        const double diff = *table.cells[r][j] - *table.cells[o][j];
                        sum_sq += diff * diff;
                        ++shared;
                    }
                }
                if (shared == 0) continue;
                const double dist =
                    std::sqrt(static_cast<double>(d) / static_cast<double>(shared) * sum_sq);
                donors.emplace_back(dist, o);
            }

            if (donors.empty()) {
                require_numeric(col_mean[c].has_value(),
                                "knn_impute: column '" + table.columns[c] +
                                    "' has no observed values to impute from");
                out.cells[r][c] = *col_mean[c];
                continue;
            }

            std::sort(donors.begin(), donors.end());
            const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k), donors.size());
            double sum = 0.0;
            for (std::size_t i = 0; i < use; ++i) sum += *table.cells[donors[i].second][c];
            out.cells[r][c] = sum / static_cast<double>(use);
        }
    }
    return out;
}

FeatureTable variance_filter(const FeatureTable& table, double threshold) {
    table.check_consistent();
    require_input(table.fully_observed(), "variance_filter requires a fully observed table");
    require_input(threshold >= 0.0, "variance threshold must be >= 0");

    const std::size_t n = table.n_rows();
    require_input(n > 0, "variance_filter on an empty table");

    std::vector<std::string> kept;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += *table.cells[r][c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = *table.cells[r][c] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        if (var >= threshold) kept.push_back(table.columns[c]);
    }
    require_numeric(!kept.empty(), "variance filter dropped every column");
    return select_columns(table, kept);
}

std::pair<FeatureTable, StandardizationParams> standardize(const FeatureTable& table) {
    table.check_consistent();
    require_input(table.fully_observed(), "standardize requires a fully observed table");
    const std::size_t n = table.n_rows();
    require_input(n > 0, "standardize on an empty table");

    StandardizationParams params;
    params.columns = table.columns;
    params.mean.resize(table.n_cols());
    params.stddev.resize(table.n_cols());

    FeatureTable out = table;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += *table.cells[r][c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = *table.cells[r][c] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        require_numeric(var > 0.0, "standardize: column '" + table.columns[c] +
                                       "' has zero variance");
        const double sd = std::sqrt(var);
        params.mean[c] = mean;
        params.stddev[c] = sd;
        for (std::size_t r = 0; r < n; ++r)
            out.cells[r][c] = (*table.cells[r][c] - mean) / sd;
    }
    return {std::move(out), std::move(params)};
}

FeatureTable select_columns(const FeatureTable& table, std::span<const std::string> names) {
    table.check_consistent();
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& name : names) idx.push_back(table.column_index(name));

    FeatureTable out;
    out.rows = table.rows;
    out.target = table.target;
    out.columns.assign(names.begin(), names.end());
    out.cells.reserve(table.n_rows());
    for (const auto& row : table.cells) {
        std::vector<std::optional<double>> selected;
        selected.reserve(idx.size());
        for (std::size_t i : idx) selected.push_back(row[i]);
        out.cells.push_back(std::move(selected));
    }
    return out;
}

} // namespace uqx
