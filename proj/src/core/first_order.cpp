#include "first_order.hpp"

#include <algorithm>
#include <cmath>

namespace uqx {

const char* const kFirstOrderStatNames[18] = {
    "mean",   "median", "variance", "stddev",  "skewness", "kurtosis",
    "minimum", "maximum", "range",   "p10",     "p90",      "iqr",
    "energy", "entropy", "mad",      "rmad",    "rms",      "uniformity",
};

double percentile_sorted(const std::vector<double>& sorted, double p) {
    require_input(!sorted.empty(), "percentile of empty sample");
    require_input(p >= 0.0 && p <= 100.0, "percentile rank must be in [0, 100]");
    if (sorted.size() == 1) return sorted[0];
    const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FeatureVector first_order_stats(const Volume& image, const BinaryMask& roi,
                                const std::string& prefix) {
    require_same_geometry(image, roi, "first_order_stats");

    std::vector<double> values;
    for (std::size_t i = 0; i < roi.size(); ++i)
        if (roi[i]) values.push_back(static_cast<double>(image[i]));
    require_input(!values.empty(), "first_order_stats: ROI is empty");

    const auto n = static_cast<double>(values.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double v : values) {
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        abs_dev += std::abs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double variance = m2;
    const double stddev = std::sqrt(variance);
    const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double minimum = sorted.front();
    const double maximum = sorted.back();
    const double median = percentile_sorted(sorted, 50.0);
    const double p10 = percentile_sorted(sorted, 10.0);
    const double p90 = percentile_sorted(sorted, 90.0);
    const double iqr = percentile_sorted(sorted, 75.0) - percentile_sorted(sorted, 25.0);

    // Mean absolute deviation restricted to the p10..p90 intensity window.
    double robust_sum = 0.0;
    std::size_t robust_n = 0;
    for (double v : sorted) {
        if (v >= p10 && v <= p90) {
            robust_sum += v;
            ++robust_n;
        }
    }
    double rmad = 0.0;
    if (robust_n > 0) {
        const double robust_mean = robust_sum / static_cast<double>(robust_n);
        double acc = 0.0;
        for (double v : sorted)
            if (v >= p10 && v <= p90) acc += std::abs(v - robust_mean);
        rmad = acc / static_cast<double>(robust_n);
    }

    constexpr int bins = 32;
    double hist[bins] = {};
    const double width = maximum - minimum;
    for (double v : values) {
        int b = 0;
        if (width > 0.0) {
            b = static_cast<int>((v - minimum) / width * bins);
            b = std::clamp(b, 0, bins - 1);
        }
        hist[b] += 1.0;
    }
    double entropy = 0.0, uniformity = 0.0;
    for (double c : hist) {
        if (c == 0.0) continue;
        const double p = c / n;
        entropy -= p * std::log2(p);
        uniformity += p * p;
    }

    const double stats[18] = {
        mean,    median,  variance, stddev,  skewness, kurtosis,
        minimum, maximum, maximum - minimum, p10, p90, iqr,
        sum_sq,  entropy, abs_dev / n, rmad, std::sqrt(sum_sq / n), uniformity,
    };

    FeatureVector out;
    for (int i = 0; i < 18; ++i)
        out.push(prefix + "__" + kFirstOrderStatNames[i], stats[i]);
    return out;
}

} // namespace uqx
