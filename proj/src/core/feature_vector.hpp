#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace uqx {

// Ordered list of named feature values. Missing values (e.g. a feature group
// whose ROI was degenerate) are carried as empty optionals and become empty
// CSV cells downstream. Names follow <roi>__<group>__<stat>.
class FeatureVector {
public:
    void push(std::string name, double value) { items_.emplace_back(std::move(name), value); }

    void push_missing(std::string name) { items_.emplace_back(std::move(name), std::nullopt); }

    void append(const FeatureVector& other) {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }

    std::size_t size() const { return items_.size(); }

    const std::string& name(std::size_t i) const { return items_[i].first; }
    const std::optional<double>& value(std::size_t i) const { return items_[i].second; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(items_.size());
        for (const auto& [n, v] : items_) out.push_back(n);
        return out;
    }

    std::optional<double> find(const std::string& name) const {
        for (const auto& [n, v] : items_)
            if (n == name) return v;
        throw InputError("feature not present: " + name);
    }

private:
    std::vector<std::pair<std::string, std::optional<double>>> items_;
};

} // namespace uqx
