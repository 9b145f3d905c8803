#include "saog/model.hpp"

#include <algorithm>
#include <cmath>

namespace saog {

std::optional<std::array<int, 2>> LocationHistogram::bin_of(double x, double y) const {
    if (!(x >= x_min && x <= x_max && y >= y_min && y <= y_max)) {
        return std::nullopt;
    }
    const auto index = [this](double v, double lo, double hi) {
        const int i = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(i, 0, bins - 1);
    };
    return std::array<int, 2>{index(x, x_min, x_max), index(y, y_min, y_max)};
}

int GrammarSpec::max_objects() const {
    int m = 0;
    for (const auto& c : configs) m = std::max(m, c.objects);
    return m;
}

int GrammarSpec::min_objects() const {
    if (configs.empty()) return 0;
    int m = configs.front().objects;
    for (const auto& c : configs) m = std::min(m, c.objects);
    return m;
}

std::optional<std::size_t> GrammarSpec::config_index(int n_objects) const {
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (configs[i].objects == n_objects) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> GrammarSpec::size_index(const std::string& name) const {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> GrammarSpec::relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < relation_types.size(); ++i) {
        if (relation_types[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<int> GrammarSpec::find_label(const std::string& shape, const std::string& color,
                                           const std::string& material) const {
    for (const auto& l : catalog) {
        if (l.shape == shape && l.color == color && l.material == material) return l.label_index;
    }
    return std::nullopt;
}

void canonicalize_relations(std::vector<Relation>& relations) {
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
}

} // namespace saog
