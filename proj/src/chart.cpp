#include "cmech/chart.hpp"

#include <set>

#include "cmech/errors.hpp"

namespace cmech {

namespace {

std::vector<std::string> default_config(std::size_t n) {
    if (n == 1) return {"q"};
    std::vector<std::string> c;
    for (std::size_t i = 1; i <= n; ++i) c.push_back("q" + std::to_string(i));
    return c;
}

// Momentum / velocity name for a configuration name: q -> p, q3 -> p3, x -> px.
std::string partner(const std::string& cfg, char letter) {
    if (cfg == "q") return std::string(1, letter);
    if (cfg.size() > 1 && cfg[0] == 'q' && cfg.find_first_not_of("0123456789", 1) == std::string::npos)
        return letter + cfg.substr(1);
    return letter + cfg;
}

std::vector<std::string> layout(const std::vector<std::string>& config, char letter, bool with_z) {
    std::vector<std::string> names = config;
    for (const auto& c : config) names.push_back(partner(c, letter));
    if (with_z) names.push_back("z");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw ConfigError("chart", "coordinate names collide");
    return names;
}

}  // namespace

Chart::Chart(ChartKind kind, std::size_t n, std::size_t s, std::vector<std::string> config,
             std::vector<std::string> names)
    : kind_(kind), n_(n), s_(s), config_(std::move(config)), names_(std::move(names)) {}

Chart Chart::cotangent(std::size_t n) { return cotangent(default_config(n)); }
Chart Chart::tangent(std::size_t n) { return tangent(default_config(n)); }

Chart Chart::cotangent(const std::vector<std::string>& config) {
    return Chart(ChartKind::cotangent, config.size(), 0, config, layout(config, 'p', true));
}

Chart Chart::tangent(const std::vector<std::string>& config) {
    return Chart(ChartKind::tangent, config.size(), 0, config, layout(config, 'v', true));
}

Chart Chart::symplectic(std::size_t n) {
    auto config = default_config(n);
    return Chart(ChartKind::symplectic, n, 0, config, layout(config, 'p', false));
}

Chart Chart::precontact(std::size_t r, std::size_t s) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= r; ++i) names.push_back(r == 1 ? "x" : "x" + std::to_string(i));
    for (std::size_t i = 1; i <= r; ++i) names.push_back(r == 1 ? "y" : "y" + std::to_string(i));
    names.push_back("z");
    for (std::size_t a = 1; a <= s; ++a) names.push_back(s == 1 ? "u" : "u" + std::to_string(a));
    std::vector<std::string> config(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(r));
    return Chart(ChartKind::precontact, r, s, config, names);
}

std::optional<std::size_t> Chart::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

Chart Chart::to_tangent() const { return tangent(config_); }
Chart Chart::to_cotangent() const { return cotangent(config_); }

}  // namespace cmech
