#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cmech {

enum class ChartKind { cotangent, tangent, precontact, symplectic };

/// Ordered coordinate names of a chart.
///
/// Layouts (n configuration variables):
///   cotangent  (q1..qn, p1..pn, z)
///   tangent    (q1..qn, v1..vn, z)
///   precontact (x1..xr, y1..yr, z, u1..us)
///   symplectic (q1..qn, p1..pn)
/// With n = 1 the bare names q, p, v are used.
class Chart {
public:
    static Chart cotangent(std::size_t n);
    static Chart tangent(std::size_t n);
    static Chart symplectic(std::size_t n);
    static Chart precontact(std::size_t r, std::size_t s);

    /// Custom configuration names; momenta become p<name>, velocities v<name>.
    static Chart cotangent(const std::vector<std::string>& config);
    static Chart tangent(const std::vector<std::string>& config);

    ChartKind kind() const { return kind_; }
    std::size_t n() const { return n_; }
    std::size_t s() const { return s_; }
    std::size_t dim() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    std::size_t q(std::size_t i) const { return i; }
    std::size_t p(std::size_t i) const { return n_ + i; }
    std::size_t v(std::size_t i) const { return n_ + i; }
    std::size_t z() const { return 2 * n_; }
    std::size_t u(std::size_t a) const { return 2 * n_ + 1 + a; }

    std::optional<std::size_t> index_of(const std::string& name) const;

    /// The tangent chart sharing this chart's configuration names, and vice versa.
    Chart to_tangent() const;
    Chart to_cotangent() const;

    bool operator==(const Chart& o) const { return kind_ == o.kind_ && names_ == o.names_; }

private:
    Chart(ChartKind kind, std::size_t n, std::size_t s, std::vector<std::string> config,
          std::vector<std::string> names);

    ChartKind kind_ = ChartKind::cotangent;
    std::size_t n_ = 0;
    std::size_t s_ = 0;
    std::vector<std::string> config_;
    std::vector<std::string> names_;
};

}  // namespace cmech
