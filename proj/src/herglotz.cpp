#include "cmech/herglotz.hpp"

#include <cmath>
#include <numbers>

namespace cmech {

LagrangianSystem LagrangianSystem::build(const Expr& L, const Chart& chart, const Points& probes) {
    if (L.variables() != chart.names()) throw ConfigError("lagrangian", "expression variables do not match the chart");
    LagrangianSystem sys;
    sys.L_ = L;
    sys.chart_ = chart;
    Points pts = probes.empty() ? random_points(chart.dim()) : probes;
    sys.hessian_rank_ = chart.n();
    for (const auto& x : pts) {
        auto w = sys.W(std::span<const double>(x));
        if (std::abs(determinant(w)) <= 1e-10) sys.regular_ = false;
        sys.hessian_rank_ = std::min(sys.hessian_rank_, numerical_rank(w));
    }
    return sys;
}

LagrangianSystem LagrangianSystem::build(const Expr& L, std::size_t n) { return build(L, Chart::tangent(n)); }

std::vector<double> LagrangianSystem::inverse_legendre_velocity(std::span<const double> y) const {
    const std::size_t n = chart_.n();
    std::vector<double> x(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) x[n + i] = y[n + i];  // start from v = p
    for (int it = 0; it < 50; ++it) {
        auto g = dL(std::span<const double>(x));
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = g[n + i] - y[n + i];
        if (max_abs(r) < 1e-12) {
            return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(n),
                                       x.begin() + static_cast<std::ptrdiff_t>(2 * n));
        }
        auto d = solve_w(W(std::span<const double>(x)), r);
        for (std::size_t i = 0; i < n; ++i) x[n + i] -= d[i];
    }
    throw NewtonDivergence("inverse Legendre map", std::vector<double>(x.begin(), x.end()));
}

ScalarField LagrangianSystem::lagrangian_field() const { return scalar_field(L_); }

ScalarField LagrangianSystem::energy_field() const {
    return ScalarField(dim(), 1, [s = *this](auto x) { return s.energy(x); });
}

CovectorField LagrangianSystem::eta_field() const {
    return CovectorField(dim(), dim(), [s = *this](auto x) { return s.eta(x); });
}

VectorField LagrangianSystem::reeb_field() const {
    return VectorField(dim(), dim(), [s = *this](auto x) { return s.reeb(x); });
}

VectorField LagrangianSystem::euler_lagrange_field() const {
    if (!regular_) throw SingularLagrangian("Lagrangian is singular; no unique Euler-Lagrange field");
    return VectorField(dim(), dim(), [s = *this](auto x) { return s.euler_lagrange(x); });
}

ScalarField LagrangianSystem::hamiltonian_field() const {
    return ScalarField(dim(), 1, [s = *this](auto y) {
        auto x = s.inverse_legendre(y);
        using T = std::remove_const_t<typename decltype(y)::value_type>;
        return s.energy(std::span<const T>(x));
    });
}

ContactStructure LagrangianSystem::contact() const { return ContactStructure::from_form(chart_, eta_field()); }

VectorField euler_lagrange_vf(const LagrangianSystem& sys) { return sys.euler_lagrange_field(); }

std::vector<double> legendre(const LagrangianSystem& sys, std::span<const double> x) { return sys.legendre(x); }

double legendre_equivalence_residual(const LagrangianSystem& sys, std::span<const double> x) {
    auto y = sys.legendre(x);
    HamiltonianSystem hs{canonical_contact(sys.n()), sys.hamiltonian_field()};
    auto xh = hamiltonian_vector(hs.structure, hs.H, std::span<const double>(y));
    auto xi = sys.euler_lagrange(x);
    auto push = directional_vec_of([&](auto z) { return sys.legendre(z); }, x, std::span<const double>(xi));
    double r = 0.0;
    for (std::size_t i = 0; i < push.size(); ++i) r = std::max(r, std::abs(push[i] - xh[i]));
    return r;
}

double pullback_residual(const LagrangianSystem& sys, std::span<const double> x) {
    auto y = sys.legendre(x);
    auto eta = canonical_contact(sys.n()).eta(std::span<const double>(y));
    auto J = jacobian_of([&](auto z) { return sys.legendre(z); }, x);
    auto pulled = transpose_times(J, std::span<const double>(eta));
    auto el = sys.eta(x);
    double r = 0.0;
    for (std::size_t k = 0; k < el.size(); ++k) r = std::max(r, std::abs(pulled[k] - el[k]));
    return r;
}

// ==================== action functional ====================

namespace {

std::vector<std::vector<double>> path_velocities(const ConfigPath& path) {
    const std::size_t m = path.q.size();
    if (m < 3) throw ConfigError("path", "at least three samples are required");
    const double h = (path.b - path.a) / static_cast<double>(m - 1);
    const std::size_t n = path.q.front().size();
    std::vector<std::vector<double>> v(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        v[0][i] = (-3.0 * path.q[0][i] + 4.0 * path.q[1][i] - path.q[2][i]) / (2.0 * h);
        v[m - 1][i] = (3.0 * path.q[m - 1][i] - 4.0 * path.q[m - 2][i] + path.q[m - 3][i]) / (2.0 * h);
        for (std::size_t k = 1; k + 1 < m; ++k) v[k][i] = (path.q[k + 1][i] - path.q[k - 1][i]) / (2.0 * h);
    }
    return v;
}

}  // namespace

double herglotz_action(const LagrangianSystem& sys, const ConfigPath& path, double c) {
    const std::size_t n = sys.n();
    const std::size_t m = path.q.size();
    auto v = path_velocities(path);
    const double h = (path.b - path.a) / static_cast<double>(m - 1);
    std::vector<double> x(2 * n + 1);
    // State at t_k + w h: nodes for w = 0, 1 and cubic Hermite interpolation at w = 1/2.
    auto rate = [&](std::size_t k0, double w, double z) {
        for (std::size_t i = 0; i < n; ++i) {
            const double q0 = path.q[k0][i], q1 = path.q[k0 + 1][i];
            const double v0 = v[k0][i], v1 = v[k0 + 1][i];
            if (w == 0.0) {
                x[i] = q0;
                x[n + i] = v0;
            } else if (w == 1.0) {
                x[i] = q1;
                x[n + i] = v1;
            } else {
                x[i] = 0.5 * (q0 + q1) + h * (v0 - v1) / 8.0;
                x[n + i] = 1.5 * (q1 - q0) / h - 0.25 * (v0 + v1);
            }
        }
        x[2 * n] = z;
        return sys.L(std::span<const double>(x));
    };
    double z = c;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        double k1 = rate(k, 0.0, z);
        double k2 = rate(k, 0.5, z + 0.5 * h * k1);
        double k3 = rate(k, 0.5, z + 0.5 * h * k2);
        double k4 = rate(k, 1.0, z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

double critical_point_residual(const LagrangianSystem& sys, const ConfigPath& path, double c, std::size_t count,
                               std::uint64_t seed, double epsilon) {
    Rng rng(seed);
    const std::size_t m = path.q.size();
    const std::size_t n = sys.n();
    double worst = 0.0;
    for (std::size_t trial = 0; trial < count; ++trial) {
        std::vector<std::vector<double>> coeff(n, std::vector<double>(3));
        for (auto& row : coeff)
            for (auto& ck : row) ck = rng.uniform(-1.0, 1.0);
        ConfigPath plus = path, minus = path;
        for (std::size_t k = 0; k < m; ++k) {
            double s = static_cast<double>(k) / static_cast<double>(m - 1);
            for (std::size_t i = 0; i < n; ++i) {
                double d = 0.0;
                for (std::size_t j = 0; j < 3; ++j)
                    d += coeff[i][j] * std::sin(static_cast<double>(j + 1) * std::numbers::pi * s);
                plus.q[k][i] += epsilon * d;
                minus.q[k][i] -= epsilon * d;
            }
        }
        double da = (herglotz_action(sys, plus, c) - herglotz_action(sys, minus, c)) / (2.0 * epsilon);
        worst = std::max(worst, std::abs(da));
    }
    return worst;
}

}  // namespace cmech
