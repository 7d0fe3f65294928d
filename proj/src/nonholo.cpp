#include "cmech/nonholo.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace cmech {

// ==================== linear constraints ====================

LinearConstraints::LinearConstraints(const Chart& tangent, const std::vector<std::vector<std::string>>& phi)
    : chart_(tangent) {
    if (tangent.kind() != ChartKind::tangent) throw ConfigError("constraints", "constraints live on a tangent chart");
    std::vector<std::string> config(tangent.names().begin(),
                                    tangent.names().begin() + static_cast<std::ptrdiff_t>(tangent.n()));
    for (std::size_t a = 0; a < phi.size(); ++a) {
        if (phi[a].size() != tangent.n())
            throw ConfigError("constraints[" + std::to_string(a) + "]", "one coefficient per configuration variable");
        std::vector<Expr> row;
        for (const auto& c : phi[a]) row.push_back(parse(c, config));
        phi_.push_back(std::move(row));
    }
}

std::vector<std::size_t> LinearConstraints::dependent_columns(const Matrix<double>& m) {
    const std::size_t n = m.cols();
    Matrix<double> rev(n, m.rows());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < m.rows(); ++a) rev(i, a) = m(a, n - 1 - i);
    auto idx = independent_rows(rev);
    if (idx.size() != m.rows()) throw RankDeficient("constraint coefficients lose rank");
    std::vector<std::size_t> cols;
    for (auto i : idx) cols.push_back(n - 1 - i);
    std::sort(cols.begin(), cols.end());
    return cols;
}

ScalarField LinearConstraints::constraint_field(std::size_t a) const {
    return ScalarField(chart_.dim(), 1, [c = *this, a](auto x) { return c.values(x)[a]; });
}

std::vector<double> LinearConstraints::lifted_form(std::size_t a, std::span<const double> x) const {
    auto m = coefficients(x);
    std::vector<double> f(chart_.dim(), 0.0);
    for (std::size_t i = 0; i < n(); ++i) f[i] = m(a, i);
    return f;
}

std::vector<std::vector<double>> LinearConstraints::lifted_distribution(std::span<const double> x) const {
    const std::size_t d = chart_.dim();
    std::vector<std::vector<double>> out;
    for (const auto& q : null_space(coefficients(x))) {
        std::vector<double> e(d, 0.0);
        std::copy(q.begin(), q.end(), e.begin());
        out.push_back(e);
    }
    for (std::size_t i = n(); i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        out.push_back(e);
    }
    return out;
}

// ==================== nonholonomic systems ====================

NonholonomicSystem::NonholonomicSystem(LagrangianSystem sys, LinearConstraints constraints, const Points& probes)
    : sys_(std::move(sys)), c_(std::move(constraints)), j_(sys_.contact()) {
    if (!sys_.regular()) throw SingularHessian("Lagrangian is singular");
    if (!(c_.chart() == sys_.chart())) throw ConfigError("constraints", "constraint chart differs from the Lagrangian chart");
    const Points pts = probes.empty() ? random_points(dim(), 20) : probes;
    const std::size_t n = sys_.n();
    for (const auto& p : pts) {
        auto w = sys_.W(std::span<const double>(p));
        Eigen::MatrixXd m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = w(i, j);
        Eigen::LLT<Eigen::MatrixXd> pos(m), neg(-m);
        if (pos.info() != Eigen::Success && neg.info() != Eigen::Success) {
            definite_ = false;
            warnings_.push_back("W is not definite at a probe; relying on the regularity of C");
            break;
        }
    }
}

VectorField NonholonomicSystem::dynamics_field() const {
    return VectorField(dim(), dim(), [s = *this](auto x) { return s.dynamics(x); });
}

VectorField NonholonomicSystem::reeb_field() const {
    return VectorField(dim(), dim(), [s = *this](auto x) { return s.reeb(x); });
}

ZCValues za_and_c(const NonholonomicSystem& nh, std::span<const double> x) {
    ZCValues out{nh.Z(x), nh.C(x)};
    if (nh.k() > 0 && std::abs(determinant(out.C)) <= 1e-10) throw SingularC("C matrix is singular");
    return out;
}

Projectors projectors(const NonholonomicSystem& nh, std::span<const double> x) {
    auto q = nh.Q(x);
    return {Matrix<double>::identity(nh.dim()) - q, q};
}

ScalarField nh_bracket_field(const NonholonomicSystem& nh, const ScalarField& f, const ScalarField& g) {
    return ScalarField(nh.dim(), 1, [nh, f, g](auto x) { return nh_bracket(nh, f, g, x); });
}

VectorField constrained_hvf(const NonholonomicSystem& nh, const ScalarField& H) {
    return VectorField(nh.dim(), nh.dim(), [nh, H](auto x) { return constrained_hamiltonian_vector(nh, H, x); });
}

ConstrainedHvfReport constrained_hvf_report(const NonholonomicSystem& nh, const ScalarField& H,
                                            std::span<const double> x) {
    ConstrainedHvfReport rep;
    rep.value = constrained_hamiltonian_vector(nh, H, x);
    const auto& s = nh.jacobi().contact();
    auto P = nh.P(x);
    auto Q = Matrix<double>::identity(nh.dim()) - P;
    auto dH = gradient(H, x);
    const double h = H(x);
    auto rd = nh.reeb(x);
    const double rdh = dot(rd, dH);

    auto pdh = transpose_times(P, std::span<const double>(dH));
    auto ii = P * s.sharp(std::span<const double>(pdh), x);
    for (std::size_t i = 0; i < ii.size(); ++i) ii[i] -= (rdh + h) * rd[i];

    auto xh = hamiltonian_vector(s, H, x);
    auto qdh = transpose_times(Q, std::span<const double>(dH));
    auto corr = nh.jacobi().sharp_lambda(std::span<const double>(qdh), x);
    std::vector<double> iii(xh.size());
    for (std::size_t i = 0; i < xh.size(); ++i) iii[i] = xh[i] - corr[i];
    iii = P * iii;

    for (std::size_t i = 0; i < rep.value.size(); ++i) {
        rep.form_ii = std::max(rep.form_ii, std::abs(rep.value[i] - ii[i]));
        rep.form_iii = std::max(rep.form_iii, std::abs(rep.value[i] - iii[i]));
    }
    rep.eta_residual = std::abs(dot(nh.lagrangian().eta(x), rep.value) + h);
    return rep;
}

IntegrabilityReport integrability_report(const NonholonomicSystem& nh, const std::vector<ScalarField>& observables,
                                         const Points& points) {
    IntegrabilityReport rep;
    const auto& c = nh.constraints();
    const std::size_t n = c.n();
    for (const auto& p : points) {
        std::span<const double> x(p);
        auto gens = c.generators(x);
        std::vector<Matrix<double>> jac;
        for (std::size_t a = 0; a < gens.size(); ++a)
            jac.push_back(jacobian_of([&](auto y) { return c.generators(y)[a]; }, x));
        auto m = c.coefficients(x);
        for (std::size_t a = 0; a < gens.size(); ++a) {
            for (std::size_t b = a + 1; b < gens.size(); ++b) {
                std::vector<double> br(n, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) br[i] += gens[a][j] * jac[b](i, j) - gens[b][j] * jac[a](i, j);
                for (std::size_t r = 0; r < c.k(); ++r) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < n; ++i) v += m(r, i) * br[i];
                    rep.involutivity = std::max(rep.involutivity, std::abs(v));
                }
            }
        }
    }
    const std::size_t m = observables.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t l = j + 1; l < m; ++l) {
                const auto &f = observables[i], &g = observables[j], &h = observables[l];
                auto gh = nh_bracket_field(nh, g, h);
                auto hf = nh_bracket_field(nh, h, f);
                auto fg = nh_bracket_field(nh, f, g);
                for (const auto& p : points) {
                    std::span<const double> x(p);
                    const double jac = nh_bracket(nh, f, gh, x) + nh_bracket(nh, g, hf, x) + nh_bracket(nh, h, fg, x);
                    rep.jacobiator = std::max(rep.jacobiator, std::abs(jac));
                }
            }
    return rep;
}

namespace {

std::vector<double> q_gamma_lie(const NonholonomicSystem& nh, std::span<const double> x) {
    const auto& sys = nh.lagrangian();
    return lie_derivative_of_form(
        nh.jacobi().contact(),
        [&](auto y) {
            auto g = sys.euler_lagrange(y);
            return nh.Q(y) * g;
        },
        x);
}

}  // namespace

double nh_dissipation_residual(const NonholonomicSystem& nh, std::span<const double> x) {
    const auto& sys = nh.lagrangian();
    auto lhs = lie_derivative_of_form(nh.jacobi().contact(), [&](auto y) { return nh.dynamics(y); }, x);
    auto dE = gradient_of([&](auto y) { return sys.energy(y); }, x);
    const double re = dot(dE, sys.reeb(x));
    auto eta = sys.eta(x);
    auto corr = q_gamma_lie(nh, x);
    double r = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k) r = std::max(r, std::abs(lhs[k] + re * eta[k] + corr[k]));
    return r;
}

double nh_correction_pairing(const NonholonomicSystem& nh, std::span<const double> x) {
    auto corr = q_gamma_lie(nh, x);
    double r = 0.0;
    for (const auto& y : nh.constraints().lifted_distribution(x)) r = std::max(r, std::abs(dot(corr, y)));
    return r;
}

Points constraint_probes(const NonholonomicSystem& nh, std::size_t count, std::uint64_t seed) {
    const std::size_t n = nh.lagrangian().n();
    Points pts = random_points(nh.dim(), count, seed);
    for (auto& p : pts) {
        std::span<const double> x(p);
        auto K = kernel_projector(nh.constraints().coefficients(x));
        std::vector<double> v(p.begin() + static_cast<std::ptrdiff_t>(n), p.begin() + static_cast<std::ptrdiff_t>(2 * n));
        auto w = K * v;
        std::copy(w.begin(), w.end(), p.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return pts;
}

}  // namespace cmech
