#include "cmech/symmetry.hpp"

#include <cmath>

namespace cmech {

namespace {

Points probes_or_default(const Points& probes, std::size_t dim) {
    return probes.empty() ? random_points(dim) : probes;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

}  // namespace

// ==================== lifts ====================

BaseField base_field(const Chart& chart, const std::vector<std::string>& Y, const std::string& Zc) {
    BaseField b;
    for (const auto& y : Y) b.Y.push_back(parse(y, chart.names()));
    if (!Zc.empty()) b.Zc = parse(Zc, chart.names());
    return b;
}

VectorField lift(const BaseField& X, const Chart& chart, LiftKind kind) {
    const std::size_t n = chart.n();
    if (X.Y.size() != n) throw ConfigError("lift", "base field needs one component per configuration variable");
    for (const auto& y : X.Y) {
        for (std::size_t i = 0; i < n; ++i)
            if (y.depends_on(chart.v(i))) throw InadmissibleLift("base field depends on velocities");
        if (y.depends_on(chart.z())) throw InadmissibleLift("base field components depend on z");
    }
    if (!X.Zc.empty())
        for (std::size_t i = 0; i < 2 * n; ++i)
            if (X.Zc.depends_on(i)) throw InadmissibleLift("z-component depends on positions or velocities");

    return VectorField(chart.dim(), chart.dim(), [X, n, kind](auto x) {
        using T = std::remove_const_t<typename decltype(x)::value_type>;
        std::vector<T> out(2 * n + 1, T(0.0));
        if (kind == LiftKind::vertical) {
            for (std::size_t i = 0; i < n; ++i) out[n + i] = X.Y[i].eval(x);
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = X.Y[i].eval(x);
            auto g = grad(X.Y[i], x);
            T s(0.0);
            for (std::size_t j = 0; j < n; ++j) s += x[n + j] * g[j];
            out[n + i] = s;
        }
        if (!X.Zc.empty()) out[2 * n] = X.Zc.eval(x);
        return out;
    });
}

// ==================== Noether ====================

ScalarField noether_quantity(const LagrangianSystem& sys, const BaseField& X) {
    const std::size_t n = sys.n();
    return ScalarField(sys.dim(), 1, [sys, X, n](auto x) {
        auto g = sys.dL(x);
        using T = std::remove_const_t<typename decltype(x)::value_type>;
        T f(0.0);
        for (std::size_t i = 0; i < n; ++i) f += X.Y[i].eval(x) * g[n + i];
        return f;
    });
}

NoetherReport noether_check(const LagrangianSystem& sys, const BaseField& X, const Points& probes) {
    auto XC = lift(X, sys.chart(), LiftKind::complete);
    auto f = noether_quantity(sys, X);
    auto L = sys.lagrangian_field();
    auto xi = sys.euler_lagrange_field();
    NoetherReport rep;
    for (const auto& p : probes_or_default(probes, sys.dim())) {
        std::span<const double> x(p);
        rep.residual_a = std::max(rep.residual_a, std::abs(directional(L, XC, x)));
        double lz = sys.dL(x)[sys.chart().z()];
        rep.residual_b = std::max(rep.residual_b, std::abs(directional(f, xi, x) - lz * f(x)));
    }
    rep.is_symmetry = rep.residual_a < 1e-10;
    return rep;
}

double lie_symmetry_residual(const LagrangianSystem& sys, const BaseField& Y, std::span<const double> x) {
    auto YC = lift(Y, sys.chart(), LiftKind::complete)(x);
    auto YV = lift(Y, sys.chart(), LiftKind::vertical)(x);
    auto g = sys.dL(x);
    double lhs = -dot(sys.eta(x), YC);
    double zc = Y.Zc.empty() ? 0.0 : Y.Zc.eval(x);
    return std::abs(lhs - (dot(YV, g) - zc));
}

double conserved_ratio(const LagrangianSystem& sys, const ScalarField& f, const Trajectory& traj) {
    double r0 = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        std::span<const double> x(traj.states[k]);
        double e = sys.energy(x);
        if (std::abs(e) <= 1e-6) throw NearZeroEnergy(traj.times[k], e);
        double r = f(x) / e;
        if (k == 0) r0 = r;
        drift = std::max(drift, std::abs(r - r0));
    }
    return drift;
}

// ==================== dynamical and Cartan symmetries ====================

DynamicalSymmetryReport dynamical_symmetry_residual(const HamiltonianSystem& sys, const VectorField& X,
                                                    const Points& probes) {
    const auto& s = sys.structure;
    auto XH = hamiltonian_vf(sys);
    ScalarField f(s.dim(), 1, [s, X](auto x) { return -dot(s.eta(x), X(x)); });
    JacobiStructure j(s);
    DynamicalSymmetryReport rep;
    for (const auto& p : probes_or_default(probes, s.dim())) {
        std::span<const double> x(p);
        double eb = dot(s.eta(x), lie_bracket(XH, X, x));
        double hf = jacobi_bracket(j, sys.H, f, x);
        rep.bracket_residual = std::max(rep.bracket_residual, std::abs(eb));
        rep.commutation_residual = std::max(rep.commutation_residual, std::abs(hf));
        rep.identity_residual = std::max(rep.identity_residual, std::abs(hf + eb));
    }
    return rep;
}

double energy_bracket(const LagrangianSystem& sys, const ScalarField& f, std::span<const double> x) {
    auto xi = sys.euler_lagrange(x);
    auto r = sys.reeb(x);
    auto df = gradient(f, x);
    auto dE = gradient_of([&](auto y) { return sys.energy(y); }, x);
    return dot(df, xi) + dot(dE, r) * f(x);
}

CartanReport cartan_symmetry_check(const LagrangianSystem& sys, const VectorField& Y, const ScalarField& a,
                                   const ScalarField& g, const Points& probes) {
    auto s = sys.contact();
    ScalarField diss(sys.dim(), 1, [sys, Y, g](auto x) { return dot(sys.eta(x), Y(x)) - g(x); });
    CartanReport rep;
    for (const auto& p : probes_or_default(probes, sys.dim())) {
        std::span<const double> x(p);
        auto LY = lie_derivative_of_form(s, [&](auto y) { return Y(y); }, x);
        auto e = sys.eta(x);
        auto dg = gradient(g, x);
        const double av = a(x), gv = g(x);
        double r1 = 0.0;
        for (std::size_t k = 0; k < LY.size(); ++k) r1 = std::max(r1, std::abs(LY[k] - av * e[k] - dg[k]));
        rep.residual_1 = std::max(rep.residual_1, r1);

        auto dE = gradient_of([&](auto y) { return sys.energy(y); }, x);
        const double E = sys.energy(x);
        const double RE = dot(dE, sys.reeb(x));
        rep.residual_2 = std::max(rep.residual_2, std::abs(dot(dE, Y(x)) - av * E - gv * RE));
        rep.dissipated_residual = std::max(rep.dissipated_residual, std::abs(energy_bracket(sys, diss, x)));
    }
    return rep;
}

// ==================== momentum map ====================

ScalarField momentum_component(const ContactStructure& s, const VectorField& generator) {
    return ScalarField(s.dim(), 1, [s, generator](auto x) { return -dot(s.eta(x), generator(x)); });
}

MomentumReport momentum_map(const ActionGenerators& gen, const ContactStructure& s, std::span<const double> x,
                            const Points& probes) {
    MomentumReport rep;
    for (const auto& xi : gen.fields) {
        for (const auto& p : probes_or_default(probes, s.dim())) {
            auto LX = lie_derivative_of_form(s, [&](auto y) { return xi(y); }, std::span<const double>(p));
            rep.contact_residual = std::max(rep.contact_residual, max_abs(LX));
        }
        if (rep.contact_residual > 1e-8) throw NotContactomorphism("generator does not preserve the contact form");
        auto J = momentum_component(s, xi);
        rep.values.push_back(J(x));
        auto XJ = hamiltonian_vector(s, J, x);
        rep.field_residual = std::max(rep.field_residual, max_abs_diff(XJ, xi(x)));
    }
    return rep;
}

}  // namespace cmech
