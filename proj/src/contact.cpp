#include "cmech/contact.hpp"

#include <algorithm>
#include <cmath>

namespace cmech {

ContactStructure ContactStructure::canonical(std::size_t n) {
    if (n == 0) throw Error("canonical contact structure needs n >= 1");
    ContactStructure s;
    s.chart_ = Chart::cotangent(n);
    s.canonical_ = true;
    return s;
}

ContactStructure ContactStructure::from_form(Chart chart, CovectorField eta) {
    ContactStructure s;
    s.chart_ = std::move(chart);
    s.canonical_ = false;
    s.eta_ = std::move(eta);
    return s;
}

CovectorField ContactStructure::eta_field() const {
    return CovectorField(dim(), dim(), [s = *this](auto x) { return s.eta(x); });
}

VectorField ContactStructure::reeb_field() const {
    return VectorField(dim(), dim(), [s = *this](auto x) { return s.reeb(x); });
}

ContactStructure canonical_contact(std::size_t n) { return ContactStructure::canonical(n); }

JacobiStructure jacobi_tensor(const ContactStructure& s) { return JacobiStructure(s); }

ScalarField bracket_field(const JacobiStructure& j, const ScalarField& f, const ScalarField& g) {
    return ScalarField(j.contact().dim(), 1, [j, f, g](auto x) { return jacobi_bracket(j, f, g, x); });
}

VectorField hamiltonian_vf(const HamiltonianSystem& sys) {
    const std::size_t d = sys.structure.dim();
    return VectorField(d, d, [s = sys.structure, H = sys.H](auto x) { return hamiltonian_vector(s, H, x); });
}

VectorField hamiltonian_vf_lambda(const HamiltonianSystem& sys) {
    const std::size_t d = sys.structure.dim();
    return VectorField(d, d,
                       [s = sys.structure, H = sys.H](auto x) { return hamiltonian_vector_lambda(s, H, x); });
}

VectorField hamiltonian_vf_flat(const HamiltonianSystem& sys) {
    const std::size_t d = sys.structure.dim();
    return VectorField(d, d, [s = sys.structure, H = sys.H](auto x) { return hamiltonian_vector_flat(s, H, x); });
}

VectorField evolution_vf(const ScalarField& H, std::size_t n) {
    return VectorField(2 * n + 1, 2 * n + 1, [H, n](auto x) {
        using T = std::remove_const_t<typename decltype(x)::value_type>;
        auto dH = gradient(H, x);
        std::vector<T> X(2 * n + 1, T(0.0));
        for (std::size_t i = 0; i < n; ++i) {
            X[i] = dH[n + i];
            X[n + i] = -dH[i];
        }
        X[2 * n] = T(1.0);
        return X;
    });
}

VectorField symplectic_vf(const ScalarField& H, std::size_t n) {
    return VectorField(2 * n, 2 * n, [H, n](auto x) {
        using T = std::remove_const_t<typename decltype(x)::value_type>;
        auto dH = gradient(H, x);
        std::vector<T> X(2 * n, T(0.0));
        for (std::size_t i = 0; i < n; ++i) {
            X[i] = dH[n + i];
            X[n + i] = -dH[i];
        }
        return X;
    });
}

DissipationReport dissipation_report(const HamiltonianSystem& sys, std::span<const double> x) {
    const auto& s = sys.structure;
    DissipationReport rep;
    auto X = hamiltonian_vector(s, sys.H, x);
    auto dH = gradient(sys.H, x);
    auto r = s.reeb(x);
    const double h = sys.H(x);
    rep.reeb_h = dot(dH, r);
    rep.energy_rate = dot(dH, X);
    rep.r1 = rep.energy_rate + rep.reeb_h * h;

    auto LX = lie_derivative_of_form(s, [&](auto y) { return hamiltonian_vector(s, sys.H, y); }, x);
    auto e = s.eta(x);
    rep.r2.resize(LX.size());
    for (std::size_t k = 0; k < LX.size(); ++k) rep.r2[k] = LX[k] + rep.reeb_h * e[k];

    auto J = jacobian_of([&](auto y) { return hamiltonian_vector(s, sys.H, y); }, x);
    double div = 0.0;
    for (std::size_t i = 0; i < J.rows(); ++i) div += J(i, i);
    rep.r3 = div + static_cast<double>(s.n() + 1) * rep.reeb_h;
    return rep;
}

std::string to_string(SubmanifoldKind k) {
    switch (k) {
        case SubmanifoldKind::isotropic: return "isotropic";
        case SubmanifoldKind::coisotropic: return "coisotropic";
        case SubmanifoldKind::legendrian: return "legendrian";
        case SubmanifoldKind::none: return "none";
    }
    return "none";
}

SubmanifoldReport submanifold_classify(const ContactStructure& s, const std::vector<ScalarField>& constraints,
                                       std::span<const double> x, double tol) {
    const std::size_t d = s.dim();
    const std::size_t k = constraints.size();
    for (const auto& phi : constraints)
        if (std::abs(phi(x)) > 1e-9) throw NotOnSubmanifold("point does not satisfy the constraints");

    Matrix<double> dphi(k, d);
    for (std::size_t a = 0; a < k; ++a) {
        auto g = gradient(constraints[a], x);
        dphi.set_row(a, std::span<const double>(g));
    }
    if (numerical_rank(dphi) != k) throw RankDeficient("constraint differentials are dependent");

    JacobiStructure j(s);
    Matrix<double> Z(d, k);  // columns Z_a = ♯_Λ(dφ_a)
    for (std::size_t a = 0; a < k; ++a) {
        auto row = dphi.row(a);
        auto za = j.sharp_lambda(std::span<const double>(row), x);
        Z.set_col(a, std::span<const double>(za));
    }

    SubmanifoldReport rep;
    rep.dimension = d - k;
    Matrix<double> zphi = dphi * Z;  // (b, a) = dφ_b(Z_a)
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t a = 0; a < k; ++a) rep.coisotropic_residual = std::max(rep.coisotropic_residual, std::abs(zphi(b, a)));

    // Tangent basis of N and its distance to span{Z_a}.
    auto tangent = null_space(dphi);
    auto e = s.eta(x);
    for (const auto& t : tangent) {
        rep.horizontal_residual = std::max(rep.horizontal_residual, std::abs(dot(e, t)));
        auto coeff = pseudo_solve(Z, std::span<const double>(t));
        auto proj = Z * coeff;
        for (std::size_t i = 0; i < d; ++i)
            rep.isotropic_residual = std::max(rep.isotropic_residual, std::abs(t[i] - proj[i]));
    }

    bool coiso = rep.coisotropic_residual < tol;
    bool iso = rep.isotropic_residual < tol;
    if (coiso && rep.dimension == s.n() && rep.horizontal_residual < tol) rep.kind = SubmanifoldKind::legendrian;
    else if (coiso) rep.kind = SubmanifoldKind::coisotropic;
    else if (iso) rep.kind = SubmanifoldKind::isotropic;
    else rep.kind = SubmanifoldKind::none;
    return rep;
}

}  // namespace cmech
