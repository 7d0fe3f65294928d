#pragma once

#include <string>
#include <vector>

#include "cmech/calculus.hpp"
#include "cmech/chart.hpp"
#include "cmech/field.hpp"

namespace cmech {

/// Contact form on a chart together with dη, the Reeb field and the musical maps.
///
/// Conventions: dη(u, w) = u^T D w with D(j,k) = ∂_j η_k − ∂_k η_j, and
/// ♭(v) = i_v dη + η(v) η, so (♭v)_k = Σ_j (D(j,k) + η_k η_j) v_j.
class ContactStructure {
public:
    /// Darboux form η = dz − Σ p_i dq^i on the (q, p, z) chart.
    static ContactStructure canonical(std::size_t n);
    /// Arbitrary contact form given as a covector field on `chart`.
    static ContactStructure from_form(Chart chart, CovectorField eta);

    const Chart& chart() const { return chart_; }
    std::size_t dim() const { return chart_.dim(); }
    std::size_t n() const { return chart_.n(); }
    bool is_canonical() const { return canonical_; }

    template <class T>
    std::vector<T> eta(std::span<const T> x) const {
        if (canonical_) {
            const std::size_t n = chart_.n();
            std::vector<T> e(dim(), T(0.0));
            for (std::size_t i = 0; i < n; ++i) e[i] = -x[n + i];
            e[2 * n] = T(1.0);
            return e;
        }
        return eta_(x);
    }

    template <class T>
    Matrix<T> deta(std::span<const T> x) const {
        const std::size_t d = dim();
        Matrix<T> D(d, d);
        if (canonical_) {
            const std::size_t n = chart_.n();
            for (std::size_t i = 0; i < n; ++i) {
                D(i, n + i) = T(1.0);
                D(n + i, i) = T(-1.0);
            }
            return D;
        }
        Matrix<T> J = jacobian(eta_, x);  // J(k, j) = ∂_j η_k
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) D(j, k) = J(k, j) - J(j, k);
        return D;
    }

    template <class T>
    Matrix<T> flat_matrix(std::span<const T> x) const {
        auto e = eta(x);
        auto D = deta(x);
        const std::size_t d = dim();
        Matrix<T> F(d, d);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) F(k, j) = D(j, k) + e[k] * e[j];
        return F;
    }

    template <class T>
    std::vector<T> flat(std::span<const T> v, std::span<const T> x) const {
        return flat_matrix(x) * v;
    }

    template <class T>
    std::vector<T> sharp(std::span<const T> alpha, std::span<const T> x) const {
        return lu_solve(flat_matrix(x), alpha);
    }

    template <class T>
    std::vector<T> reeb(std::span<const T> x) const {
        if (canonical_) {
            std::vector<T> r(dim(), T(0.0));
            r[chart_.z()] = T(1.0);
            return r;
        }
        auto e = eta(x);
        return sharp(std::span<const T>(e), x);
    }

    CovectorField eta_field() const;
    VectorField reeb_field() const;

private:
    Chart chart_ = Chart::cotangent(1);
    bool canonical_ = true;
    CovectorField eta_;
};

ContactStructure canonical_contact(std::size_t n);

template <class T>
std::vector<T> flat(const ContactStructure& s, std::span<const T> v, std::span<const T> x) { return s.flat(v, x); }
template <class T>
std::vector<T> sharp(const ContactStructure& s, std::span<const T> a, std::span<const T> x) { return s.sharp(a, x); }

// ==================== Jacobi structure ====================

/// Λ(α, β) = −dη(♯α, ♯β) and E = −R.
class JacobiStructure {
public:
    explicit JacobiStructure(ContactStructure s) : s_(std::move(s)) {}

    const ContactStructure& contact() const { return s_; }

    template <class T>
    T lambda(std::span<const T> alpha, std::span<const T> beta, std::span<const T> x) const {
        auto a = s_.sharp(alpha, x);
        auto b = s_.sharp(beta, x);
        auto D = s_.deta(x);
        auto Db = D * b;
        return -dot(a, Db);
    }

    /// ♯_Λ(α) = ♯α − α(R) R, so that Λ(α, β) = β(♯_Λ α).
    template <class T>
    std::vector<T> sharp_lambda(std::span<const T> alpha, std::span<const T> x) const {
        auto v = s_.sharp(alpha, x);
        auto r = s_.reeb(x);
        T ar = dot(std::span<const T>(alpha), std::span<const T>(r));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= ar * r[i];
        return v;
    }

    template <class T>
    std::vector<T> E(std::span<const T> x) const {
        auto r = s_.reeb(x);
        for (auto& c : r) c = -c;
        return r;
    }

private:
    ContactStructure s_;
};

JacobiStructure jacobi_tensor(const ContactStructure& s);

/// {f, g} = Λ(df, dg) + f E(g) − g E(f)
template <class T>
T jacobi_bracket(const JacobiStructure& j, const ScalarField& f, const ScalarField& g, std::span<const T> x) {
    auto df = gradient(f, x);
    auto dg = gradient(g, x);
    auto e = j.E(x);
    T fe = f(x), ge = g(x);
    return j.lambda(std::span<const T>(df), std::span<const T>(dg), x) + fe * dot(e, dg) - ge * dot(e, df);
}

ScalarField bracket_field(const JacobiStructure& j, const ScalarField& f, const ScalarField& g);

// ==================== Hamiltonian dynamics ====================

struct HamiltonianSystem {
    ContactStructure structure;
    ScalarField H;
};

/// X_H = ♯_Λ(dH) − H R. On the canonical chart this is evaluated in coordinates:
/// (∂H/∂p_i, −(∂H/∂q^i + p_i ∂H/∂z), p_i ∂H/∂p_i − H).
template <class T>
std::vector<T> hamiltonian_vector(const ContactStructure& s, const ScalarField& H, std::span<const T> x) {
    auto dH = gradient(H, x);
    T h = H(x);
    if (s.is_canonical()) {
        const std::size_t n = s.n();
        std::vector<T> X(2 * n + 1, T(0.0));
        T pHp(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            X[i] = dH[n + i];
            X[n + i] = -(dH[i] + x[n + i] * dH[2 * n]);
            pHp += x[n + i] * dH[n + i];
        }
        X[2 * n] = pHp - h;
        return X;
    }
    JacobiStructure j(s);
    auto X = j.sharp_lambda(std::span<const T>(dH), x);
    auto r = s.reeb(x);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] -= h * r[i];
    return X;
}

/// Same field through the structure maps only: ♯_Λ(dH) − H R (no coordinate shortcut).
template <class T>
std::vector<T> hamiltonian_vector_lambda(const ContactStructure& s, const ScalarField& H, std::span<const T> x) {
    auto dH = gradient(H, x);
    T h = H(x);
    JacobiStructure j(s);
    auto X = j.sharp_lambda(std::span<const T>(dH), x);
    auto r = s.reeb(x);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] -= h * r[i];
    return X;
}

/// Same field from ♭(X_H) = dH − (R(H) + H) η.
template <class T>
std::vector<T> hamiltonian_vector_flat(const ContactStructure& s, const ScalarField& H, std::span<const T> x) {
    auto dH = gradient(H, x);
    auto r = s.reeb(x);
    auto e = s.eta(x);
    T c = dot(dH, r) + H(x);
    for (std::size_t i = 0; i < dH.size(); ++i) dH[i] -= c * e[i];
    return s.sharp(std::span<const T>(dH), x);
}

VectorField hamiltonian_vf(const HamiltonianSystem& sys);
VectorField hamiltonian_vf_lambda(const HamiltonianSystem& sys);
VectorField hamiltonian_vf_flat(const HamiltonianSystem& sys);

/// Cosymplectic evolution field on (q, p, z) with Ω = dq∧dp, η = dz: (∂H/∂p, −∂H/∂q, 1).
VectorField evolution_vf(const ScalarField& H, std::size_t n);

/// Hamilton's equations on the 2n-dimensional (q, p) chart.
VectorField symplectic_vf(const ScalarField& H, std::size_t n);

/// Components of L_X η by Cartan's formula i_X dη + d(η(X)).
/// `X` is a generic callable span<const U> -> vector<U>.
template <class T, class F>
std::vector<T> lie_derivative_of_form(const ContactStructure& s, F&& X, std::span<const T> x) {
    auto v = X(x);
    auto D = s.deta(x);
    std::vector<T> out = transpose_times(D, std::span<const T>(v));
    auto d_eta_x = gradient_of(
        [&](auto y) {
            auto e = s.eta(y);
            auto w = X(y);
            return dot(e, w);
        },
        x);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += d_eta_x[k];
    return out;
}

struct DissipationReport {
    double r1 = 0.0;               // X_H(H) + R(H) H
    std::vector<double> r2;        // L_{X_H} η + R(H) η
    double r3 = 0.0;               // div X_H + (n + 1) R(H)
    double energy_rate = 0.0;      // X_H(H)
    double reeb_h = 0.0;           // R(H)
};

DissipationReport dissipation_report(const HamiltonianSystem& sys, std::span<const double> x);

// ==================== submanifolds ====================

enum class SubmanifoldKind { isotropic, coisotropic, legendrian, none };
std::string to_string(SubmanifoldKind k);

struct SubmanifoldReport {
    SubmanifoldKind kind = SubmanifoldKind::none;
    double coisotropic_residual = 0.0;  // max |Z_a(φ_b)|
    double isotropic_residual = 0.0;    // distance of T_xN from span{Z_a}
    double horizontal_residual = 0.0;   // max |η(t)| over unit tangent basis
    std::size_t dimension = 0;
};

/// Classifies the zero set of `constraints` at x using Z_a = ♯_Λ(dφ_a).
SubmanifoldReport submanifold_classify(const ContactStructure& s, const std::vector<ScalarField>& constraints,
                                       std::span<const double> x, double tol = 1e-8);

}  // namespace cmech
