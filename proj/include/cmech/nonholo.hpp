#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "cmech/herglotz.hpp"

namespace cmech {

// ==================== linear constraints ====================

/// Linear constraints Φ^a(q, v) = Φ^a_i(q) v^i on a tangent chart; Δ = {Φ^a = 0}.
class LinearConstraints {
public:
    /// `phi[a][i]` are expressions over the configuration names of `tangent`.
    LinearConstraints(const Chart& tangent, const std::vector<std::vector<std::string>>& phi);
    static LinearConstraints none(const Chart& tangent) { return LinearConstraints(tangent, {}); }

    const Chart& chart() const { return chart_; }
    std::size_t k() const { return phi_.size(); }
    std::size_t n() const { return chart_.n(); }

    /// Φ^a_i at the configuration part of x.
    template <class T>
    Matrix<T> coefficients(std::span<const T> x) const {
        Matrix<T> m(k(), n());
        for (std::size_t a = 0; a < k(); ++a)
            for (std::size_t i = 0; i < n(); ++i) m(a, i) = phi_[a][i].eval(x);
        return m;
    }

    /// Φ̄^a(x) = Φ^a_i(q) v^i.
    template <class T>
    std::vector<T> values(std::span<const T> x) const {
        auto m = coefficients(x);
        std::vector<T> out(k(), T(0.0));
        for (std::size_t a = 0; a < k(); ++a)
            for (std::size_t i = 0; i < n(); ++i) out[a] += m(a, i) * x[n() + i];
        return out;
    }

    ScalarField constraint_field(std::size_t a) const;
    /// Φ̃^a = Φ^a_i dq^i as a covector on the full chart.
    std::vector<double> lifted_form(std::size_t a, std::span<const double> x) const;
    /// Vectors on the full chart whose q-part lies in Δ_q: a basis of Δ^l at x.
    std::vector<std::vector<double>> lifted_distribution(std::span<const double> x) const;

    /// Generators of Δ on Q from solving for the last independent columns: X_α = e_α − B⁻¹A e_α.
    template <class T>
    std::vector<std::vector<T>> generators(std::span<const T> x) const {
        auto m = coefficients(x);
        std::vector<std::vector<T>> out;
        const std::size_t kk = k(), nn = n();
        if (kk == 0) {
            for (std::size_t i = 0; i < nn; ++i) {
                std::vector<T> e(nn, T(0.0));
                e[i] = T(1.0);
                out.push_back(e);
            }
            return out;
        }
        auto dep = dependent_columns(primal(m));
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < nn; ++i)
            if (std::find(dep.begin(), dep.end(), i) == dep.end()) free.push_back(i);
        auto B = select_cols(m, dep);
        for (std::size_t f : free) {
            std::vector<T> rhs(kk);
            for (std::size_t a = 0; a < kk; ++a) rhs[a] = m(a, f);
            auto s = lu_solve(B, rhs);
            std::vector<T> e(nn, T(0.0));
            e[f] = T(1.0);
            for (std::size_t a = 0; a < kk; ++a) e[dep[a]] = -s[a];
            out.push_back(e);
        }
        return out;
    }

private:
    static std::vector<std::size_t> dependent_columns(const Matrix<double>& m);

    Chart chart_ = Chart::tangent(1);
    std::vector<std::vector<Expr>> phi_;
};

// ==================== nonholonomic systems ====================

/// Regular contact Lagrangian with linear constraints and the splitting S ⊕ T(Δ × R).
///
///   Z_a = −W^{ik} Φ^a_k ∂v^i,  C_ab = dΦ̄^b(Z_a),  Q(Y) = C^{ba} dΦ̄^b(Y) Z_a,  P = id − Q.
class NonholonomicSystem {
public:
    /// Throws SingularHessian for a singular L. Definiteness of W is probed at `probes`.
    NonholonomicSystem(LagrangianSystem sys, LinearConstraints constraints, const Points& probes = {});

    const LagrangianSystem& lagrangian() const { return sys_; }
    const LinearConstraints& constraints() const { return c_; }
    const JacobiStructure& jacobi() const { return j_; }
    std::size_t dim() const { return sys_.dim(); }
    std::size_t k() const { return c_.k(); }
    bool definite() const { return definite_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Rows are the components of Z_a on the full chart.
    template <class T>
    Matrix<T> Z(std::span<const T> x) const {
        const std::size_t n = sys_.n();
        auto w = sys_.W(x);
        auto m = c_.coefficients(x);
        Matrix<T> z(k(), dim());
        if (k() == 0) return z;
        LU<T> lu = factor_w(w);
        for (std::size_t a = 0; a < k(); ++a) {
            auto row = m.row(a);
            auto s = lu.solve(std::span<const T>(row));
            for (std::size_t i = 0; i < n; ++i) z(a, n + i) = -s[i];
        }
        return z;
    }

    /// C_ab = −W^{ik} Φ^b_k Φ^a_i.
    template <class T>
    Matrix<T> C(std::span<const T> x) const {
        auto z = Z(x);
        auto d = constraint_differentials(x);
        return z * transpose(d);
    }

    /// Rows dΦ̄^b on the full chart.
    template <class T>
    Matrix<T> constraint_differentials(std::span<const T> x) const {
        return jacobian_of([&](auto y) { return c_.values(y); }, x);
    }

    template <class T>
    Matrix<T> Q(std::span<const T> x) const {
        if (k() == 0) return Matrix<T>(dim(), dim());
        auto z = Z(x);
        auto d = constraint_differentials(x);
        auto c = z * transpose(d);
        if (std::abs(primal(determinant(c))) <= 1e-10) throw SingularC("C matrix is singular");
        // Q = Z^T C^{-T} dΦ̄
        return transpose(z) * lu_solve(transpose(c), d);
    }

    template <class T>
    Matrix<T> P(std::span<const T> x) const {
        return Matrix<T>::identity(dim()) - Q(x);
    }

    /// Γ_{L,Δ} = P Γ_L.
    template <class T>
    std::vector<T> dynamics(std::span<const T> x) const {
        auto g = sys_.euler_lagrange(x);
        return P(x) * g;
    }

    /// R_{L,Δ} = P R_L.
    template <class T>
    std::vector<T> reeb(std::span<const T> x) const {
        auto r = sys_.reeb(x);
        return P(x) * r;
    }

    /// Λ_{L,Δ}(α, β) = Λ_L(P*α, P*β).
    template <class T>
    T lambda(std::span<const T> alpha, std::span<const T> beta, std::span<const T> x) const {
        auto p = P(x);
        auto a = transpose_times(p, alpha);
        auto b = transpose_times(p, beta);
        return j_.lambda(std::span<const T>(a), std::span<const T>(b), x);
    }

    /// ♯_{Λ_{L,Δ}}(α) = Λ_{L,Δ}(α, ·) = P ♯_{Λ_L}(P*α).
    template <class T>
    std::vector<T> sharp(std::span<const T> alpha, std::span<const T> x) const {
        auto p = P(x);
        auto a = transpose_times(p, alpha);
        auto s = j_.sharp_lambda(std::span<const T>(a), x);
        return p * s;
    }

    VectorField dynamics_field() const;
    VectorField reeb_field() const;

private:
    template <class T>
    static LU<T> factor_w(const Matrix<T>& w) {
        try {
            return LU<T>(w);
        } catch (const SingularSystem&) {
            throw SingularHessian("Hessian in the velocities is singular");
        }
    }

    LagrangianSystem sys_;
    LinearConstraints c_;
    JacobiStructure j_;
    bool definite_ = true;
    std::vector<std::string> warnings_;
};

struct ZCValues {
    Matrix<double> Z;
    Matrix<double> C;
};

/// Z_a (rows) and C_ab at x. Throws SingularC when |det C| <= 1e-10.
ZCValues za_and_c(const NonholonomicSystem& nh, std::span<const double> x);

struct Projectors {
    Matrix<double> P;
    Matrix<double> Q;
};
Projectors projectors(const NonholonomicSystem& nh, std::span<const double> x);

/// {f, g}_nh = Λ_{L,Δ}(df, dg) − f R_{L,Δ}(g) + g R_{L,Δ}(f).
template <class T>
T nh_bracket(const NonholonomicSystem& nh, const ScalarField& f, const ScalarField& g, std::span<const T> x) {
    auto df = gradient(f, x);
    auto dg = gradient(g, x);
    auto r = nh.reeb(x);
    return nh.lambda(std::span<const T>(df), std::span<const T>(dg), x) - f(x) * dot(r, dg) + g(x) * dot(r, df);
}
ScalarField nh_bracket_field(const NonholonomicSystem& nh, const ScalarField& f, const ScalarField& g);

/// X_H^Δ = ♯_{Λ_{L,Δ}}(dH) − H R_{L,Δ}.
template <class T>
std::vector<T> constrained_hamiltonian_vector(const NonholonomicSystem& nh, const ScalarField& H,
                                              std::span<const T> x) {
    auto dH = gradient(H, x);
    auto v = nh.sharp(std::span<const T>(dH), x);
    auto r = nh.reeb(x);
    T h = H(x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= h * r[i];
    return v;
}
VectorField constrained_hvf(const NonholonomicSystem& nh, const ScalarField& H);

struct ConstrainedHvfReport {
    std::vector<double> value;  // X_H^Δ at x
    double form_ii = 0.0;       // ‖X_H^Δ − [P ♯_L(P* dH) − (R_{L,Δ}(H) + H) R_{L,Δ}]‖∞
    double form_iii = 0.0;      // ‖X_H^Δ − [P X_H − P ♯_{Λ_L}(Q* dH)]‖∞
    double eta_residual = 0.0;  // |η_L(X_H^Δ) + H|
};
ConstrainedHvfReport constrained_hvf_report(const NonholonomicSystem& nh, const ScalarField& H,
                                            std::span<const double> x);

struct IntegrabilityReport {
    double involutivity = 0.0;  // max |Φ^a([X_α, X_β])| over generator pairs and probes
    double jacobiator = 0.0;    // max |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|_nh over triples and probes
};

/// `points` should lie on Δ × R; `observables` are combined in all ordered triples (i < j < l).
IntegrabilityReport integrability_report(const NonholonomicSystem& nh, const std::vector<ScalarField>& observables,
                                         const Points& points);

/// ‖L_{Γ_{L,Δ}} η_L + R_L(E_L) η_L + L_{Q(Γ_L)} η_L‖∞ at x.
double nh_dissipation_residual(const NonholonomicSystem& nh, std::span<const double> x);
/// max |(L_{Q(Γ_L)} η_L)(Y)| over the Δ^l basis at x.
double nh_correction_pairing(const NonholonomicSystem& nh, std::span<const double> x);

/// Points on Δ × R: random (q, z) and velocities projected onto Δ_q (count points in [−2, 2]).
Points constraint_probes(const NonholonomicSystem& nh, std::size_t count = 20, std::uint64_t seed = default_seed);

}  // namespace cmech
