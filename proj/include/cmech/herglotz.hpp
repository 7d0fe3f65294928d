#pragma once

#include <cstdint>
#include <vector>

#include "cmech/contact.hpp"
#include "cmech/probe.hpp"

namespace cmech {

/// Contact Lagrangian L(q, v, z) on the tangent chart (q1..qn, v1..vn, z).
///
///   W_ij = ∂²L/∂v^i∂v^j,  E_L = v^i ∂L/∂v^i − L,  η_L = dz − (∂L/∂v^i) dq^i,
///   R_L = ∂z − W^{ij} (∂²L/∂v^j∂z) ∂v^i.
class LagrangianSystem {
public:
    /// Regularity is probed at `probes` (default: 20 seeded points in [-2, 2]^dim).
    static LagrangianSystem build(const Expr& L, const Chart& chart, const Points& probes = {});
    static LagrangianSystem build(const Expr& L, std::size_t n);

    const Expr& lagrangian() const { return L_; }
    const Chart& chart() const { return chart_; }
    std::size_t n() const { return chart_.n(); }
    std::size_t dim() const { return chart_.dim(); }
    /// |det W| > 1e-10 at every probe.
    bool regular() const { return regular_; }
    /// Smallest numerical rank of W over the probes.
    std::size_t hessian_rank() const { return hessian_rank_; }

    template <class T>
    T L(std::span<const T> x) const { return L_.eval(x); }

    template <class T>
    std::vector<T> dL(std::span<const T> x) const { return grad(L_, x); }

    template <class T>
    Matrix<T> W(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto h = hess(L_, x);
        Matrix<T> w(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w(i, j) = h(n + i, n + j);
        return w;
    }

    template <class T>
    T energy(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto g = dL(x);
        T e = -L(x);
        for (std::size_t i = 0; i < n; ++i) e += x[n + i] * g[n + i];
        return e;
    }

    template <class T>
    std::vector<T> eta(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto g = dL(x);
        std::vector<T> e(dim(), T(0.0));
        for (std::size_t i = 0; i < n; ++i) e[i] = -g[n + i];
        e[2 * n] = T(1.0);
        return e;
    }

    template <class T>
    std::vector<T> reeb(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto h = hess(L_, x);
        Matrix<T> w(n, n);
        std::vector<T> lvz(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) w(i, j) = h(n + i, n + j);
            lvz[i] = h(n + i, 2 * n);
        }
        auto c = solve_w(w, lvz);
        std::vector<T> r(dim(), T(0.0));
        for (std::size_t i = 0; i < n; ++i) r[n + i] = -c[i];
        r[2 * n] = T(1.0);
        return r;
    }

    /// ξ_L = v^i ∂q^i + B^i ∂v^i + L ∂z with W B = L_q + L_v L_z − L_vq v − L_vz L.
    template <class T>
    std::vector<T> euler_lagrange(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto g = dL(x);
        auto h = hess(L_, x);
        T l = L(x);
        Matrix<T> w(n, n);
        std::vector<T> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) w(i, j) = h(n + i, n + j);
            T r = g[i] + g[n + i] * g[2 * n] - h(n + i, 2 * n) * l;
            for (std::size_t j = 0; j < n; ++j) r -= h(n + i, j) * x[n + j];
            rhs[i] = r;
        }
        auto b = solve_w(w, rhs);
        std::vector<T> xi(dim());
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = x[n + i];
            xi[n + i] = b[i];
        }
        xi[2 * n] = l;
        return xi;
    }

    /// FL(q, v, z) = (q, ∂L/∂v, z).
    template <class T>
    std::vector<T> legendre(std::span<const T> x) const {
        const std::size_t n = chart_.n();
        auto g = dL(x);
        std::vector<T> y(x.begin(), x.end());
        for (std::size_t i = 0; i < n; ++i) y[n + i] = g[n + i];
        return y;
    }

    /// Velocities v with ∂L/∂v(q, v, z) = p: Newton on doubles, then a few Newton
    /// sweeps in T so derivatives of the implicit map are carried along.
    template <class T>
    std::vector<T> inverse_legendre(std::span<const T> y) const {
        const std::size_t n = chart_.n();
        auto base = primal(y);
        auto v0 = inverse_legendre_velocity(base);
        std::vector<T> x(y.begin(), y.end());
        for (std::size_t i = 0; i < n; ++i) x[n + i] = T(v0[i]);
        for (int sweep = 0; sweep < 3; ++sweep) {
            auto g = dL(std::span<const T>(x));
            auto w = W(std::span<const T>(x));
            std::vector<T> r(n);
            for (std::size_t i = 0; i < n; ++i) r[i] = g[n + i] - y[n + i];
            auto d = lu_solve(w, r);
            for (std::size_t i = 0; i < n; ++i) x[n + i] -= d[i];
        }
        return x;
    }

    /// Newton solve for the velocity at a cotangent point (tol 1e-12, 50 iterations).
    std::vector<double> inverse_legendre_velocity(std::span<const double> y) const;

    ScalarField lagrangian_field() const;
    ScalarField energy_field() const;
    CovectorField eta_field() const;
    VectorField reeb_field() const;
    /// Throws SingularLagrangian for a singular L.
    VectorField euler_lagrange_field() const;
    /// (T*Q × R, canonical) Hamiltonian H = E_L ∘ FL⁻¹ on the cotangent chart.
    ScalarField hamiltonian_field() const;
    /// η_L as a contact structure on the tangent chart.
    ContactStructure contact() const;

private:
    template <class T>
    std::vector<T> solve_w(const Matrix<T>& w, const std::vector<T>& rhs) const {
        try {
            return lu_solve(w, rhs);
        } catch (const SingularSystem&) {
            throw SingularLagrangian("Hessian in the velocities is singular");
        }
    }

    Expr L_;
    Chart chart_ = Chart::tangent(1);
    bool regular_ = true;
    std::size_t hessian_rank_ = 0;
};

VectorField euler_lagrange_vf(const LagrangianSystem& sys);
std::vector<double> legendre(const LagrangianSystem& sys, std::span<const double> x);

/// ‖T(FL)(ξ_L(x)) − X_H(FL(x))‖∞ with H = E_L ∘ FL⁻¹.
double legendre_equivalence_residual(const LagrangianSystem& sys, std::span<const double> x);

/// ‖FL*η − η_L‖∞ at x.
double pullback_residual(const LagrangianSystem& sys, std::span<const double> x);

// ==================== action functional ====================

/// Configuration path sampled on a uniform grid over [a, b]; q[k] is the n-vector at t_k.
struct ConfigPath {
    double a = 0.0;
    double b = 1.0;
    std::vector<std::vector<double>> q;
};

/// Z(b) for Ż = L(q, q̇, Z), Z(a) = c, with centred-difference velocities and
/// cubic Hermite midpoints for the RK4 stages.
double herglotz_action(const LagrangianSystem& sys, const ConfigPath& path, double c);

/// max |dA(δ)| over `count` seeded perturbations vanishing at the endpoints.
double critical_point_residual(const LagrangianSystem& sys, const ConfigPath& path, double c,
                               std::size_t count = 10, std::uint64_t seed = default_seed, double epsilon = 1e-5);

}  // namespace cmech
