#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cmech/field.hpp"

namespace cmech {

// ==================== pointwise calculus ====================

/// X(f) = grad f . X
template <class T>
T directional(const ScalarField& f, const VectorField& X, std::span<const T> x) {
    auto g = gradient(f, x);
    auto v = X(x);
    return dot(g, v);
}

/// [X, Y] = DY.X - DX.Y
template <class T>
std::vector<T> lie_bracket(const VectorField& X, const VectorField& Y, std::span<const T> x) {
    auto jx = jacobian(X, x);
    auto jy = jacobian(Y, x);
    auto vx = X(x);
    auto vy = Y(x);
    auto a = jy * vx;
    auto b = jx * vy;
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

/// Lazily evaluated bracket field.
VectorField lie_bracket_field(const VectorField& X, const VectorField& Y);

/// Divergence sum_i dX^i/dx^i.
template <class T>
T divergence(const VectorField& X, std::span<const T> x) {
    auto j = jacobian(X, x);
    T s(0.0);
    for (std::size_t i = 0; i < j.rows(); ++i) s += j(i, i);
    return s;
}

// ==================== integration ====================

enum class Method { rk4, euler };

/// Sampled solution. Row k holds the state at times[k] = k * dt.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::string> names;
};

/// Fixed-step integration of x' = X(x) over [0, t_end].
/// Rows = floor(t_end / dt) + 1. Raises NonFinite on NaN/inf, DomainError stamped with time.
Trajectory integrate(const VectorField& X, std::span<const double> x0, double dt, double t_end,
                     Method method = Method::rk4, std::vector<std::string> names = {});

/// CSV with header "t,<names>" and 17 significant digits, LF line endings.
void write_csv(std::ostream& os, const Trajectory& traj);
std::string to_csv(const Trajectory& traj);

/// Shortest round-trip decimal for a double ("%.17g").
std::string format_double(double v);

}  // namespace cmech
