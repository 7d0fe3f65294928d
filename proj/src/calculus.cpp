#include "cmech/calculus.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace cmech {

// ==================== fields from expressions ====================

ScalarField scalar_field(const Expr& e) {
    return ScalarField(e.variables().size(), 1, [e](auto x) { return e.eval(x); });
}

namespace {
template <class Field>
Field array_field(const std::vector<Expr>& components) {
    std::size_t dim = components.empty() ? 0 : components.front().variables().size();
    return Field(dim, components.size(), [components](auto x) {
        using T = typename decltype(x)::value_type;
        std::vector<std::remove_const_t<T>> out;
        out.reserve(components.size());
        for (const auto& c : components) out.push_back(c.eval(x));
        return out;
    });
}
}  // namespace

VectorField vector_field(const std::vector<Expr>& components) { return array_field<VectorField>(components); }
CovectorField covector_field(const std::vector<Expr>& components) { return array_field<CovectorField>(components); }
ConstraintMap constraint_map(const std::vector<Expr>& components) { return array_field<ConstraintMap>(components); }

VectorField constant_vector_field(std::size_t dim, std::vector<double> value) {
    std::size_t out = value.size();
    return VectorField(dim, out, [value](auto x) {
        using T = std::remove_const_t<typename decltype(x)::value_type>;
        return lift<T>(value);
    });
}

VectorField lie_bracket_field(const VectorField& X, const VectorField& Y) {
    return VectorField(X.dim(), X.dim(), [X, Y](auto x) { return lie_bracket(X, Y, x); });
}

// ==================== integration ====================

namespace {

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& k) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * k[i];
    return y;
}

}  // namespace

Trajectory integrate(const VectorField& X, std::span<const double> x0, double dt, double t_end, Method method,
                     std::vector<std::string> names) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error("integrate: dt must be positive and t_end non-negative");
    const std::size_t steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    Trajectory traj;
    traj.dt = dt;
    traj.names = std::move(names);
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    std::vector<double> x(x0.begin(), x0.end());
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    auto f = [&](const std::vector<double>& y) { return X(std::span<const double>(y)); };
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k - 1) * dt;
        try {
            if (method == Method::euler) {
                x = axpy(x, dt, f(x));
            } else {
                auto k1 = f(x);
                auto k2 = f(axpy(x, 0.5 * dt, k1));
                auto k3 = f(axpy(x, 0.5 * dt, k2));
                auto k4 = f(axpy(x, dt, k3));
                for (std::size_t i = 0; i < x.size(); ++i)
                    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        } catch (DomainError& e) {
            e.time = t;
            e.step = k;
            throw;
        }
        for (double v : x)
            if (!std::isfinite(v)) throw NonFinite(static_cast<double>(k) * dt, k);
        traj.times.push_back(static_cast<double>(k) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t";
    const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().size();
    for (std::size_t i = 0; i < dim; ++i)
        os << "," << (i < traj.names.size() ? traj.names[i] : "x" + std::to_string(i + 1));
    os << "\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        os << format_double(traj.times[k]);
        for (double v : traj.states[k]) os << "," << format_double(v);
        os << "\n";
    }
}

std::string to_csv(const Trajectory& traj) {
    std::ostringstream os;
    write_csv(os, traj);
    return os.str();
}

}  // namespace cmech
