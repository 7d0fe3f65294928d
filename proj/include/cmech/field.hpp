#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cmech/dual.hpp"
#include "cmech/errors.hpp"
#include "cmech/expr.hpp"
#include "cmech/linalg.hpp"

namespace cmech {

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

/// Deepest scalar a type-erased field can be evaluated on.
inline constexpr int max_field_depth = 4;

template <class T>
inline constexpr bool field_scalar_v = std::is_same_v<T, double> || std::is_same_v<T, D1> ||
                                       std::is_same_v<T, D2> || std::is_same_v<T, D3> || std::is_same_v<T, D4>;

template <class T> using ScalarOut = T;
template <class T> using ArrayOut = std::vector<T>;

namespace detail {

template <template <class> class Out>
struct FieldConcept {
    virtual ~FieldConcept() = default;
    virtual Out<double> eval(std::span<const double>) const = 0;
    virtual Out<D1> eval(std::span<const D1>) const = 0;
    virtual Out<D2> eval(std::span<const D2>) const = 0;
    virtual Out<D3> eval(std::span<const D3>) const = 0;
    virtual Out<D4> eval(std::span<const D4>) const = 0;
};

template <template <class> class Out, class F>
struct FieldModel final : FieldConcept<Out> {
    explicit FieldModel(F f) : fn(std::move(f)) {}
    Out<double> eval(std::span<const double> x) const override { return fn(x); }
    Out<D1> eval(std::span<const D1> x) const override { return fn(x); }
    Out<D2> eval(std::span<const D2> x) const override { return fn(x); }
    Out<D3> eval(std::span<const D3> x) const override { return fn(x); }
    Out<D4> eval(std::span<const D4> x) const override { return fn(x); }
    F fn;
};

}  // namespace detail

/// Type-erased smooth map on a chart, evaluable on doubles and nested duals up to
/// `max_field_depth`. Built from a generic callable `f(std::span<const T>)`.
template <template <class> class Out, class Tag>
class BasicField {
public:
    BasicField() = default;

    template <class F>
    BasicField(std::size_t dim, std::size_t out_dim, F f)
        : dim_(dim), out_dim_(out_dim),
          impl_(std::make_shared<detail::FieldModel<Out, std::decay_t<F>>>(std::move(f))) {}

    template <class T>
    Out<T> operator()(std::span<const T> x) const {
        static_assert(field_scalar_v<T>, "field evaluated beyond the supported derivative depth");
        return impl_->eval(x);
    }
    template <class T>
    Out<T> operator()(const std::vector<T>& x) const { return (*this)(std::span<const T>(x)); }

    std::size_t dim() const { return dim_; }
    std::size_t out_dim() const { return out_dim_; }
    bool valid() const { return static_cast<bool>(impl_); }

private:
    std::size_t dim_ = 0;
    std::size_t out_dim_ = 0;
    std::shared_ptr<const detail::FieldConcept<Out>> impl_;
};

struct ScalarTag;
struct VectorTag;
struct CovectorTag;
struct ConstraintTag;

using ScalarField = BasicField<ScalarOut, ScalarTag>;
using VectorField = BasicField<ArrayOut, VectorTag>;
using CovectorField = BasicField<ArrayOut, CovectorTag>;
using ConstraintMap = BasicField<ArrayOut, ConstraintTag>;

// ==================== generic differentiation ====================

/// True while one more dual level stays within the type-erased depth budget.
template <class T>
inline constexpr bool can_lift_v = field_scalar_v<Dual<T>>;

/// Gradient of a generic scalar callable at x, one forward pass per direction.
template <class T, class F>
std::vector<T> gradient_of(F&& f, std::span<const T> x) {
    if constexpr (!can_lift_v<T>) {
        throw DerivativeDepthExceeded("derivative depth exceeded");
    } else {
        std::vector<Dual<T>> xd(x.begin(), x.end());
        std::vector<T> g(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            xd[k].eps = T(1.0);
            g[k] = f(std::span<const Dual<T>>(xd)).eps;
            xd[k].eps = T(0.0);
        }
        return g;
    }
}

/// Jacobian J(i,k) = d f_i / d x_k of a generic array-valued callable.
template <class T, class F>
Matrix<T> jacobian_of(F&& f, std::span<const T> x) {
    if constexpr (!can_lift_v<T>) {
        throw DerivativeDepthExceeded("derivative depth exceeded");
    } else {
        std::vector<Dual<T>> xd(x.begin(), x.end());
        Matrix<T> j;
        for (std::size_t k = 0; k < x.size(); ++k) {
            xd[k].eps = T(1.0);
            auto y = f(std::span<const Dual<T>>(xd));
            xd[k].eps = T(0.0);
            if (k == 0) j = Matrix<T>(y.size(), x.size());
            for (std::size_t i = 0; i < y.size(); ++i) j(i, k) = y[i].eps;
        }
        return j;
    }
}

/// Derivative of a generic scalar callable along direction v at x.
template <class T, class F>
T directional_of(F&& f, std::span<const T> x, std::span<const T> v) {
    if constexpr (!can_lift_v<T>) {
        throw DerivativeDepthExceeded("derivative depth exceeded");
    } else {
        std::vector<Dual<T>> xd(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xd[i] = Dual<T>(x[i], v[i]);
        return f(std::span<const Dual<T>>(xd)).eps;
    }
}

/// Derivative of a generic array-valued callable along direction v at x.
template <class T, class F>
std::vector<T> directional_vec_of(F&& f, std::span<const T> x, std::span<const T> v) {
    if constexpr (!can_lift_v<T>) {
        throw DerivativeDepthExceeded("derivative depth exceeded");
    } else {
        std::vector<Dual<T>> xd(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xd[i] = Dual<T>(x[i], v[i]);
        auto y = f(std::span<const Dual<T>>(xd));
        std::vector<T> out(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i].eps;
        return out;
    }
}

template <class T, template <class> class Out, class Tag>
std::vector<T> gradient(const BasicField<Out, Tag>& f, std::span<const T> x) {
    static_assert(std::is_same_v<Out<T>, T>, "gradient requires a scalar field");
    return gradient_of([&](auto y) { return f(y); }, x);
}
template <class T, template <class> class Out, class Tag>
std::vector<T> gradient(const BasicField<Out, Tag>& f, const std::vector<T>& x) {
    return gradient(f, std::span<const T>(x));
}

template <class T, template <class> class Out, class Tag>
Matrix<T> jacobian(const BasicField<Out, Tag>& f, std::span<const T> x) {
    return jacobian_of([&](auto y) { return f(y); }, x);
}
template <class T, template <class> class Out, class Tag>
Matrix<T> jacobian(const BasicField<Out, Tag>& f, const std::vector<T>& x) {
    return jacobian(f, std::span<const T>(x));
}

// ==================== constructors from expressions ====================

ScalarField scalar_field(const Expr& e);
VectorField vector_field(const std::vector<Expr>& components);
CovectorField covector_field(const std::vector<Expr>& components);
ConstraintMap constraint_map(const std::vector<Expr>& components);

/// Constant field returning the same array everywhere.
VectorField constant_vector_field(std::size_t dim, std::vector<double> value);

}  // namespace cmech
