#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>

namespace cmech {

/// Forward-mode dual number carrying one tangent direction.
/// Nesting (Dual<Dual<double>>) gives higher derivatives, one seeded direction per level.
template <class T>
struct Dual {
    T val{};
    T eps{};

    constexpr Dual() = default;
    constexpr Dual(T v, T e) : val(std::move(v)), eps(std::move(e)) {}

    template <class U>
        requires std::is_constructible_v<T, const U&>
    constexpr Dual(const U& v) : val(v), eps(0.0) {}  // NOLINT: implicit lift of constants

    Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
    Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
    Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
    Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

template <class T> struct dual_depth { static constexpr int value = 0; };
template <class T> struct dual_depth<Dual<T>> { static constexpr int value = 1 + dual_depth<T>::value; };
template <class T> inline constexpr int dual_depth_v = dual_depth<T>::value;

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

inline double primal(double x) { return x; }
template <class T> double primal(const Dual<T>& x) { return primal(x.val); }

// ==================== arithmetic ====================

template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.eps}; }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.val + b.val, a.eps + b.eps}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.val - b.val, a.eps - b.eps}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.val * b.val, a.val * b.eps + a.eps * b.val};
}
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T inv = T(1.0) / b.val;
    T q = a.val * inv;
    return {q, (a.eps - q * b.eps) * inv};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.val + b, a.eps}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.val, b.eps}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.val - b, a.eps}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.val, -b.eps}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.val * b, a.eps * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.val, a * b.eps}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.val / b, a.eps / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

// ==================== elementary functions ====================

template <class T> Dual<T> sin(const Dual<T>& a) {
    using std::sin; using std::cos;
    return {sin(a.val), cos(a.val) * a.eps};
}
template <class T> Dual<T> cos(const Dual<T>& a) {
    using std::sin; using std::cos;
    return {cos(a.val), -(sin(a.val) * a.eps)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    T e = exp(a.val);
    return {e, e * a.eps};
}
template <class T> Dual<T> log(const Dual<T>& a) {
    using std::log;
    return {log(a.val), a.eps / a.val};
}
template <class T> Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.val);
    return {s, a.eps / (2.0 * s)};
}
template <class T> Dual<T> tanh(const Dual<T>& a) {
    using std::tanh;
    T t = tanh(a.val);
    return {t, (1.0 - t * t) * a.eps};
}
/// Derivative at the kink is taken as zero.
template <class T> Dual<T> abs(const Dual<T>& a) {
    double s = primal(a.val) > 0.0 ? 1.0 : (primal(a.val) < 0.0 ? -1.0 : 0.0);
    using std::abs;
    return {abs(a.val), s * a.eps};
}
/// Constant real exponent.
template <class T> Dual<T> pow(const Dual<T>& a, double c) {
    using std::pow;
    if (c == 0.0) return Dual<T>(1.0);
    if (c == 1.0) return a;
    return {pow(a.val, c), c * pow(a.val, c - 1.0) * a.eps};
}
/// Variable exponent; requires a positive base.
template <class T> Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
    using std::exp; using std::log;
    return exp(b * log(a));
}

}  // namespace cmech
