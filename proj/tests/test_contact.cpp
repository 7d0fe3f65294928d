#include "doctest.h"

#include <cmath>

#include "cmech/contact.hpp"
#include "cmech/probe.hpp"

using namespace cmech;

namespace {

const std::vector<std::string> kQPZ = {"q", "p", "z"};

ScalarField sf(const std::string& s, const std::vector<std::string>& vars) { return scalar_field(parse(s, vars)); }

std::span<const double> sp(const std::vector<double>& v) { return std::span<const double>(v); }

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ScalarField product(const ScalarField& f, const ScalarField& g) {
    return ScalarField(f.dim(), 1, [f, g](auto x) { return f(x) * g(x); });
}

}  // namespace

TEST_CASE("canonical contact form, differential and Reeb field") {
    auto s = canonical_contact(1);
    std::vector<double> x = {1.0, 2.0, 0.5};
    CHECK(s.eta(sp(x)) == std::vector<double>{-2.0, 0.0, 1.0});
    CHECK(s.reeb(sp(x)) == std::vector<double>{0.0, 0.0, 1.0});
    auto D = s.deta(sp(x));
    CHECK(D(0, 1) == 1.0);  // dη(∂q, ∂p)
    auto r = s.reeb(sp(x));
    auto iR = transpose_times(D, sp(r));
    for (double c : iR) CHECK(c == 0.0);
    CHECK(dot(s.eta(sp(x)), r) == 1.0);
}

TEST_CASE("flat map") {
    auto s = canonical_contact(1);
    std::vector<double> x = {1.0, 2.0, 0.5};
    std::vector<double> R = {0, 0, 1}, dq = {1, 0, 0}, zero = {0, 0, 0};
    CHECK(s.flat(sp(R), sp(x)) == s.eta(sp(x)));
    CHECK(s.flat(sp(dq), sp(x)) == std::vector<double>{4.0, 1.0, -2.0});
    CHECK(s.flat(sp(zero), sp(x)) == zero);
}

TEST_CASE("sharp map") {
    auto s = canonical_contact(1);
    std::vector<double> x = {1.0, 2.0, 0.5};
    auto e = s.eta(sp(x));
    CHECK(max_diff(s.sharp(sp(e), sp(x)), {0, 0, 1}) < 1e-15);
    // ♯(dp) is ∂q + p ∂z: its flat is dp because η(∂q + p∂z) = 0.
    std::vector<double> dp = {0, 1, 0};
    CHECK(max_diff(s.sharp(sp(dp), sp(x)), {1.0, 0.0, 2.0}) < 1e-15);

    auto s2 = canonical_contact(2);
    Rng rng(3);
    for (const auto& p : random_points(5, 20)) {
        std::vector<double> v(5);
        for (auto& c : v) c = rng.uniform(-2, 2);
        auto back = s2.sharp(sp(s2.flat(sp(v), sp(p))), sp(p));
        CHECK(max_diff(back, v) < 1e-10);
    }
}

TEST_CASE("generic contact form agrees with the closed form") {
    auto canon = canonical_contact(2);
    Chart chart = Chart::cotangent(2);
    std::vector<Expr> comps;
    for (const char* c : {"-p1", "-p2", "0", "0", "1"}) comps.push_back(parse(c, chart.names()));
    auto generic = ContactStructure::from_form(chart, covector_field(comps));
    for (const auto& x : random_points(5, 10)) {
        auto Dc = canon.deta(sp(x)), Dg = generic.deta(sp(x));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(Dc(i, j) == Dg(i, j));
        CHECK(max_diff(canon.reeb(sp(x)), generic.reeb(sp(x))) < 1e-14);
    }
}

TEST_CASE("Jacobi tensor") {
    auto j = jacobi_tensor(canonical_contact(1));
    Rng rng(11);
    for (const auto& x : random_points(3, 20)) {
        std::vector<double> dq = {1, 0, 0}, dp = {0, 1, 0}, a(3), b(3);
        for (auto& c : a) c = rng.uniform(-1, 1);
        for (auto& c : b) c = rng.uniform(-1, 1);
        CHECK(std::abs(j.lambda(sp(dq), sp(dp), sp(x)) + 1.0) < 1e-14);
        auto e = j.contact().eta(sp(x));
        CHECK(std::abs(j.lambda(sp(e), sp(b), sp(x))) < 1e-12);
        CHECK(std::abs(j.lambda(sp(a), sp(a), sp(x))) < 1e-12);
        // Λ(α, β) = β(♯_Λ α)
        auto sa = j.sharp_lambda(sp(a), sp(x));
        CHECK(std::abs(j.lambda(sp(a), sp(b), sp(x)) - dot(b, sa)) < 1e-12);
        CHECK(j.E(sp(x)) == std::vector<double>{0, 0, -1});
    }
}

TEST_CASE("Jacobi bracket examples") {
    auto j = jacobi_tensor(canonical_contact(1));
    auto q = sf("q", kQPZ), p = sf("p", kQPZ), z = sf("z", kQPZ), one = sf("1", kQPZ);
    auto f = sf("q*p^2 + sin(z)", kQPZ);
    for (const auto& x : random_points(3, 10)) {
        CHECK(std::abs(jacobi_bracket(j, q, p, sp(x)) + 1.0) < 1e-14);
        CHECK(std::abs(jacobi_bracket(j, f, f, sp(x))) < 1e-12);
        CHECK(std::abs(jacobi_bracket(j, z, one, sp(x)) - 1.0) < 1e-14);
    }
}

TEST_CASE("contact Hamiltonian vector field") {
    auto s = canonical_contact(1);
    std::vector<double> x = {1.0, 2.0, 0.5};
    HamiltonianSystem damped{s, sf("p^2/2 + q^2/2 + 0.1*z", kQPZ)};
    auto X = hamiltonian_vf(damped)(sp(x));
    CHECK(max_diff(X, {2.0, -1.2, 1.45}) < 1e-15);
    CHECK(max_diff(hamiltonian_vf_lambda(damped)(sp(x)), X) < 1e-12);
    CHECK(max_diff(hamiltonian_vf_flat(damped)(sp(x)), X) < 1e-12);

    HamiltonianSystem free{s, sf("p^2/2", kQPZ)};
    std::vector<double> y = {0.3, -1.5, 2.0};
    CHECK(max_diff(hamiltonian_vf(free)(sp(y)), {-1.5, 0.0, 1.125}) < 1e-15);

    HamiltonianSystem zero{s, sf("0", kQPZ)};
    CHECK(hamiltonian_vf(zero)(sp(y)) == std::vector<double>{0, 0, 0});

    // Structure-map and flat forms agree with coordinates for a generic H on n = 2.
    auto s2 = canonical_contact(2);
    auto names = s2.chart().names();
    HamiltonianSystem g{s2, sf("q1*p2 + p1^2*z - cos(q2) + z^2*p2", names)};
    for (const auto& pt : random_points(5, 20)) {
        auto c = hamiltonian_vf(g)(sp(pt));
        CHECK(max_diff(hamiltonian_vf_lambda(g)(sp(pt)), c) < 1e-10);
        CHECK(max_diff(hamiltonian_vf_flat(g)(sp(pt)), c) < 1e-10);
        // η(X_H) = −H
        CHECK(std::abs(dot(s2.eta(sp(pt)), c) + g.H(sp(pt))) < 1e-10);
    }
}

TEST_CASE("cosymplectic and symplectic fields") {
    std::vector<double> x = {0.7, -0.2, 3.0};
    auto ev = evolution_vf(sf("p^2/2 + q^4", kQPZ), 1)(sp(x));
    CHECK(max_diff(ev, {-0.2, -4 * std::pow(0.7, 3), 1.0}) < 1e-14);
    CHECK(evolution_vf(sf("0", kQPZ), 1)(sp(x)) == std::vector<double>{0, 0, 1});

    std::vector<std::string> qp = {"q", "p"};
    std::vector<double> y = {1.0, 2.0};
    CHECK(symplectic_vf(sf("p^2/2 + q^2/2", qp), 1)(sp(y)) == std::vector<double>{2.0, -1.0});
    CHECK(symplectic_vf(sf("5", qp), 1)(sp(y)) == std::vector<double>{0.0, 0.0});
    std::vector<double> ab = {1.5, -0.5};
    CHECK(symplectic_vf(sf("p*q", qp), 1)(sp(ab)) == std::vector<double>{1.5, 0.5});
}

TEST_CASE("dissipation report") {
    auto s = canonical_contact(1);
    std::vector<double> x = {1.0, 2.0, 0.5};
    HamiltonianSystem damped{s, sf("p^2/2 + q^2/2 + 0.1*z", kQPZ)};
    auto rep = dissipation_report(damped, sp(x));
    CHECK(std::abs(rep.r1) < 1e-14);
    CHECK(rep.energy_rate == doctest::Approx(-0.255).epsilon(1e-14));

    auto s2 = canonical_contact(2);
    auto names = s2.chart().names();
    HamiltonianSystem g{s2, sf("q1*p2 + p1^2*z - cos(q2) + z^2*p2 + exp(0.3*z)*q1", names)};
    for (const auto& pt : random_points(5, 20)) {
        auto r = dissipation_report(g, sp(pt));
        CHECK(std::abs(r.r1) < 1e-8);
        CHECK(max_abs(r.r2) < 1e-8);
        CHECK(std::abs(r.r3) < 1e-8);
    }
    HamiltonianSystem conservative{s2, sf("p1^2/2 + p2^2/2 + q1*q2", names)};
    for (const auto& pt : random_points(5, 5)) {
        auto r = dissipation_report(conservative, sp(pt));
        CHECK(std::abs(r.r1) < 1e-14);
        CHECK(max_abs(r.r2) < 1e-14);
        CHECK(std::abs(r.r3) < 1e-14);
        CHECK(std::abs(r.energy_rate) < 1e-14);
    }
}

TEST_CASE("submanifold classification") {
    auto s2 = canonical_contact(2);
    auto names = s2.chart().names();
    std::vector<double> x = {0.4, -0.3, 0.0, 0.0, 0.0};
    auto zero_section = submanifold_classify(s2, {sf("p1", names), sf("p2", names), sf("z", names)}, sp(x));
    CHECK(zero_section.kind == SubmanifoldKind::legendrian);

    // {q2, p2} is a second-class pair: Z_{q2}(p2) = Λ(dq2, dp2) = −1.
    std::vector<double> y = {0.4, 0.0, 0.7, 0.0, 0.2};
    auto pair = submanifold_classify(s2, {sf("q2", names), sf("p2", names)}, sp(y));
    CHECK(pair.kind == SubmanifoldKind::none);
    CHECK(pair.coisotropic_residual == doctest::Approx(1.0));

    auto s1 = canonical_contact(1);
    std::vector<double> w = {0.0, 1.3, -0.4};
    CHECK(submanifold_classify(s1, {sf("q", kQPZ)}, sp(w)).kind == SubmanifoldKind::coisotropic);

    // A Legendrian curve in the n = 1 chart: q = t, p = 0, z = 0.
    std::vector<double> o = {0.5, 0.0, 0.0};
    CHECK(submanifold_classify(s1, {sf("p", kQPZ), sf("z", kQPZ)}, sp(o)).kind == SubmanifoldKind::legendrian);
    // An isotropic point-like set that is not coisotropic: all three coordinates fixed.
    auto pt = submanifold_classify(s1, {sf("p", kQPZ), sf("z", kQPZ), sf("q - 0.5", kQPZ)}, sp(o));
    CHECK(pt.kind == SubmanifoldKind::isotropic);

    CHECK_THROWS_AS(submanifold_classify(s1, {sf("q - 1", kQPZ)}, sp(w)), NotOnSubmanifold);
    CHECK_THROWS_AS(submanifold_classify(s1, {sf("q", kQPZ), sf("2*q", kQPZ)}, sp(w)), RankDeficient);
}

TEST_CASE("bracket identities on random polynomial observables") {
    auto s = canonical_contact(2);
    auto names = s.chart().names();
    auto j = jacobi_tensor(s);
    Rng rng(default_seed);
    auto pts = random_points(5, 20);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        auto f = sf(random_polynomial(names, rng, 3, 4), names);
        auto g = sf(random_polynomial(names, rng, 3, 4), names);
        auto h = sf(random_polynomial(names, rng, 3, 4), names);
        auto x = sp(pts[k]);

        double jac = jacobi_bracket(j, f, bracket_field(j, g, h), x) + jacobi_bracket(j, g, bracket_field(j, h, f), x) +
                     jacobi_bracket(j, h, bracket_field(j, f, g), x);
        CHECK(std::abs(jac) < 1e-7);

        // Weak Leibniz: {f, gh} − g{f,h} − h{f,g} = gh E(f)
        auto e = j.E(x);
        double Ef = dot(gradient(f, x), std::span<const double>(e));
        double wl = jacobi_bracket(j, f, product(g, h), x) - g(x) * jacobi_bracket(j, f, h, x) -
                    h(x) * jacobi_bracket(j, f, g, x) - g(x) * h(x) * Ef;
        CHECK(std::abs(wl) < 1e-8);

        // {f, g} = X_f(g) + g R(f) and {f, g} = −η([X_f, X_g])
        auto Xf = hamiltonian_vf({s, f});
        auto Xg = hamiltonian_vf({s, g});
        auto r = s.reeb(x);
        double fg = jacobi_bracket(j, f, g, x);
        double chain1 = fg - directional(g, Xf, x) - g(x) * dot(gradient(f, x), std::span<const double>(r));
        CHECK(std::abs(chain1) < 1e-7);
        auto br = lie_bracket(Xf, Xg, x);
        CHECK(std::abs(fg + dot(s.eta(x), br)) < 1e-7);
    }
}

TEST_CASE("conformal volume is preserved along short flows") {
    auto s = canonical_contact(1);
    HamiltonianSystem sys{s, sf("p^2/2 + q^2/2 + 0.3*z*p + 2", kQPZ)};
    auto X = hamiltonian_vf(sys);
    const double t = 0.5, dt = 1e-3, h = 1e-5;
    for (const auto& x0 : random_points(3, 5, default_seed, -0.5, 0.5)) {
        auto end = integrate(X, x0, dt, t).states.back();
        Matrix<double> J(3, 3);
        for (std::size_t k = 0; k < 3; ++k) {
            auto xp = x0, xm = x0;
            xp[k] += h;
            xm[k] -= h;
            auto fp = integrate(X, xp, dt, t).states.back();
            auto fm = integrate(X, xm, dt, t).states.back();
            for (std::size_t i = 0; i < 3; ++i) J(i, k) = (fp[i] - fm[i]) / (2 * h);
        }
        double before = std::pow(sys.H(sp(x0)), -2.0);
        double after = std::pow(sys.H(sp(end)), -2.0) * determinant(J);
        CHECK(std::abs(after - before) / std::abs(before) < 1e-4);
    }
}
