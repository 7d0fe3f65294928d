#include "doctest.h"

#include <cmath>

#include "cmech/nonholo.hpp"

using namespace cmech;

namespace {

const Chart kChart = Chart::tangent({"x", "y", "w"});
const char* kParticle = "(vx^2 + vy^2 + vw^2)/2 - 0.1*z";

NonholonomicSystem particle(const std::vector<std::vector<std::string>>& phi) {
    auto sys = LagrangianSystem::build(parse(kParticle, kChart.names()), kChart);
    return NonholonomicSystem(sys, LinearConstraints(kChart, phi));
}

NonholonomicSystem twisted() { return particle({{"-y", "0", "1"}}); }
NonholonomicSystem flat_w() { return particle({{"0", "0", "1"}}); }
NonholonomicSystem unconstrained() { return particle({}); }

const std::vector<double> kProbe = {0, 1, 0, 1, 1, 1, 0};

std::vector<ScalarField> observables(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ScalarField> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(scalar_field(parse(random_polynomial(kChart.names(), rng, 2, 3), kChart.names())));
    return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("Z fields and the C matrix") {
    auto zc = za_and_c(twisted(), kProbe);
    CHECK(zc.Z.row(0) == std::vector<double>{0, 0, 0, 1, 0, -1, 0});
    REQUIRE(zc.C.rows() == 1);
    CHECK(zc.C(0, 0) == doctest::Approx(-2.0));

    auto zw = za_and_c(flat_w(), kProbe);
    CHECK(zw.Z.row(0) == std::vector<double>{0, 0, 0, 0, 0, -1, 0});
    CHECK(zw.C(0, 0) == doctest::Approx(-1.0));

    auto z0 = za_and_c(unconstrained(), kProbe);
    CHECK(z0.Z.rows() == 0);
    CHECK(z0.C.rows() == 0);

    // C_ab = −W^{ik} Φ^b_k Φ^a_i at y = 1.7
    std::vector<double> x = {0.2, 1.7, -0.3, 0.5, 0.1, 0.85, 0.4};
    CHECK(za_and_c(twisted(), x).C(0, 0) == doctest::Approx(-(1 + 1.7 * 1.7)));

    auto sing = LagrangianSystem::build(parse("vx^2/2 + vy^2/2 - 0.1*z", kChart.names()), kChart);
    CHECK_THROWS_AS(NonholonomicSystem(sing, LinearConstraints(kChart, {})), SingularHessian);

    auto indef = LagrangianSystem::build(parse("(vx^2 - vy^2 + vw^2)/2 - 0.1*z", kChart.names()), kChart);
    NonholonomicSystem bad(indef, LinearConstraints(kChart, {{"1", "1", "0"}}));
    CHECK_FALSE(bad.definite());
    CHECK(bad.warnings().size() == 1);
    CHECK_THROWS_AS(za_and_c(bad, kProbe), SingularC);
    CHECK_THROWS_AS(bad.dynamics(std::span<const double>(kProbe)), SingularC);
}

TEST_CASE("constrained Herglotz dynamics") {
    auto nh = twisted();
    auto g = nh.dynamics(std::span<const double>(kProbe));
    std::vector<double> expected = {1, 1, 1, -0.6, -0.1, 0.4, 1.5};
    CHECK(max_diff(g, expected) < 1e-12);

    for (const auto& p : constraint_probes(nh, 20)) {
        std::span<const double> x(p);
        CHECK(std::abs(nh.constraints().values(x)[0]) < 1e-12);
        auto d = nh.constraint_differentials(x);
        auto gx = nh.dynamics(x);
        CHECK(std::abs(dot(d.row(0), gx)) < 1e-9);
    }

    auto free = unconstrained();
    for (const auto& p : random_points(7, 10)) {
        std::span<const double> x(p);
        CHECK(max_diff(free.dynamics(x), free.lagrangian().euler_lagrange(x)) == 0.0);
    }
}

TEST_CASE("projectors") {
    auto nh = twisted();
    Rng rng(3);
    for (const auto& p : constraint_probes(nh, 10)) {
        std::span<const double> x(p);
        auto pr = projectors(nh, x);
        auto z = nh.Z(x);
        auto qz = pr.Q * z.row(0);
        CHECK(max_diff(qz, z.row(0)) < 1e-12);

        std::vector<double> y(7);
        for (auto& c : y) c = rng.uniform(-1, 1);
        auto py = pr.P * y, qy = pr.Q * y;
        std::vector<double> sum(7);
        for (std::size_t i = 0; i < 7; ++i) sum[i] = py[i] + qy[i];
        CHECK(max_diff(sum, y) < 1e-15);
        CHECK(max_diff(pr.P * py, py) < 1e-12);
        CHECK(max_diff(pr.Q * qy, qy) < 1e-12);
        auto d = nh.constraint_differentials(x);
        CHECK(std::abs(dot(d.row(0), py)) < 1e-12);
    }
}

TEST_CASE("almost-Jacobi structure") {
    auto nh = twisted();
    auto w = flat_w();
    for (const auto& p : constraint_probes(w, 5)) {
        auto r = w.reeb(std::span<const double>(p));
        CHECK(max_diff(r, {0, 0, 0, 0, 0, 0, 1}) < 1e-12);
    }

    auto free = unconstrained();
    auto beta_pts = random_points(7, 5, 11);
    for (const auto& p : constraint_probes(nh, 5)) {
        std::span<const double> x(p);
        auto phi = nh.constraints().lifted_form(0, x);
        for (const auto& b : beta_pts) {
            CHECK(std::abs(nh.lambda(std::span<const double>(phi), std::span<const double>(b), x)) < 1e-10);
            CHECK(free.lambda(std::span<const double>(phi), std::span<const double>(b), x) ==
                  doctest::Approx(free.jacobi().lambda(std::span<const double>(phi), std::span<const double>(b), x)));
        }
        CHECK(max_diff(free.reeb(x), free.lagrangian().reeb(x)) == 0.0);
    }
}

TEST_CASE("nonholonomic bracket") {
    auto nh = twisted();
    auto obs = observables(3, 5);
    auto phi = nh.constraints().constraint_field(0);
    auto E = nh.lagrangian().energy_field();
    auto gamma = nh.dynamics_field();
    auto r = nh.reeb_field();
    for (const auto& p : constraint_probes(nh, 10)) {
        std::span<const double> x(p);
        for (const auto& f : obs) {
            CHECK(std::abs(nh_bracket(nh, phi, f, x)) < 1e-9);
            CHECK(std::abs(nh_bracket(nh, f, f, x)) < 1e-12);
            const double evo = nh_bracket(nh, E, f, x) - f(x) * directional(E, r, x);
            CHECK(std::abs(directional(f, gamma, x) - evo) < 1e-7);
        }
        // {f, gh} = g{f,h} + h{f,g} − gh R_{L,Δ}(f)
        const auto &f = obs[0], &g = obs[1], &h = obs[2];
        auto gh = ScalarField(7, 1, [g, h](auto y) { return g(y) * h(y); });
        const double lhs = nh_bracket(nh, f, gh, x);
        const double rhs = g(x) * nh_bracket(nh, f, h, x) + h(x) * nh_bracket(nh, f, g, x) -
                           g(x) * h(x) * directional(f, r, x);
        CHECK(std::abs(lhs - rhs) < 1e-6);
        CHECK(std::abs(nh_bracket(nh, f, g, x) + nh_bracket(nh, g, f, x)) < 1e-12);
    }
}

TEST_CASE("constrained Hamiltonian fields") {
    auto nh = twisted();
    auto H = scalar_field(parse("x*vy + z^2 - vw", kChart.names()));
    auto E = nh.lagrangian().energy_field();
    for (const auto& p : constraint_probes(nh, 10)) {
        std::span<const double> x(p);
        auto rep = constrained_hvf_report(nh, H, x);
        CHECK(rep.eta_residual < 1e-8);
        CHECK(rep.form_ii < 1e-8);
        CHECK(rep.form_iii < 1e-8);
        auto xe = constrained_hamiltonian_vector(nh, E, x);
        CHECK(max_diff(xe, nh.dynamics(x)) < 1e-8);
    }
    auto free = unconstrained();
    for (const auto& p : random_points(7, 5)) {
        std::span<const double> x(p);
        CHECK(max_diff(constrained_hamiltonian_vector(free, H, x), hamiltonian_vector(free.jacobi().contact(), H, x)) <
              1e-10);
    }
}

TEST_CASE("semiholonomy and the Jacobi identity") {
    auto obs = observables(5, 21);

    auto nh = twisted();
    auto rep = integrability_report(nh, obs, constraint_probes(nh, 4));
    CHECK(rep.involutivity == doctest::Approx(1.0));
    CHECK(rep.jacobiator > 1e-6);

    auto w = flat_w();
    auto rw = integrability_report(w, obs, constraint_probes(w, 4));
    CHECK(rw.involutivity < 1e-8);
    CHECK(rw.jacobiator < 1e-8);

    auto free = unconstrained();
    auto r0 = integrability_report(free, obs, random_points(7, 4));
    CHECK(r0.involutivity == 0.0);
    CHECK(r0.jacobiator < 1e-7);
}

TEST_CASE("dissipation with constraints") {
    auto nh = twisted();
    CHECK(nh_dissipation_residual(nh, kProbe) < 1e-7);
    CHECK(nh_correction_pairing(nh, kProbe) < 1e-8);
    for (const auto& p : constraint_probes(nh, 10)) {
        CHECK(nh_dissipation_residual(nh, p) < 1e-7);
        CHECK(nh_correction_pairing(nh, p) < 1e-8);
    }
    auto free = unconstrained();
    for (const auto& p : random_points(7, 5)) CHECK(nh_dissipation_residual(free, p) < 1e-7);
}

TEST_CASE("constraint drift along the flow") {
    auto nh = twisted();
    auto traj = integrate(nh.dynamics_field(), kProbe, 1e-3, 5.0);
    auto phi = nh.constraints().constraint_field(0);
    double drift = 0.0;
    for (const auto& s : traj.states) drift = std::max(drift, std::abs(phi(s)));
    CHECK(drift < 1e-6);
}
