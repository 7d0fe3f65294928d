#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "cmech/hamjac.hpp"
#include "cmech/nonholo.hpp"
#include "cmech/scenario.hpp"
#include "cmech/singular.hpp"
#include "cmech/symmetry.hpp"
#include "oracles.hpp"

using namespace cmech;
namespace fs = std::filesystem;

namespace {

// ==================== helpers ====================

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    if (!pass) ++failures;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

ScalarField sf(const std::string& s, const std::vector<std::string>& names) { return scalar_field(parse(s, names)); }

ScalarField product(const ScalarField& f, const ScalarField& g) {
    return ScalarField(f.dim(), 1, [f, g](auto x) { return f(x) * g(x); });
}

double sup(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Runs `body` and reports an exception as a failed criterion.
void guarded(int id, const std::string& name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("threw: ") + e.what());
    }
}

// ==================== criteria ====================

void damped_oscillator() {
    const double gamma = 0.1;
    auto names = Chart::cotangent(1).names();
    HamiltonianSystem sys{canonical_contact(1), scalar_field(parse("p^2/2 + q^2/2 + g*z", names, {{"g", gamma}}))};
    std::vector<double> x0 = {1, 0, 0};
    const auto start = std::chrono::steady_clock::now();
    auto traj = integrate(hamiltonian_vf(sys), x0, 1e-3, 10.0);
    double q_err = 0.0, h_err = 0.0;
    const double h0 = sys.H(traj.states[0]);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double t = traj.times[k];
        q_err = std::max(q_err, std::abs(traj.states[k][0] - oracle::damped_closed_form(t, gamma)));
        h_err = std::max(h_err, std::abs(sys.H(traj.states[k]) / h0 - std::exp(-gamma * t)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(1, "damped oscillator reproduction", q_err < 1e-6 && h_err < 1e-6 && secs < 1.0 && traj.states.size() == 10001,
           "max|q-q_exact|=" + sci(q_err) + " max|H/H0-exp(-gt)|=" + sci(h_err) + " runtime=" + sci(secs) + "s");
}

void bracket_identities() {
    double jac = 0.0, wl = 0.0, pairing = 0.0, commutator = 0.0;
    for (std::size_t n : {1u, 2u}) {
        auto s = canonical_contact(n);
        auto j = jacobi_tensor(s);
        const auto& names = s.chart().names();
        Rng rng(default_seed + n);
        std::vector<ScalarField> obs;
        for (int i = 0; i < 50; ++i) obs.push_back(sf(random_polynomial(names, rng, 3, 4), names));
        auto pts = random_points(s.dim(), 50, default_seed + n);
        for (std::size_t k = 0; k < 50; ++k) {
            const auto &f = obs[k], &g = obs[(k + 1) % 50], &h = obs[(k + 2) % 50];
            std::span<const double> x(pts[k]);
            jac = std::max(jac, std::abs(jacobi_bracket(j, f, bracket_field(j, g, h), x) +
                                         jacobi_bracket(j, g, bracket_field(j, h, f), x) +
                                         jacobi_bracket(j, h, bracket_field(j, f, g), x)));
            const double Ef = dot(gradient(f, x), j.E(x));
            wl = std::max(wl, std::abs(jacobi_bracket(j, f, product(g, h), x) - g(x) * jacobi_bracket(j, f, h, x) -
                                       h(x) * jacobi_bracket(j, f, g, x) - g(x) * h(x) * Ef));
            auto Xf = hamiltonian_vf({s, f});
            auto Xg = hamiltonian_vf({s, g});
            const double fg = jacobi_bracket(j, f, g, x);
            pairing = std::max(pairing, std::abs(fg - directional(g, Xf, x) - g(x) * dot(gradient(f, x), s.reeb(x))));
            commutator = std::max(commutator, std::abs(fg + dot(s.eta(x), lie_bracket(Xf, Xg, x))));
        }
    }
    report(2, "bracket identity suite", jac < 1e-7 && wl < 1e-8 && pairing < 1e-7 && commutator < 1e-7,
           "jacobi=" + sci(jac) + " weak_leibniz=" + sci(wl) + " X_f(g)+gR(f)=" + sci(pairing) +
               " -eta([X_f,X_g])=" + sci(commutator));
}

void structural_identities() {
    const std::vector<std::pair<std::size_t, std::string>> hams = {
        {1, "p^2/2 + q^2/2 + 0.1*z"},
        {1, "p^2/2 + sin(q) + z^2/2"},
        {1, "q*p*z + p^3/3"},
        {2, "(p1^2 + p2^2)/2 + q1*q2 - 0.3*z*p1"},
        {2, "exp(0.2*z)*(p1^2/2 + cos(q2)) + q1*p2"}};
    double form = 0.0, div = 0.0, eta = 0.0;
    for (const auto& [n, h] : hams) {
        HamiltonianSystem sys{canonical_contact(n), sf(h, Chart::cotangent(n).names())};
        auto X = hamiltonian_vf(sys);
        for (const auto& p : random_points(2 * n + 1, 20)) {
            auto d = dissipation_report(sys, p);
            form = std::max(form, sup(d.r2));
            div = std::max(div, std::abs(d.r3));
            eta = std::max(eta, std::abs(dot(sys.structure.eta(std::span<const double>(p)), X(p)) + sys.H(p)));
        }
    }
    report(3, "structural identities", form < 1e-8 && div < 1e-8 && eta < 1e-10,
           "L_X eta+R(H)eta=" + sci(form) + " divX+(n+1)R(H)=" + sci(div) + " eta(X_H)+H=" + sci(eta));
}

void legendre_equivalence() {
    double eq = 0.0, pull = 0.0;
    for (const char* L : {"v^2/2 - q^2/2 - 0.1*z", "v^2/2", "v^2/2 - q^2/2 + 0.2*z*v"}) {
        auto sys = LagrangianSystem::build(parse(L, Chart::tangent(1).names()), 1);
        for (const auto& p : random_points(3, 20)) {
            eq = std::max(eq, legendre_equivalence_residual(sys, p));
            pull = std::max(pull, pullback_residual(sys, p));
        }
    }
    report(4, "Lagrangian/Hamiltonian equivalence", eq < 1e-7 && pull < 1e-9,
           "legendre_equivalence=" + sci(eq) + " FL*eta-eta_L=" + sci(pull));
}

void herglotz_variational() {
    const double gamma = 0.1, dt = 1e-3, T = 3.0;
    auto sys = LagrangianSystem::build(parse("v^2/2 - q^2/2 - g*z", Chart::tangent(1).names(), {{"g", gamma}}), 1);
    auto sampled = [&](const std::function<double(double)>& q) {
        ConfigPath path{0.0, T, {}};
        const auto m = static_cast<std::size_t>(std::llround(T / dt));
        for (std::size_t k = 0; k <= m; ++k) path.q.push_back({q(dt * static_cast<double>(k))});
        return path;
    };
    auto exact = sampled([&](double t) { return oracle::damped_closed_form(t, gamma); });
    auto bent = sampled([&](double t) {
        return oracle::damped_closed_form(t, gamma) + 0.2 * std::sin(std::numbers::pi * t / T);
    });
    const double r0 = critical_point_residual(sys, exact, 0.0, 10, default_seed);
    const double r1 = critical_point_residual(sys, bent, 0.0, 10, default_seed);
    report(5, "Herglotz variational check", r0 < 1e-4 && r1 > 1e-2,
           "closed-form=" + sci(r0) + " perturbed=" + sci(r1));
}

void noether_suite() {
    const auto chart = Chart::tangent(2);
    auto sys = LagrangianSystem::build(parse("(v1^2 + v2^2)/2 - q2^2/2 - 0.1*z", chart.names()), 2);
    auto X = base_field(chart, {"1", "0"});
    auto r = noether_check(sys, X);
    std::vector<double> x0 = {0.0, 1.0, 1.0, 0.5, 0.0};
    auto traj = integrate(euler_lagrange_vf(sys), x0, 1e-3, 5.0);
    const double drift = conserved_ratio(sys, sf("v1", chart.names()), traj);
    report(6, "Noether suite", r.residual_a < 1e-12 && r.residual_b < 1e-8 && drift < 1e-6,
           "X^C(L)=" + sci(r.residual_a) + " dissipated=" + sci(r.residual_b) + " p1/E_L drift=" + sci(drift));
}

void hamilton_jacobi() {
    const auto chart = Chart::cotangent(2);
    auto probes = oracle::hj_probes(50);
    std::size_t agree = 0, solutions = 0;
    double band = 1e300, worst_solution = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        auto H = sf(probes[k].H, chart.names());
        HJSection g(chart, probes[k].gamma);
        double hj = 0.0, rel = 0.0;
        for (const auto& p : random_points(3, 5, 1000 + k)) {
            hj = std::max(hj, sup(hj_residual(H, g, p)));
            rel = std::max(rel, relatedness_residual(H, g, p));
        }
        agree += (hj < 1e-6) == (rel < 1e-6) ? 1 : 0;
        if (hj < 1e-6) {
            ++solutions;
            worst_solution = std::max({worst_solution, hj, rel});
        } else {
            band = std::min({band, hj, rel});
        }
    }
    report(7, "Hamilton-Jacobi biconditional", agree == probes.size() && band >= 1e-3,
           std::to_string(agree) + "/50 agree, " + std::to_string(solutions) + " solutions (worst " +
               sci(worst_solution) + "), smallest failing residual=" + sci(band));
}

void constraint_algorithm() {
    // Hand oracle for L = v1²/2 + q2 v2 − 0.1 z: γ_H has a single obstruction 0.1 q2 along the kernel,
    // so the ladder is {q2 = 0} (rank 1, dim 4) and the secondary batch vanishes there.
    auto sys = PrecontactSystem::from_lagrangian(
        LagrangianSystem::build(parse("v1^2/2 + q2*v2 - 0.1*z", Chart::tangent(2).names()), 2));
    auto ladder = run_algorithm(sys);
    ConstraintLadder eval(sys);
    double shape = 0.0, on_zero = 0.0, on_final = 0.0;
    for (auto p : random_points(5, 20)) {
        const double q2 = p[1];
        shape = std::max(shape, std::abs(norm(eval.batch(1, p)) - 0.1 * std::abs(q2) / std::sqrt(1 + q2 * q2)));
        p[1] = 0.0;
        on_zero = std::max(on_zero, sup(eval.batch(1, p)));
    }
    for (const auto& p : ladder.probes()) on_final = std::max(on_final, std::abs(p[1]));
    const bool lag_ok = ladder.size() == 1 && ladder.size() <= 3 && ladder.steps()[0].rank == 1 &&
                        ladder.steps()[0].dimension == 4 && shape < 1e-9 && on_zero < 1e-12 && on_final < 1e-9;

    auto dar = run_algorithm(PrecontactSystem::darboux(1, 1, "u^2"));
    ConstraintLadder deval(PrecontactSystem::darboux(1, 1, "u^2"));
    double dshape = 0.0, du = 0.0;
    for (const auto& p : random_points(4, 20)) dshape = std::max(dshape, std::abs(norm(deval.batch(1, p)) - 2 * std::abs(p[3])));
    for (const auto& p : dar.probes()) du = std::max(du, std::abs(p[3]));
    const bool dar_ok = dar.size() == 1 && dar.steps()[0].rank == 1 && dshape < 1e-12 && du < 1e-9;

    report(8, "constraint algorithm", lag_ok && dar_ok,
           "lagrangian ladder steps=" + std::to_string(ladder.size()) + " dim=" +
               std::to_string(ladder.final_dimension()) + " |batch1|-oracle=" + sci(shape) + " on q2=0: " +
               sci(on_zero) + " final |q2|=" + sci(on_final) + "; darboux steps=" + std::to_string(dar.size()) +
               " |batch1|-|2u|=" + sci(dshape) + " final |u|=" + sci(du));
}

void dirac_jacobi() {
    auto s = canonical_contact(2);
    auto j = jacobi_tensor(s);
    const auto& names = s.chart().names();
    std::vector<ScalarField> phi = {sf("q2", names), sf("p2", names)};
    auto dd = classify_constraints(phi, j);
    const bool second = dd.second_class().size() == 2 && dd.first_class().empty();
    Rng rng(default_seed);
    double cas = 0.0;
    auto pts = project_onto(phi, random_points(5, 20));
    for (std::size_t k = 0; k < 20; ++k) {
        auto f = sf(random_polynomial(names, rng, 3, 4), names);
        std::span<const double> x(pts[k]);
        cas = std::max({cas, std::abs(dirac_jacobi_bracket(dd, f, phi[0], x)),
                        std::abs(dirac_jacobi_bracket(dd, f, phi[1], x))});
    }
    double canon = 0.0;
    for (const auto& p : pts)
        canon = std::max(canon, std::abs(dirac_jacobi_bracket(dd, sf("q1", names), sf("p1", names), p) + 1.0));
    report(9, "Dirac-Jacobi bracket", second && cas < 1e-9 && canon < 1e-9,
           std::string(second ? "second class" : "misclassified") + " {f,phi}_DJ=" + sci(cas) +
               " |{q1,p1}_DJ+1|=" + sci(canon));
}

NonholonomicSystem particle(const std::vector<std::vector<std::string>>& phi) {
    const auto chart = Chart::tangent({"x", "y", "w"});
    auto sys = LagrangianSystem::build(parse("(vx^2 + vy^2 + vw^2)/2 - 0.1*z", chart.names()), chart);
    return NonholonomicSystem(sys, LinearConstraints(chart, phi));
}

void nonholonomic_particle() {
    auto nh = particle({{"-y", "0", "1"}});
    const auto& names = nh.lagrangian().chart().names();
    std::vector<double> x0 = {0, 1, 0, 1, 1, 1, 0};
    // v̇ = −0.1 v − λ Φ with λ from tangency; ż = L.
    const std::vector<double> expected = {1, 1, 1, -0.6, -0.1, 0.4, 1.5};
    auto g = nh.dynamics(std::span<const double>(x0));
    double dyn = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dyn = std::max(dyn, std::abs(g[i] - expected[i]));

    auto traj = integrate(nh.dynamics_field(), x0, 1e-3, 5.0);
    double drift = 0.0;
    for (const auto& st : traj.states) drift = std::max(drift, sup(nh.constraints().values(std::span<const double>(st))));

    auto E = nh.lagrangian().energy_field();
    auto H = sf("x*vy + z^2 - vw", names);
    auto gamma = nh.dynamics_field();
    auto r = nh.reeb_field();
    auto phi = nh.constraints().constraint_field(0);
    Rng rng(default_seed);
    std::vector<ScalarField> obs;
    for (int i = 0; i < 5; ++i) obs.push_back(sf(random_polynomial(names, rng, 2, 3), names));
    double eta = 0.0, cas = 0.0, evo = 0.0;
    for (const auto& p : constraint_probes(nh, 20)) {
        std::span<const double> x(p);
        eta = std::max({eta, constrained_hvf_report(nh, H, x).eta_residual, constrained_hvf_report(nh, E, x).eta_residual});
        const double re = directional(E, r, x);
        for (const auto& f : obs) {
            cas = std::max(cas, std::abs(nh_bracket(nh, phi, f, x)));
            evo = std::max(evo, std::abs(directional(f, gamma, x) - (nh_bracket(nh, E, f, x) - f(x) * re)));
        }
    }
    report(10, "nonholonomic particle", dyn < 1e-10 && drift < 1e-6 && eta < 1e-8 && cas < 1e-7 && evo < 1e-7,
           "dynamics-oracle=" + sci(dyn) + " drift=" + sci(drift) + " eta_L(X)+H=" + sci(eta) + " casimir=" + sci(cas) +
               " evolution=" + sci(evo));
}

void semiholonomy() {
    const auto names = Chart::tangent({"x", "y", "w"}).names();
    Rng rng(21);
    std::vector<ScalarField> obs;
    for (int i = 0; i < 5; ++i) obs.push_back(sf(random_polynomial(names, rng, 2, 3), names));
    auto flat = particle({{"0", "0", "1"}});
    auto twisted = particle({{"-y", "0", "1"}});
    auto rf = integrability_report(flat, obs, constraint_probes(flat, 4));
    auto rt = integrability_report(twisted, obs, constraint_probes(twisted, 4));
    const bool flags = (rf.involutivity < 1e-8) == (rf.jacobiator < 1e-8) &&
                       (rt.involutivity < 1e-8) == (rt.jacobiator < 1e-8);
    report(11, "semiholonomy biconditional", rf.jacobiator < 1e-8 && rt.jacobiator > 1e-6 && flags,
           "vw: jacobiator=" + sci(rf.jacobiator) + " involutivity=" + sci(rf.involutivity) +
               "; vw-y*vx: jacobiator=" + sci(rt.jacobiator) + " involutivity=" + sci(rt.involutivity));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism() {
    const fs::path dir = fs::path(CMECH_SOURCE_DIR) / "scenarios";
    const fs::path tmp = fs::temp_directory_path() / "cmech_acceptance";
    std::size_t count = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        auto s = load(entry.path());
        const auto stem = entry.path().stem().string();
        const auto a = tmp / (stem + "_a"), b = tmp / (stem + "_b");
        fs::remove_all(a);
        fs::remove_all(b);
        write_outputs(s, run(s), a);
        write_outputs(s, run(s), b);
        bool same = slurp(a / s.report) == slurp(b / s.report);
        if (fs::exists(a / s.csv) || fs::exists(b / s.csv)) same = same && slurp(a / s.csv) == slurp(b / s.csv);
        ++count;
        identical += same ? 1 : 0;
    }
    report(12, "determinism", count > 0 && identical == count,
           std::to_string(identical) + "/" + std::to_string(count) + " scenarios byte-identical");
}

}  // namespace

int main() {
    guarded(1, "damped oscillator reproduction", damped_oscillator);
    guarded(2, "bracket identity suite", bracket_identities);
    guarded(3, "structural identities", structural_identities);
    guarded(4, "Lagrangian/Hamiltonian equivalence", legendre_equivalence);
    guarded(5, "Herglotz variational check", herglotz_variational);
    guarded(6, "Noether suite", noether_suite);
    guarded(7, "Hamilton-Jacobi biconditional", hamilton_jacobi);
    guarded(8, "constraint algorithm", constraint_algorithm);
    guarded(9, "Dirac-Jacobi bracket", dirac_jacobi);
    guarded(10, "nonholonomic particle", nonholonomic_particle);
    guarded(11, "semiholonomy biconditional", semiholonomy);
    guarded(12, "determinism", determinism);
    return failures == 0 ? 0 : 1;
}
