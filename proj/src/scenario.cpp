#include "cmech/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cmech/hamjac.hpp"
#include "cmech/nonholo.hpp"
#include "cmech/singular.hpp"
#include "cmech/symmetry.hpp"

namespace cmech {

namespace {

using json = nlohmann::json;

// ==================== JSON access ====================

std::string key_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }
std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void check_keys(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(key_path(path, it.key()), "unknown key");
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(key_path(path, key), "required");
    return *it;
}

const json& as_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
    return v;
}

const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    return v;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

std::vector<std::string> as_strings(const json& v, const std::string& path) {
    std::vector<std::string> out;
    const auto& a = as_array(v, path);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_string(a[i], index_path(path, i)));
    return out;
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    const auto& a = as_array(v, path);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], index_path(path, i)));
    return out;
}

// ==================== kinds ====================

ScenarioKind parse_kind(const std::string& k) {
    if (k == "hamiltonian") return ScenarioKind::hamiltonian;
    if (k == "lagrangian") return ScenarioKind::lagrangian;
    if (k == "nonholonomic") return ScenarioKind::nonholonomic;
    if (k == "singular") return ScenarioKind::singular;
    if (k == "hamilton-jacobi") return ScenarioKind::hamilton_jacobi;
    throw ConfigError("kind", "unknown kind '" + k + "'");
}

const std::vector<std::string>& kind_keys(ScenarioKind k) {
    static const std::vector<std::string> ham = {"kind", "n", "H", "parameters", "initial", "integrator",
                                                 "diagnostics", "tolerances", "output"};
    static const std::vector<std::string> lag = {"kind", "n", "coordinates", "L", "symmetries", "parameters",
                                                 "initial", "integrator", "diagnostics", "tolerances", "output"};
    static const std::vector<std::string> nh = {"kind", "n", "coordinates", "L", "constraints", "parameters",
                                                "initial", "integrator", "diagnostics", "tolerances", "output"};
    static const std::vector<std::string> sing = {"kind", "n", "coordinates", "L", "H", "precontact", "max_iters",
                                                  "parameters", "diagnostics", "tolerances", "output"};
    static const std::vector<std::string> hj = {"kind", "n", "H", "section", "parameters", "initial",
                                                "integrator", "diagnostics", "tolerances", "output"};
    switch (k) {
        case ScenarioKind::hamiltonian: return ham;
        case ScenarioKind::lagrangian: return lag;
        case ScenarioKind::nonholonomic: return nh;
        case ScenarioKind::singular: return sing;
        case ScenarioKind::hamilton_jacobi: return hj;
    }
    return ham;
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t = {
        {"energy_decay", 1e-6},       {"volume_identity", 1e-8},     {"dissipation_form", 1e-8},
        {"eta_identity", 1e-8},       {"legendre_equivalence", 1e-7}, {"pullback", 1e-9},
        {"constraint_drift", 1e-6},   {"dissipation", 1e-7},          {"casimir", 1e-7},
        {"evolution_identity", 1e-7}, {"constraint_residual", 1e-8},  {"closure", 1e-8},
        {"reeb_residual", 1e-8},      {"hj_residual", 1e-6},          {"relatedness", 1e-6},
        {"admissibility", 1e-8},      {"section_drift", 1e-6}};
    return t;
}

Expr parse_at(const std::string& text, const std::vector<std::string>& names,
              const std::map<std::string, double>& params, const std::string& path) {
    try {
        return parse(text, names, params);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

std::vector<std::string> config_names(const Chart& c) {
    return {c.names().begin(), c.names().begin() + static_cast<std::ptrdiff_t>(c.n())};
}

std::vector<std::string> base_names(const Chart& c) {
    auto out = config_names(c);
    out.push_back("z");
    return out;
}

// ==================== systems ====================

/// Objects built from a validated scenario.
struct Built {
    Chart chart = Chart::cotangent(1);
    std::optional<HamiltonianSystem> ham;
    std::optional<LagrangianSystem> lag;
    std::optional<NonholonomicSystem> nh;
    std::optional<PrecontactSystem> pre;
    std::optional<HJSection> section;
    std::uint64_t probe_seed = default_seed;
};

/// Constraint coefficients with parameters substituted.
std::vector<std::vector<std::string>> substituted(const Scenario& s, const Chart& chart) {
    auto config = config_names(chart);
    std::vector<std::vector<std::string>> out;
    for (std::size_t a = 0; a < s.constraints.size(); ++a) {
        std::vector<std::string> row;
        for (std::size_t i = 0; i < s.constraints[a].size(); ++i)
            row.push_back(to_string(parse_at(s.constraints[a][i], config, s.parameters,
                                             index_path(index_path("constraints", a), i))));
        out.push_back(row);
    }
    return out;
}

Built build(const Scenario& s, std::uint64_t seed) {
    Built b;
    b.probe_seed = seed;
    b.chart = s.chart();
    const auto& names = b.chart.names();
    switch (s.kind) {
        case ScenarioKind::hamiltonian:
            b.ham = HamiltonianSystem{canonical_contact(s.n), scalar_field(parse_at(s.H, names, s.parameters, "H"))};
            break;
        case ScenarioKind::hamilton_jacobi:
            b.ham = HamiltonianSystem{canonical_contact(s.n), scalar_field(parse_at(s.H, names, s.parameters, "H"))};
            try {
                b.section = HJSection(b.chart, s.section, s.parameters);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("section", e.what());
            }
            break;
        case ScenarioKind::lagrangian:
            b.lag = LagrangianSystem::build(parse_at(s.L, names, s.parameters, "L"), b.chart);
            if (!b.lag->regular()) throw SingularLagrangian("L is not regular; use the singular kind");
            break;
        case ScenarioKind::nonholonomic:
            b.lag = LagrangianSystem::build(parse_at(s.L, names, s.parameters, "L"), b.chart);
            b.nh = NonholonomicSystem(*b.lag, LinearConstraints(b.chart, substituted(s, b.chart)));
            break;
        case ScenarioKind::singular:
            if (s.precontact) {
                b.pre = PrecontactSystem::darboux(s.precontact->r, s.precontact->s,
                                                  to_string(parse_at(s.H, names, s.parameters, "H")));
            } else {
                b.lag = LagrangianSystem::build(parse_at(s.L, names, s.parameters, "L"), b.chart);
                b.pre = PrecontactSystem::from_lagrangian(*b.lag);
            }
            break;
    }
    return b;
}

// ==================== loading ====================

Scenario from_json(const json& doc) {
    as_object(doc, "<document>");
    Scenario s;
    s.kind = parse_kind(as_string(require(doc, "kind", ""), "kind"));
    const auto& allowed = kind_keys(s.kind);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        static const std::vector<std::string> all = {
            "kind",     "n",         "coordinates", "H",          "L",       "constraints", "section",
            "precontact", "max_iters", "symmetries", "parameters", "initial", "integrator",  "diagnostics",
            "tolerances", "output"};
        if (std::find(all.begin(), all.end(), it.key()) == all.end()) throw ConfigError(it.key(), "unknown key");
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(it.key(), "not used by kind " + to_string(s.kind));
    }

    if (auto it = doc.find("parameters"); it != doc.end()) {
        for (auto p = as_object(*it, "parameters").begin(); p != it->end(); ++p)
            s.parameters[p.key()] = as_number(p.value(), key_path("parameters", p.key()));
    }

    const bool darboux = s.kind == ScenarioKind::singular && doc.contains("precontact");
    if (darboux) {
        for (const char* k : {"n", "coordinates", "L"})
            if (doc.contains(k)) throw ConfigError(k, "not used with precontact");
        const auto& pc = as_object(doc.at("precontact"), "precontact");
        check_keys(pc, "precontact", {"r", "s"});
        s.precontact = PrecontactSpec{as_count(require(pc, "r", "precontact"), "precontact.r"),
                                      as_count(require(pc, "s", "precontact"), "precontact.s")};
        s.n = s.precontact->r;
    } else {
        s.n = as_count(require(doc, "n", ""), "n");
        if (s.n == 0) throw ConfigError("n", "must be positive");
        if (auto it = doc.find("coordinates"); it != doc.end()) {
            s.coordinates = as_strings(*it, "coordinates");
            if (s.coordinates.size() != s.n) throw ConfigError("coordinates", "expected n names");
            std::set<std::string> uniq(s.coordinates.begin(), s.coordinates.end());
            if (uniq.size() != s.n) throw ConfigError("coordinates", "names must be distinct");
        }
    }
    if (auto it = doc.find("max_iters"); it != doc.end()) s.max_iters = as_count(*it, "max_iters");

    const Chart chart = s.chart();
    const auto& names = chart.names();

    // Expressions
    switch (s.kind) {
        case ScenarioKind::hamiltonian:
        case ScenarioKind::hamilton_jacobi:
            s.H = as_string(require(doc, "H", ""), "H");
            parse_at(s.H, names, s.parameters, "H");
            break;
        case ScenarioKind::lagrangian:
        case ScenarioKind::nonholonomic:
            s.L = as_string(require(doc, "L", ""), "L");
            parse_at(s.L, names, s.parameters, "L");
            break;
        case ScenarioKind::singular:
            if (darboux) {
                s.H = as_string(require(doc, "H", ""), "H");
                parse_at(s.H, names, s.parameters, "H");
            } else {
                if (doc.contains("H")) throw ConfigError("H", "not used with L");
                s.L = as_string(require(doc, "L", ""), "L");
                parse_at(s.L, names, s.parameters, "L");
            }
            break;
    }
    if (s.kind == ScenarioKind::nonholonomic) {
        const auto& rows = as_array(require(doc, "constraints", ""), "constraints");
        for (std::size_t a = 0; a < rows.size(); ++a) {
            auto row = as_strings(rows[a], index_path("constraints", a));
            if (row.size() != s.n) throw ConfigError(index_path("constraints", a), "expected n coefficients");
            s.constraints.push_back(row);
        }
        substituted(s, chart);
    }
    if (s.kind == ScenarioKind::hamilton_jacobi) {
        s.section = as_strings(require(doc, "section", ""), "section");
        if (s.section.size() != s.n) throw ConfigError("section", "expected n components");
        auto base = base_names(chart);
        for (std::size_t j = 0; j < s.n; ++j) parse_at(s.section[j], base, s.parameters, index_path("section", j));
    }
    if (auto it = doc.find("symmetries"); it != doc.end()) {
        const auto& rows = as_array(*it, "symmetries");
        for (std::size_t a = 0; a < rows.size(); ++a) {
            const auto path = index_path("symmetries", a);
            auto row = as_strings(rows[a], path);
            if (row.size() != s.n) throw ConfigError(path, "expected n components");
            std::vector<std::string> subst;
            for (std::size_t i = 0; i < row.size(); ++i)
                subst.push_back(to_string(parse_at(row[i], names, s.parameters, index_path(path, i))));
            try {
                lift(base_field(chart, subst), chart, LiftKind::complete);
            } catch (const InadmissibleLift& e) {
                throw ConfigError(path, e.what());
            }
            s.symmetries.push_back(subst);
        }
    }

    // Initial point and integrator
    if (s.kind != ScenarioKind::singular) {
        s.initial = as_numbers(require(doc, "initial", ""), "initial");
        const std::size_t want = s.kind == ScenarioKind::hamilton_jacobi ? s.n + 1 : chart.dim();
        if (s.initial.size() != want)
            throw ConfigError("initial", "expected " + std::to_string(want) + " coordinates");
        for (std::size_t i = 0; i < s.initial.size(); ++i)
            if (!std::isfinite(s.initial[i])) throw ConfigError(index_path("initial", i), "not finite");

        const auto& in = as_object(require(doc, "integrator", ""), "integrator");
        check_keys(in, "integrator", {"method", "dt", "t_end"});
        IntegratorSpec spec;
        if (auto m = in.find("method"); m != in.end()) {
            auto name = as_string(*m, "integrator.method");
            if (name == "rk4") spec.method = Method::rk4;
            else if (name == "euler") spec.method = Method::euler;
            else throw ConfigError("integrator.method", "expected rk4 or euler");
        }
        spec.dt = as_number(require(in, "dt", "integrator"), "integrator.dt");
        spec.t_end = as_number(require(in, "t_end", "integrator"), "integrator.t_end");
        if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw ConfigError("integrator.dt", "must be positive");
        if (!(spec.t_end >= 0.0) || !std::isfinite(spec.t_end))
            throw ConfigError("integrator.t_end", "must be non-negative");
        s.integrator = spec;
    }

    // Diagnostics and tolerances
    const auto& known = diagnostic_names(s.kind);
    if (auto it = doc.find("diagnostics"); it != doc.end()) {
        auto list = as_strings(*it, "diagnostics");
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (std::find(known.begin(), known.end(), list[i]) == known.end())
                throw ConfigError(index_path("diagnostics", i),
                                  "unknown diagnostic '" + list[i] + "' for kind " + to_string(s.kind));
            if (std::find(s.diagnostics.begin(), s.diagnostics.end(), list[i]) != s.diagnostics.end())
                throw ConfigError(index_path("diagnostics", i), "duplicate diagnostic '" + list[i] + "'");
            s.diagnostics.push_back(list[i]);
        }
    } else {
        s.diagnostics = known;
    }
    if (auto it = doc.find("tolerances"); it != doc.end()) {
        for (auto t = as_object(*it, "tolerances").begin(); t != it->end(); ++t) {
            const auto path = key_path("tolerances", t.key());
            if (std::find(known.begin(), known.end(), t.key()) == known.end()) throw ConfigError(path, "unknown diagnostic");
            const double v = as_number(t.value(), path);
            if (!(v > 0.0)) throw ConfigError(path, "must be positive");
            s.tolerances[t.key()] = v;
        }
    }
    if (auto it = doc.find("output"); it != doc.end()) {
        const auto& out = as_object(*it, "output");
        check_keys(out, "output", {"csv", "report"});
        if (auto c = out.find("csv"); c != out.end()) s.csv = as_string(*c, "output.csv");
        if (auto r = out.find("report"); r != out.end()) s.report = as_string(*r, "output.report");
        if (s.csv.empty()) throw ConfigError("output.csv", "empty file name");
        if (s.report.empty()) throw ConfigError("output.report", "empty file name");
    }

    // The constrained initial point must lie on Δ × R.
    if (s.kind == ScenarioKind::nonholonomic) {
        LinearConstraints c(chart, substituted(s, chart));
        auto v = c.values(std::span<const double>(s.initial));
        for (std::size_t a = 0; a < v.size(); ++a)
            if (!(std::abs(v[a]) <= 1e-9))
                throw ConfigError("initial", "violates constraint " + std::to_string(a) + " by " + format_double(v[a]));
    }
    return s;
}

// ==================== diagnostics ====================

DiagnosticLine summarize(const std::string& name, const std::vector<double>& values, double tol) {
    DiagnosticLine d;
    d.name = name;
    double sum = 0.0;
    for (double v : values) {
        d.max = std::max(d.max, v);
        sum += v;
        if (!std::isfinite(v)) d.max = v;
    }
    if (!values.empty()) d.mean = sum / static_cast<double>(values.size());
    d.pass = std::isfinite(d.max) && d.max < tol;
    return d;
}

/// Rows 1..N of the trajectory, or about `count` of them evenly spaced.
std::vector<std::size_t> sample_rows(const Trajectory& t, std::size_t count = 0) {
    std::vector<std::size_t> rows;
    const std::size_t n = t.states.size();
    if (n <= 1) return rows;
    const std::size_t stride = count == 0 ? 1 : std::max<std::size_t>(1, (n - 1) / count);
    for (std::size_t k = 1; k < n; k += stride) rows.push_back(k);
    if (rows.back() != n - 1) rows.push_back(n - 1);
    return rows;
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

ScalarField product(const ScalarField& f, const ScalarField& g) {
    return ScalarField(f.dim(), 1, [f, g](auto x) { return f(x) * g(x); });
}

std::vector<ScalarField> observables(const Chart& chart, std::size_t count, std::uint64_t seed,
                                     std::size_t degree = 2, std::size_t terms = 3) {
    Rng rng(seed);
    std::vector<ScalarField> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(scalar_field(parse(random_polynomial(chart.names(), rng, degree, terms), chart.names())));
    return out;
}

/// |X(t) − X(0) exp(∫ rate)| with the rate integrated by the trapezoid rule.
std::vector<double> decay_residual(const Trajectory& t, const std::vector<std::size_t>& rows,
                                   const ScalarField& X, const std::function<double(std::span<const double>)>& rate) {
    std::vector<double> out;
    if (rows.empty()) return out;
    const double x0 = X(t.states[0]);
    double integral = 0.0;
    double prev = rate(t.states[0]);
    std::size_t r = 0;
    for (std::size_t k = 1; k < t.states.size() && r < rows.size(); ++k) {
        const double cur = rate(t.states[k]);
        integral += 0.5 * (prev + cur) * (t.times[k] - t.times[k - 1]);
        prev = cur;
        if (rows[r] == k) {
            out.push_back(std::abs(X(t.states[k]) - x0 * std::exp(integral)));
            ++r;
        }
    }
    return out;
}

void hamiltonian_diagnostics(const Scenario& s, const Built& b, const Trajectory& t, RunReport& rep) {
    const auto& sys = *b.ham;
    auto X = hamiltonian_vf(sys);
    auto rows = sample_rows(t);
    for (const auto& name : s.diagnostics) {
        std::vector<double> v;
        if (name == "energy_decay") {
            v = decay_residual(t, rows, sys.H, [&](std::span<const double> x) {
                auto r = sys.structure.reeb(x);
                return -dot(gradient(sys.H, x), r);
            });
        } else if (name == "volume_identity") {
            for (auto k : rows) v.push_back(std::abs(dissipation_report(sys, t.states[k]).r3));
        } else if (name == "dissipation_form") {
            for (auto k : rows) v.push_back(sup_norm(dissipation_report(sys, t.states[k]).r2));
        } else if (name == "eta_identity") {
            for (auto k : rows) {
                std::span<const double> x(t.states[k]);
                v.push_back(std::abs(dot(sys.structure.eta(x), X(x)) + sys.H(x)));
            }
        } else if (name == "section_drift") {
            for (auto k : rows) {
                const auto& y = t.states[k];
                std::vector<double> base(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(s.n));
                base.push_back(y[2 * s.n]);
                auto g = (*b.section)(base);
                double m = 0.0;
                for (std::size_t j = 0; j < s.n; ++j) m = std::max(m, std::abs(y[s.n + j] - g[s.n + j]));
                v.push_back(m);
            }
        } else if (name == "hj_residual" || name == "relatedness" || name == "admissibility") {
            for (const auto& p : random_points(s.n + 1, 20, b.probe_seed)) {
                std::span<const double> x(p);
                if (name == "hj_residual") v.push_back(sup_norm(hj_residual(sys.H, *b.section, x)));
                else if (name == "relatedness") v.push_back(relatedness_residual(sys.H, *b.section, x));
                else {
                    auto a = admissibility(*b.section, x);
                    v.push_back(std::max({a.coiso, a.coiso2, a.coiso3}));
                }
            }
        }
        rep.lines.push_back(summarize(name, v, s.tolerance(name)));
    }
}

void lagrangian_diagnostics(const Scenario& s, const Built& b, const Trajectory& t, RunReport& rep) {
    const auto& sys = *b.lag;
    auto Lf = scalar_field(sys.lagrangian());
    auto E = sys.energy_field();
    auto G = euler_lagrange_vf(sys);
    const std::size_t iz = b.chart.z();
    auto rows = sample_rows(t);
    auto sparse = sample_rows(t, 100);
    for (const auto& name : s.diagnostics) {
        std::vector<double> v;
        if (name == "energy_decay") {
            v = decay_residual(t, rows, E, [&](std::span<const double> x) { return gradient(Lf, x)[iz]; });
        } else if (name == "eta_identity") {
            for (auto k : rows) {
                std::span<const double> x(t.states[k]);
                v.push_back(std::abs(dot(sys.eta(x), G(x)) + E(x)));
            }
        } else if (name == "legendre_equivalence") {
            for (auto k : sparse) v.push_back(legendre_equivalence_residual(sys, t.states[k]));
        } else if (name == "pullback") {
            for (auto k : sparse) v.push_back(pullback_residual(sys, t.states[k]));
        }
        rep.lines.push_back(summarize(name, v, s.tolerance(name)));
    }
}

void nonholonomic_diagnostics(const Scenario& s, const Built& b, const Trajectory& t, RunReport& rep) {
    const auto& nh = *b.nh;
    const auto& sys = nh.lagrangian();
    auto E = sys.energy_field();
    auto gamma = nh.dynamics_field();
    auto r = nh.reeb_field();
    auto obs = observables(b.chart, 3, b.probe_seed);
    auto rows = sample_rows(t);
    auto sparse = sample_rows(t, 20);
    for (const auto& name : s.diagnostics) {
        std::vector<double> v;
        if (name == "constraint_drift") {
            for (auto k : rows) v.push_back(sup_norm(nh.constraints().values(std::span<const double>(t.states[k]))));
        } else if (name == "eta_identity") {
            for (auto k : rows) {
                std::span<const double> x(t.states[k]);
                v.push_back(std::abs(dot(sys.eta(x), nh.dynamics(x)) + E(x)));
            }
        } else if (name == "dissipation") {
            for (auto k : sparse) v.push_back(nh_dissipation_residual(nh, t.states[k]));
        } else if (name == "casimir") {
            for (auto k : sparse) {
                std::span<const double> x(t.states[k]);
                double m = 0.0;
                for (std::size_t a = 0; a < nh.k(); ++a) {
                    auto phi = nh.constraints().constraint_field(a);
                    for (const auto& f : obs) m = std::max(m, std::abs(nh_bracket(nh, phi, f, x)));
                }
                v.push_back(m);
            }
        } else if (name == "evolution_identity") {
            for (auto k : sparse) {
                std::span<const double> x(t.states[k]);
                const double re = directional(E, r, x);
                double m = 0.0;
                for (const auto& f : obs)
                    m = std::max(m, std::abs(directional(f, gamma, x) - (nh_bracket(nh, E, f, x) - f(x) * re)));
                v.push_back(m);
            }
        }
        rep.lines.push_back(summarize(name, v, s.tolerance(name)));
    }
}

/// Runs the constraint algorithm, echoes the ladder and evaluates residuals on the final probes.
void singular_lines(const Scenario& s, const Built& b, RunReport& rep, const std::string& prefix,
                    const std::vector<std::string>& names, bool shift) {
    const auto& pre = *b.pre;
    auto ladder = run_algorithm(pre, s.max_iters, b.probe_seed);
    const std::size_t K = ladder.size();
    rep.echo.push_back("ladder_steps: " + std::to_string(K));
    for (std::size_t i = 0; i < K; ++i) {
        const auto& st = ladder.steps()[i];
        rep.echo.push_back("step " + std::to_string(i + 1) + ": generators=" + std::to_string(st.generators) +
                           " rank=" + std::to_string(st.rank) + " dimension=" + std::to_string(st.dimension) +
                           " max=" + format_double(st.max_value));
    }
    rep.echo.push_back("final_dimension: " + std::to_string(ladder.final_dimension()));
    rep.echo.push_back("final_probes: " + std::to_string(ladder.probes().size()));

    auto closure = [&](const ConstraintLadder& l, std::size_t k, std::span<const double> x) {
        try {
            return sup_norm(l.batch(k, x));
        } catch (const DerivativeDepthExceeded&) {
            throw NoConvergence("ladder deeper than the derivative depth available for closure");
        }
    };
    for (const auto& name : names) {
        std::vector<double> v;
        for (const auto& p : ladder.probes()) {
            std::span<const double> x(p);
            if (name == "constraint_residual") {
                v.push_back(K == 0 ? 0.0 : sup_norm(ladder.constraints(K, x)));
            } else if (name == "closure") {
                v.push_back(closure(ladder, K + 1, x));
            } else if (name == "reeb_residual") {
                auto R = pre.reeb(x);
                auto eta = pre.eta(x);
                auto FR = pre.flat_bar(x) * R;
                double m = std::abs(dot(eta, R) - 1.0);
                for (std::size_t i = 0; i < FR.size(); ++i) m = std::max(m, std::abs(FR[i] - eta[i]));
                v.push_back(m);
            }
        }
        rep.lines.push_back(summarize(prefix + name, v, s.tolerance(name)));
    }
    if (shift) {
        ConstraintLadder shifted(pre.with_reeb_shift(std::vector<double>(pre.dim(), 1.0)));
        std::vector<double> v;
        for (const auto& p : ladder.probes()) {
            double m = 0.0;
            for (std::size_t k = 1; k <= K + 1; ++k) m = std::max(m, closure(shifted, k, p));
            v.push_back(m);
        }
        rep.lines.push_back(summarize(prefix + "shift_independence", v, 1e-8));
    }
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::vector<std::string> echo(const Scenario& s, std::uint64_t seed) {
    std::vector<std::string> e;
    e.push_back("kind: " + to_string(s.kind));
    if (s.precontact)
        e.push_back("precontact: r=" + std::to_string(s.precontact->r) + " s=" + std::to_string(s.precontact->s));
    else
        e.push_back("n: " + std::to_string(s.n));
    if (!s.coordinates.empty()) e.push_back("coordinates: " + join(s.coordinates, ", "));
    if (!s.H.empty()) e.push_back("H: " + s.H);
    if (!s.L.empty()) e.push_back("L: " + s.L);
    for (std::size_t a = 0; a < s.constraints.size(); ++a)
        e.push_back("constraint[" + std::to_string(a) + "]: " + join(s.constraints[a], ", "));
    if (!s.section.empty()) e.push_back("section: " + join(s.section, ", "));
    for (std::size_t a = 0; a < s.symmetries.size(); ++a)
        e.push_back("symmetry[" + std::to_string(a) + "]: " + join(s.symmetries[a], ", "));
    if (!s.parameters.empty()) {
        std::vector<std::string> ps;
        for (const auto& [k, v] : s.parameters) ps.push_back(k + "=" + format_double(v));
        e.push_back("parameters: " + join(ps, ", "));
    }
    if (!s.initial.empty()) {
        std::vector<std::string> xs;
        for (double v : s.initial) xs.push_back(format_double(v));
        e.push_back("initial: " + join(xs, ", "));
    }
    if (s.integrator)
        e.push_back(std::string("integrator: ") + (s.integrator->method == Method::rk4 ? "rk4" : "euler") +
                    " dt=" + format_double(s.integrator->dt) + " t_end=" + format_double(s.integrator->t_end));
    e.push_back("seed: " + std::to_string(seed));
    return e;
}

void add(RunReport& rep, const std::string& name, const std::vector<double>& values, double tol) {
    rep.lines.push_back(summarize(name, values, tol));
}

Trajectory integrate_scenario(const Scenario& s, const VectorField& X, std::span<const double> x0,
                              const Chart& chart) {
    return integrate(X, x0, s.integrator->dt, s.integrator->t_end, s.integrator->method, chart.names());
}

// ==================== suites ====================

bool applies(const std::string& suite, ScenarioKind k) {
    using K = ScenarioKind;
    if (suite == "brackets") return k == K::hamiltonian || k == K::lagrangian || k == K::hamilton_jacobi;
    if (suite == "dissipation") return k != K::singular;
    if (suite == "noether") return k == K::lagrangian;
    if (suite == "hamjac") return k == K::hamilton_jacobi;
    if (suite == "singular") return k == K::singular;
    if (suite == "nonholonomic") return k == K::nonholonomic;
    return false;
}

void brackets_suite(const Built& b, RunReport& rep) {
    const ContactStructure cs = b.ham ? b.ham->structure : b.lag->contact();
    const ScalarField H = b.ham ? b.ham->H : b.lag->energy_field();
    const auto j = jacobi_tensor(cs);
    const auto& names = b.chart.names();
    Rng rng(b.probe_seed);
    auto random = [&] { return scalar_field(parse(random_polynomial(names, rng, 3, 4), names)); };
    std::vector<double> jac, wl, pairing, commutator;
    for (const auto& p : random_points(cs.dim(), 10, b.probe_seed)) {
        std::span<const double> x(p);
        auto f = jac.size() % 2 == 0 ? H : random();
        auto g = random();
        auto h = random();
        jac.push_back(std::abs(jacobi_bracket(j, f, bracket_field(j, g, h), x) +
                               jacobi_bracket(j, g, bracket_field(j, h, f), x) +
                               jacobi_bracket(j, h, bracket_field(j, f, g), x)));
        // {f, gh} − g{f,h} − h{f,g} = gh E(f)
        auto e = j.E(x);
        const double Ef = dot(gradient(f, x), e);
        wl.push_back(std::abs(jacobi_bracket(j, f, product(g, h), x) - g(x) * jacobi_bracket(j, f, h, x) -
                              h(x) * jacobi_bracket(j, f, g, x) - g(x) * h(x) * Ef));
        auto Xf = hamiltonian_vf({cs, f});
        auto Xg = hamiltonian_vf({cs, g});
        const double fg = jacobi_bracket(j, f, g, x);
        pairing.push_back(std::abs(fg - directional(g, Xf, x) - g(x) * dot(gradient(f, x), cs.reeb(x))));
        commutator.push_back(std::abs(fg + dot(cs.eta(x), lie_bracket(Xf, Xg, x))));
    }
    add(rep, "brackets.jacobi_identity", jac, 1e-7);
    add(rep, "brackets.weak_leibniz", wl, 1e-8);
    add(rep, "brackets.hamiltonian_pairing", pairing, 1e-7);
    add(rep, "brackets.eta_commutator", commutator, 1e-7);
}

void dissipation_suite(const Built& b, RunReport& rep) {
    if (b.nh) {
        std::vector<double> r, pairing;
        for (const auto& p : constraint_probes(*b.nh, 10, b.probe_seed)) {
            r.push_back(nh_dissipation_residual(*b.nh, p));
            pairing.push_back(nh_correction_pairing(*b.nh, p));
        }
        add(rep, "dissipation.constrained", r, 1e-7);
        add(rep, "dissipation.correction_pairing", pairing, 1e-8);
        return;
    }
    const HamiltonianSystem sys = b.ham ? *b.ham : HamiltonianSystem{b.lag->contact(), b.lag->energy_field()};
    auto X = hamiltonian_vf(sys);
    std::vector<double> r1, r2, r3, eta, herglotz;
    for (const auto& p : random_points(sys.structure.dim(), 20, b.probe_seed)) {
        std::span<const double> x(p);
        auto d = dissipation_report(sys, x);
        r1.push_back(std::abs(d.r1));
        r2.push_back(sup_norm(d.r2));
        r3.push_back(std::abs(d.r3));
        auto xh = X(x);
        eta.push_back(std::abs(dot(sys.structure.eta(x), xh) + sys.H(x)));
        if (b.lag) {
            auto g = b.lag->euler_lagrange(x);
            double m = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i] - xh[i]));
            herglotz.push_back(m);
        }
    }
    add(rep, "dissipation.energy_rate", r1, 1e-8);
    add(rep, "dissipation.eta_form", r2, 1e-8);
    // The coordinate divergence measures the contact volume only in Darboux charts.
    if (sys.structure.is_canonical()) add(rep, "dissipation.divergence", r3, 1e-8);
    add(rep, "dissipation.eta_identity", eta, sys.structure.is_canonical() ? 1e-10 : 1e-9);
    if (b.lag) add(rep, "dissipation.herglotz_field", herglotz, 1e-8);
}

void noether_suite(const Scenario& s, const Built& b, RunReport& rep) {
    const auto& sys = *b.lag;
    auto probes = random_points(sys.dim(), 20, b.probe_seed);
    auto fields = s.symmetries;
    if (fields.empty()) {
        auto Lf = scalar_field(sys.lagrangian());
        for (std::size_t i = 0; i < s.n; ++i) {
            bool cyclic = true;
            for (const auto& p : probes) cyclic = cyclic && gradient(Lf, p)[i] == 0.0;
            if (!cyclic) continue;
            std::vector<std::string> y(s.n, "0");
            y[i] = "1";
            fields.push_back(y);
            rep.echo.push_back("cyclic: " + b.chart.names()[i]);
        }
    }
    if (fields.empty()) throw ConfigError("symmetries", "no symmetry given and no cyclic coordinate found");
    auto traj = integrate_scenario(s, euler_lagrange_vf(sys), s.initial, b.chart);
    for (std::size_t a = 0; a < fields.size(); ++a) {
        auto X = base_field(b.chart, fields[a]);
        auto r = noether_check(sys, X, probes);
        const std::string tag = "noether[" + std::to_string(a) + "].";
        add(rep, tag + "symmetry", {r.residual_a}, 1e-10);
        add(rep, tag + "dissipated", {r.residual_b}, 1e-8);
        add(rep, tag + "conserved_ratio", {conserved_ratio(sys, noether_quantity(sys, X), traj)}, 1e-6);
    }
}

void hamjac_suite(const Scenario& s, const Built& b, RunReport& rep) {
    std::vector<double> hj, rel, adm, disagree;
    for (const auto& p : random_points(s.n + 1, 20, b.probe_seed)) {
        std::span<const double> x(p);
        hj.push_back(sup_norm(hj_residual(b.ham->H, *b.section, x)));
        rel.push_back(relatedness_residual(b.ham->H, *b.section, x));
        auto a = admissibility(*b.section, x);
        adm.push_back(std::max({a.coiso, a.coiso2, a.coiso3}));
        disagree.push_back((hj.back() < 1e-6) == (rel.back() < 1e-6) ? 0.0 : 1.0);
    }
    add(rep, "hamjac.admissibility", adm, 1e-8);
    add(rep, "hamjac.hj_residual", hj, 1e-6);
    add(rep, "hamjac.relatedness", rel, 1e-6);
    add(rep, "hamjac.biconditional", disagree, 0.5);
}

void nonholonomic_suite(const Built& b, RunReport& rep) {
    const auto& nh = *b.nh;
    const auto& sys = nh.lagrangian();
    auto E = sys.energy_field();
    auto gamma = nh.dynamics_field();
    auto r = nh.reeb_field();
    auto obs = observables(b.chart, 3, b.probe_seed);
    auto probes = constraint_probes(nh, 10, b.probe_seed);
    std::vector<double> casimir, evo, eta, forms;
    for (const auto& p : probes) {
        std::span<const double> x(p);
        double c = 0.0, e = 0.0;
        for (std::size_t a = 0; a < nh.k(); ++a) {
            auto phi = nh.constraints().constraint_field(a);
            for (const auto& f : obs) c = std::max(c, std::abs(nh_bracket(nh, phi, f, x)));
        }
        const double re = directional(E, r, x);
        for (const auto& f : obs)
            e = std::max(e, std::abs(directional(f, gamma, x) - (nh_bracket(nh, E, f, x) - f(x) * re)));
        casimir.push_back(c);
        evo.push_back(e);
        auto h = constrained_hvf_report(nh, E, x);
        eta.push_back(h.eta_residual);
        forms.push_back(std::max(h.form_ii, h.form_iii));
    }
    add(rep, "nonholonomic.casimir", casimir, 1e-7);
    add(rep, "nonholonomic.evolution_identity", evo, 1e-7);
    add(rep, "nonholonomic.eta_identity", eta, 1e-8);
    add(rep, "nonholonomic.hvf_forms", forms, 1e-8);

    // The bracket satisfies the Jacobi identity exactly when Δ is involutive.
    auto ir = integrability_report(nh, observables(b.chart, 5, b.probe_seed + 1), constraint_probes(nh, 4, b.probe_seed));
    const bool involutive = ir.involutivity < 1e-8;
    const bool agree = involutive ? ir.jacobiator < 1e-8 : ir.jacobiator > 1e-6;
    rep.echo.push_back(std::string("distribution: ") + (involutive ? "involutive" : "not involutive"));
    DiagnosticLine inv{"nonholonomic.involutivity", ir.involutivity, ir.involutivity, agree};
    DiagnosticLine jac{"nonholonomic.jacobiator", ir.jacobiator, ir.jacobiator, agree};
    rep.lines.push_back(inv);
    rep.lines.push_back(jac);
}

}  // namespace

// ==================== scenario ====================

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::hamiltonian: return "hamiltonian";
        case ScenarioKind::lagrangian: return "lagrangian";
        case ScenarioKind::nonholonomic: return "nonholonomic";
        case ScenarioKind::singular: return "singular";
        case ScenarioKind::hamilton_jacobi: return "hamilton-jacobi";
    }
    return "hamiltonian";
}

Chart Scenario::chart() const {
    if (kind == ScenarioKind::hamiltonian || kind == ScenarioKind::hamilton_jacobi) return Chart::cotangent(n);
    if (precontact) return Chart::precontact(precontact->r, precontact->s);
    return coordinates.empty() ? Chart::tangent(n) : Chart::tangent(coordinates);
}

double Scenario::tolerance(const std::string& diagnostic) const {
    if (auto it = tolerances.find(diagnostic); it != tolerances.end()) return it->second;
    if (kind == ScenarioKind::hamiltonian && diagnostic == "eta_identity") return 1e-10;
    return default_tolerances().at(diagnostic);
}

const std::vector<std::string>& diagnostic_names(ScenarioKind k) {
    static const std::vector<std::string> ham = {"energy_decay", "volume_identity", "dissipation_form",
                                                 "eta_identity"};
    static const std::vector<std::string> lag = {"energy_decay", "eta_identity", "legendre_equivalence",
                                                 "pullback"};
    static const std::vector<std::string> nh = {"constraint_drift", "eta_identity", "dissipation", "casimir",
                                                "evolution_identity"};
    static const std::vector<std::string> sing = {"constraint_residual", "closure", "reeb_residual"};
    static const std::vector<std::string> hj = {"section_drift", "hj_residual", "relatedness", "admissibility"};
    switch (k) {
        case ScenarioKind::hamiltonian: return ham;
        case ScenarioKind::lagrangian: return lag;
        case ScenarioKind::nonholonomic: return nh;
        case ScenarioKind::singular: return sing;
        case ScenarioKind::hamilton_jacobi: return hj;
    }
    return ham;
}

Scenario load_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    return from_json(doc);
}

Scenario load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<document>", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_string(ss.str());
}

// ==================== run ====================

bool RunReport::passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const DiagnosticLine& d) { return d.pass; });
}

std::string RunReport::text() const {
    std::string out;
    for (const auto& e : echo) out += e + "\n";
    for (const auto& d : lines)
        out += d.name + ": max=" + format_double(d.max) + " mean=" + format_double(d.mean) + " " +
               (d.pass ? "PASS" : "FAIL") + "\n";
    return out;
}

RunResult run(const Scenario& s, std::uint64_t seed) {
    Built b = build(s, seed);
    RunResult out;
    out.report.echo = echo(s, seed);
    if (s.kind == ScenarioKind::singular) {
        singular_lines(s, b, out.report, "", s.diagnostics, false);
        return out;
    }

    std::vector<double> x0 = s.initial;
    if (s.kind == ScenarioKind::hamilton_jacobi) x0 = (*b.section)(s.initial);
    const VectorField X = b.ham ? hamiltonian_vf(*b.ham) : b.nh ? b.nh->dynamics_field() : euler_lagrange_vf(*b.lag);
    Trajectory t = integrate_scenario(s, X, x0, b.chart);
    out.report.echo.push_back("rows: " + std::to_string(t.states.size()));

    switch (s.kind) {
        case ScenarioKind::hamiltonian:
        case ScenarioKind::hamilton_jacobi: hamiltonian_diagnostics(s, b, t, out.report); break;
        case ScenarioKind::lagrangian: lagrangian_diagnostics(s, b, t, out.report); break;
        case ScenarioKind::nonholonomic: nonholonomic_diagnostics(s, b, t, out.report); break;
        case ScenarioKind::singular: break;
    }
    out.trajectory = std::move(t);
    return out;
}

void write_outputs(const Scenario& s, const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (r.trajectory) {
        std::ofstream csv(dir / s.csv, std::ios::binary);
        write_csv(csv, *r.trajectory);
        if (!csv) throw Error("cannot write " + (dir / s.csv).string());
    }
    std::ofstream rep(dir / s.report, std::ios::binary);
    rep << r.report.text();
    if (!rep) throw Error("cannot write " + (dir / s.report).string());
}

// ==================== verify ====================

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"brackets", "dissipation",  "noether", "hamjac",
                                                   "singular", "nonholonomic", "all"};
    return names;
}

RunReport verify(const Scenario& s, const std::string& suite, std::uint64_t seed) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw UnknownSuite("unknown suite '" + suite + "'");
    std::vector<std::string> suites;
    if (suite == "all") {
        for (const auto& n : names)
            if (applies(n, s.kind)) suites.push_back(n);
    } else {
        if (!applies(suite, s.kind))
            throw ConfigError("suite", "suite " + suite + " does not apply to kind " + to_string(s.kind));
        suites.push_back(suite);
    }

    Built b = build(s, seed);
    RunReport rep;
    rep.echo = echo(s, seed);
    rep.echo.push_back("suite: " + suite);
    for (const auto& name : suites) {
        if (name == "brackets") brackets_suite(b, rep);
        else if (name == "dissipation") dissipation_suite(b, rep);
        else if (name == "noether") noether_suite(s, b, rep);
        else if (name == "hamjac") hamjac_suite(s, b, rep);
        else if (name == "singular")
            singular_lines(s, b, rep, "singular.", diagnostic_names(ScenarioKind::singular), true);
        else if (name == "nonholonomic") nonholonomic_suite(b, rep);
    }
    return rep;
}

}  // namespace cmech
