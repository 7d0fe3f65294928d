#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmech/calculus.hpp"
#include "cmech/chart.hpp"
#include "cmech/probe.hpp"

namespace cmech {

// ==================== scenario description ====================

enum class ScenarioKind { hamiltonian, lagrangian, nonholonomic, singular, hamilton_jacobi };

std::string to_string(ScenarioKind k);

struct IntegratorSpec {
    Method method = Method::rk4;
    double dt = 0.0;
    double t_end = 0.0;
};

/// Darboux precontact chart (x, y, z, u) of class 2r + 1 with s kernel directions.
struct PrecontactSpec {
    std::size_t r = 0;
    std::size_t s = 0;
};

/// One validated scenario document.
///
/// Keys: kind, n, coordinates, H, L, constraints, section, precontact, max_iters, symmetries,
/// parameters, initial, integrator {method, dt, t_end}, diagnostics, tolerances, output {csv, report}.
struct Scenario {
    ScenarioKind kind = ScenarioKind::hamiltonian;
    std::size_t n = 0;
    std::vector<std::string> coordinates;  // configuration names; empty for the default chart
    std::string H;
    std::string L;
    std::vector<std::vector<std::string>> constraints;  // Φ^a_i over the configuration names
    std::vector<std::string> section;                   // γ_j over (q, z)
    std::optional<PrecontactSpec> precontact;
    std::size_t max_iters = 10;
    std::vector<std::vector<std::string>> symmetries;  // base fields Y^i(q)
    std::map<std::string, double> parameters;
    std::vector<double> initial;
    std::optional<IntegratorSpec> integrator;
    std::vector<std::string> diagnostics;
    std::map<std::string, double> tolerances;
    std::string csv = "trajectory.csv";
    std::string report = "report.txt";

    /// Chart on which `initial` and the trajectory live.
    Chart chart() const;
    double tolerance(const std::string& diagnostic) const;
};

/// Diagnostics accepted by a kind, in report order.
const std::vector<std::string>& diagnostic_names(ScenarioKind k);

/// Strict parse: unknown keys, wrong types and unparsable expressions raise ConfigError with the key path.
Scenario load(const std::filesystem::path& path);
Scenario load_string(const std::string& text);

// ==================== reports ====================

struct DiagnosticLine {
    std::string name;
    double max = 0.0;
    double mean = 0.0;
    bool pass = true;
};

struct RunReport {
    std::vector<std::string> echo;  // "key: value" lines describing the scenario
    std::vector<DiagnosticLine> lines;

    bool passed() const;
    /// Echo lines, then one "name: max=… mean=… PASS|FAIL" line per diagnostic.
    std::string text() const;
};

struct RunResult {
    std::optional<Trajectory> trajectory;  // absent for singular scenarios
    RunReport report;
};

/// Builds the system, integrates and evaluates the requested diagnostics. Probes use `seed`.
RunResult run(const Scenario& s, std::uint64_t seed = default_seed);

/// Writes the CSV (when a trajectory exists) and the report under `dir`.
void write_outputs(const Scenario& s, const RunResult& r, const std::filesystem::path& dir);

// ==================== property suites ====================

const std::vector<std::string>& suite_names();

/// Runs a property suite at the scenario's system. Throws UnknownSuite for names outside suite_names(),
/// ConfigError when the suite does not apply to the scenario kind.
RunReport verify(const Scenario& s, const std::string& suite, std::uint64_t seed = default_seed);

}  // namespace cmech
