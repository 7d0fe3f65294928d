#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cmech/scenario.hpp"
#include "oracles.hpp"

using namespace cmech;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(CMECH_SOURCE_DIR) / "scenarios";

const char* kDamped = R"({
  "kind": "hamiltonian", "n": 1, "H": "p^2/2 + q^2/2 + gamma*z", "parameters": {"gamma": 0.1},
  "initial": [1, 0, 0], "integrator": {"method": "rk4", "dt": 1e-3, "t_end": 10},
  "diagnostics": ["energy_decay", "volume_identity"]
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

ConfigError config_error(const std::string& text) {
    try {
        load_string(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected ConfigError");
    return ConfigError("", "");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CMECH_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("cmech_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

// ==================== loading ====================

TEST_CASE("loading a valid scenario") {
    auto s = load(kScenarios / "damped_oscillator.json");
    CHECK(s.kind == ScenarioKind::hamiltonian);
    CHECK(s.n == 1);
    CHECK(s.parameters.at("gamma") == 0.1);
    REQUIRE(s.integrator);
    CHECK(s.integrator->dt == 1e-3);
    CHECK(s.integrator->t_end == 10.0);
    CHECK(s.diagnostics == std::vector<std::string>{"energy_decay", "volume_identity"});
    CHECK(s.chart().names() == std::vector<std::string>{"q", "p", "z"});

    auto nh = load(kScenarios / "nonholonomic_particle.json");
    CHECK(nh.kind == ScenarioKind::nonholonomic);
    CHECK(nh.chart().names() == std::vector<std::string>{"x", "y", "w", "vx", "vy", "vw", "z"});
    CHECK(nh.diagnostics.size() == 5);

    auto dflt = load_string(replace(kDamped, R"(,
  "diagnostics": ["energy_decay", "volume_identity"])", ""));
    CHECK(dflt.diagnostics == diagnostic_names(ScenarioKind::hamiltonian));
    CHECK(dflt.tolerance("eta_identity") == 1e-10);
}

TEST_CASE("configuration errors carry the key path") {
    auto dt = config_error(replace(kDamped, R"("dt": 1e-3, )", ""));
    CHECK(dt.key_path == "integrator.dt");
    CHECK(std::string(dt.what()).find("required") != std::string::npos);

    auto h = config_error(replace(kDamped, "p^2/2 + q^2/2", "p^^2"));
    CHECK(h.key_path == "H");
    CHECK(std::string(h.what()).find("offset 2") != std::string::npos);

    CHECK(config_error(replace(kDamped, R"("n": 1,)", R"("n": 1, "damping": 0.1,)")).key_path == "damping");
    CHECK(config_error(replace(kDamped, R"("t_end": 10)", R"("t_end": 10, "order": 4)")).key_path ==
          "integrator.order");
    CHECK(config_error(replace(kDamped, R"("n": 1,)", R"("n": 1, "L": "v^2",)")).key_path == "L");
    CHECK(config_error(replace(kDamped, "[1, 0, 0]", "[1, 0]")).key_path == "initial");
    CHECK(config_error(replace(kDamped, R"("n": 1)", R"("n": "one")")).key_path == "n");
    CHECK(config_error(replace(kDamped, "\"rk4\"", "\"leapfrog\"")).key_path == "integrator.method");
    CHECK(config_error(replace(kDamped, "1e-3", "-1e-3")).key_path == "integrator.dt");
    CHECK(config_error(replace(kDamped, "\"volume_identity\"", "\"energy_decay\"")).key_path == "diagnostics[1]");
    CHECK(config_error(replace(kDamped, "\"volume_identity\"", "\"casimir\"")).key_path == "diagnostics[1]");
    CHECK(config_error(replace(kDamped, R"("n": 1,)", R"("n": 1, "tolerances": {"bogus": 1},)")).key_path ==
          "tolerances.bogus");
    CHECK(config_error(replace(kDamped, "\"hamiltonian\"", "\"quantum\"")).key_path == "kind");
    CHECK(config_error("{\"kind\": ").key_path == "<document>");
    CHECK(config_error(replace(kDamped, "gamma*z", "beta*z")).key_path == "H");
    CHECK_THROWS_AS(load(kScenarios / "invalid" / "unknown_key.json"), ConfigError);
    CHECK_THROWS_AS(load(kScenarios / "missing.json"), ConfigError);
}

TEST_CASE("nonholonomic initial points must satisfy the constraints") {
    const std::string base = slurp(kScenarios / "nonholonomic_particle.json");
    // Φ = vw − y vx at (y, vx, vw) = (1, 1, 1 + δ)
    auto off = [&](const std::string& vw) { return replace(base, "[0, 1, 0, 1, 1, 1, 0]", "[0, 1, 0, 1, 1, " + vw + ", 0]"); };
    CHECK_NOTHROW(load_string(off("1.0000000000001")));
    CHECK(config_error(off("1.00000001")).key_path == "initial");
    CHECK(config_error(replace(base, R"(["-y", "0", "1"])", R"(["-y", "1"])")).key_path == "constraints[0]");
    CHECK(config_error(replace(base, R"(["-y", "0", "1"])", R"(["-y", "0", "1^"])")).key_path == "constraints[0][2]");
}

// ==================== running ====================

TEST_CASE("damped oscillator run") {
    auto s = load(kScenarios / "damped_oscillator.json");
    auto r = run(s);
    REQUIRE(r.trajectory);
    CHECK(r.trajectory->states.size() == 10001);
    CHECK(r.report.passed());
    REQUIRE(r.report.lines.size() == 2);
    CHECK(r.report.lines[0].name == "energy_decay");
    CHECK(r.report.lines[1].name == "volume_identity");

    double err = 0.0;
    for (std::size_t k = 0; k < r.trajectory->states.size(); ++k)
        err = std::max(err, std::abs(r.trajectory->states[k][0] - oracle::damped_closed_form(r.trajectory->times[k], 0.1)));
    CHECK(err < 1e-6);

    const std::regex line(R"(^[a-z_]+: max=\S+ mean=\S+ (PASS|FAIL)$)");
    std::istringstream text(r.report.text());
    std::size_t matched = 0;
    for (std::string l; std::getline(text, l);) matched += std::regex_match(l, line) ? 1 : 0;
    CHECK(matched == 2);
    CHECK(r.report.text().find("time") == std::string::npos);
}

TEST_CASE("zero-length integration") {
    auto s = load_string(replace(kDamped, R"("t_end": 10)", R"("t_end": 0)"));
    auto r = run(s);
    REQUIRE(r.trajectory);
    CHECK(r.trajectory->states.size() == 1);
    CHECK(r.report.passed());
    for (const auto& d : r.report.lines) {
        CHECK(d.max == 0.0);
        CHECK(d.mean == 0.0);
    }
    auto dir = scratch("zero");
    write_outputs(s, r, dir);
    auto csv = slurp(dir / "trajectory.csv");
    CHECK(csv == "t,q,p,z\n0,1,0,0\n");
}

TEST_CASE("outputs are deterministic and LF-terminated") {
    auto s = load(kScenarios / "nonholonomic_particle.json");
    auto a = scratch("det_a"), b = scratch("det_b");
    write_outputs(s, run(s, 7), a);
    write_outputs(s, run(s, 7), b);
    const auto csv = slurp(a / "trajectory.csv");
    CHECK(csv == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "report.txt") == slurp(b / "report.txt"));
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5002);

    // Full 17-digit round trip of every value.
    std::istringstream rows(csv);
    std::string header, first, second;
    std::getline(rows, header);
    std::getline(rows, first);
    std::getline(rows, second);
    CHECK(header == "t,x,y,w,vx,vy,vw,z");
    auto r = run(s, 7);
    std::istringstream cells(second);
    std::string cell;
    std::getline(cells, cell, ',');
    CHECK(std::stod(cell) == r.trajectory->times[1]);
    for (double v : r.trajectory->states[1]) {
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == v);
    }

    auto other = run(s, 8);
    CHECK(other.report.text() != r.report.text());
}

TEST_CASE("per-kind run diagnostics") {
    auto nh = run(load(kScenarios / "nonholonomic_particle.json"));
    CHECK(nh.report.passed());
    CHECK(nh.report.lines[0].name == "constraint_drift");
    CHECK(nh.report.lines[0].max < 1e-6);

    auto lag = run(load(kScenarios / "damped_lagrangian.json"));
    CHECK(lag.report.passed());
    CHECK(lag.report.lines.size() == 4);

    auto sing = run(load(kScenarios / "singular_lagrangian.json"));
    CHECK_FALSE(sing.trajectory);
    CHECK(sing.report.passed());
    CHECK(sing.report.text().find("ladder_steps: 1\n") != std::string::npos);
    CHECK(sing.report.text().find("step 1: generators=5 rank=1 dimension=4") != std::string::npos);

    auto dar = run(load(kScenarios / "darboux_precontact.json"));
    CHECK(dar.report.text().find("step 1: generators=4 rank=1 dimension=3") != std::string::npos);

    auto hj = run(load(kScenarios / "hamilton_jacobi.json"));
    CHECK(hj.report.passed());

    // A non-solution pair fails the Hamilton–Jacobi residuals.
    auto bad = load_string(replace(slurp(kScenarios / "hamilton_jacobi.json"), "\"0.5*q\"", "\"0.5*q + 0.2\""));
    CHECK_FALSE(run(bad).report.passed());
}

// ==================== verification ====================

TEST_CASE("verify suites") {
    auto damped = load(kScenarios / "damped_oscillator.json");
    auto br = verify(damped, "brackets");
    REQUIRE(br.lines.size() == 4);
    CHECK(br.lines[0].name == "brackets.jacobi_identity");
    CHECK(br.lines[1].name == "brackets.weak_leibniz");
    CHECK(br.passed());

    auto nh = verify(load(kScenarios / "nonholonomic_particle.json"), "nonholonomic");
    CHECK(nh.passed());
    std::vector<std::string> names;
    for (const auto& d : nh.lines) names.push_back(d.name);
    CHECK(names == std::vector<std::string>{"nonholonomic.casimir", "nonholonomic.evolution_identity",
                                            "nonholonomic.eta_identity", "nonholonomic.hvf_forms",
                                            "nonholonomic.involutivity", "nonholonomic.jacobiator"});
    CHECK(nh.lines[5].max > 1e-6);

    auto lag = load(kScenarios / "damped_lagrangian.json");
    CHECK(verify(lag, "all").passed());
    CHECK(verify(lag, "noether").lines.size() == 3);
    CHECK(verify(load(kScenarios / "hamilton_jacobi.json"), "hamjac").passed());
    CHECK(verify(load(kScenarios / "darboux_precontact.json"), "singular").passed());

    CHECK_THROWS_AS(verify(damped, "bogus"), UnknownSuite);
    CHECK_THROWS_AS(verify(damped, "noether"), ConfigError);

    auto no_sym = load_string(replace(slurp(kScenarios / "damped_lagrangian.json"), "(v1^2", "q1*(v1^2"));
    CHECK_THROWS_AS(verify(no_sym, "noether"), ConfigError);
}

TEST_CASE("command line exit codes") {
    auto dir = scratch("exit");
    const std::string damped = (kScenarios / "damped_oscillator.json").string();
    CHECK(cli("run " + damped + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "report.txt"));

    std::ofstream(dir / "strict.json") << replace(kDamped, R"("n": 1,)", R"("n": 1, "tolerances": {"energy_decay": 1e-300},)");
    CHECK(cli("run " + (dir / "strict.json").string() + " --out " + dir.string()) == 1);

    CHECK(cli("run " + (kScenarios / "invalid" / "unknown_key.json").string() + " --out " + dir.string()) == 2);
    CHECK(cli("verify " + damped + " --suite bogus") == 2);
    CHECK(cli("verify " + damped + " --suite brackets") == 0);
    CHECK(cli("verify " + damped + " --suite brackets --seed 17") == 0);
    CHECK(cli("frobnicate") == 2);

    // q'' = 3q² escapes to infinity before t = 10.
    std::ofstream(dir / "blowup.json") << replace(kDamped, "p^2/2 + q^2/2", "p^2/2 - q^3");
    CHECK(cli("run " + (dir / "blowup.json").string() + " --out " + dir.string()) == 2);
}
