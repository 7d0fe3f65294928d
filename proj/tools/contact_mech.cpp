#include <CLI11.hpp>

#include <iostream>

#include "cmech/errors.hpp"
#include "cmech/scenario.hpp"

/// Exit codes: 0 all diagnostics pass, 1 a diagnostic fails, 2 configuration or numerical error.
int main(int argc, char** argv) {
    CLI::App app{"Contact mechanics scenario runner"};
    app.require_subcommand(1);

    std::uint64_t seed = cmech::default_seed;
    app.add_option("--seed", seed, "Probe seed")->capture_default_str();

    std::string run_path, out_dir = ".";
    auto* run = app.add_subcommand("run", "Integrate a scenario and write trajectory.csv and report.txt");
    run->fallthrough();
    run->add_option("scenario", run_path, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();

    std::string verify_path, suite;
    auto* verify = app.add_subcommand("verify", "Run a property suite at the scenario's system");
    verify->fallthrough();
    verify->add_option("scenario", verify_path, "Scenario JSON file")->required();
    verify->add_option("--suite", suite, "brackets | dissipation | noether | hamjac | singular | nonholonomic | all")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            auto s = cmech::load(run_path);
            auto result = cmech::run(s, seed);
            cmech::write_outputs(s, result, out_dir);
            std::cout << result.report.text();
            return result.report.passed() ? 0 : 1;
        }
        auto s = cmech::load(verify_path);
        auto report = cmech::verify(s, suite, seed);
        std::cout << report.text();
        return report.passed() ? 0 : 1;
    } catch (const cmech::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
