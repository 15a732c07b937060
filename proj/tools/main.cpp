// Command-line front end: scenarios, penalization sweeps, property suites
// and the empirical-constant calibration.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbsde/errors.hpp"
#include "rbsde/generator.hpp"
#include "rbsde/io.hpp"
#include "rbsde/parallel.hpp"
#include "rbsde/scenario.hpp"
#include "rbsde/suites.hpp"

namespace {

void write_outcome_files(const rbsde::ScenarioOutcome& outcome, const std::string& out_dir) {
    for (const auto& [name, content] : outcome.files) {
        const std::string path = out_dir + "/" + name;
        rbsde::write_text_file(path, content);
        std::printf("wrote %s\n", path.c_str());
    }
}

void print_suite(const rbsde::SuiteResult& suite) {
    for (const rbsde::CheckRow& c : suite.checks)
        std::printf("%s  %s/%s: worst %.3e, bound %.3e (%d instances)\n",
                    c.pass ? "pass" : "FAIL", suite.suite.c_str(), c.name.c_str(), c.worst,
                    c.bound, c.instances);
    for (const rbsde::SuiteResult::Timing& t : suite.timings)
        std::printf("%s  %s/%s: %.3f s, budget %.3f s\n", t.pass ? "pass" : "FAIL",
                    suite.suite.c_str(), t.name.c_str(), t.seconds, t.budget);
}

int run_command(const std::string& config_name, const std::string& out_dir, bool sweep) {
    const nlohmann::json config = rbsde::load_scenario(config_name);
    const rbsde::ScenarioOutcome outcome =
        sweep ? rbsde::run_scenario_sweep(config) : rbsde::run_scenario(config);
    for (const std::string& line : outcome.summary) std::printf("%s\n", line.c_str());
    write_outcome_files(outcome, out_dir);
    return outcome.exit_code;
}

int check_command(const std::string& target, std::uint64_t seed, int instances,
                  const std::string& out_dir) {
    std::vector<rbsde::SuiteResult> results;
    if (target == "all") {
        results = rbsde::run_battery(seed);
    } else {
        results.push_back(rbsde::run_suite(target, seed, instances));
    }
    bool ok = true;
    for (const rbsde::SuiteResult& suite : results) {
        print_suite(suite);
        ok = ok && suite.pass();
    }
    if (!out_dir.empty()) {
        const std::string path = out_dir + "/" +
                                 (target == "all" ? "battery-report.csv"
                                                  : target + "-suite.csv");
        rbsde::write_text_file(path, target == "all" ? rbsde::battery_report(results)
                                                     : results.front().csv());
        std::printf("wrote %s\n", path.c_str());
    }
    return ok ? 0 : 1;
}

void list_command() {
    std::printf("scenarios:\n");
    for (const std::string& name : rbsde::ScenarioRegistry::instance().names())
        std::printf("  %s\n", name.c_str());
    std::printf("suites:\n");
    for (const std::string& name : rbsde::suite_names()) std::printf("  %s\n", name.c_str());
    std::printf("generators:\n");
    for (const std::string& name : rbsde::GeneratorRegistry::instance().names())
        std::printf("  %s\n", name.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    rbsde::apply_thread_cap();

    CLI::App app{"Desk-scale laboratory for reflected backward equations on finite "
                 "filtered probability spaces"};
    app.require_subcommand(1);

    std::string config_name, out_dir = ".", check_target = "all";
    std::uint64_t seed = rbsde::kDefaultSeed;
    int instances = 0;

    CLI::App* run = app.add_subcommand("run", "Run a scenario (registry name or JSON file)");
    run->add_option("config", config_name, "scenario name or config path")->required();
    run->add_option("--out", out_dir, "directory for report files");

    CLI::App* sweep = app.add_subcommand("sweep", "Penalization sweep for a scenario");
    sweep->add_option("config", config_name, "scenario name or config path")->required();
    sweep->add_option("--out", out_dir, "directory for report files");

    std::string check_out;
    CLI::App* check = app.add_subcommand("check", "Run a property suite ('all' = battery)");
    check->add_option("suite", check_target, "suite name or 'all'");
    check->add_option("--seed", seed, "master seed");
    check->add_option("--instances", instances, "instance count override (0 = default)");
    check->add_option("--out", check_out, "directory for the CSV report");

    CLI::App* list = app.add_subcommand("list", "List scenarios, suites and generators");

    std::string calibrate_out;
    int calibrate_instances = 40;
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Re-measure and write the empirical-constant fixture");
    calibrate->add_option("--seed", seed, "master seed");
    calibrate->add_option("--instances", calibrate_instances, "estimate-family size");
    calibrate->add_option("--out", calibrate_out, "fixture path (default: committed fixture)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_name, out_dir, /*sweep=*/false);
        if (sweep->parsed()) return run_command(config_name, out_dir, /*sweep=*/true);
        if (check->parsed()) return check_command(check_target, seed, instances, check_out);
        if (list->parsed()) {
            list_command();
            return 0;
        }
        if (calibrate->parsed()) {
            const std::string path =
                calibrate_out.empty() ? rbsde::default_fixtures_path() : calibrate_out;
            rbsde::write_text_file(path, rbsde::calibrate_constants(seed, calibrate_instances));
            std::printf("wrote %s (seed %llu, %d instances)\n", path.c_str(),
                        static_cast<unsigned long long>(seed), calibrate_instances);
            return 0;
        }
    } catch (const rbsde::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const rbsde::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
