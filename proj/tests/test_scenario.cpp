#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rbsde/io.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/scenario.hpp"
#include "support.hpp"

using namespace rbsde;
using nlohmann::json;

TEST_CASE("registry lists the built-in scenarios, sorted and unique") {
    auto& reg = ScenarioRegistry::instance();
    auto names = reg.names();
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
    for (const char* name : {"counterexample", "american-put", "two-sided-demo",
                             "random-tree-demo"})
        CHECK(reg.contains(name));

    const auto before = names.size();
    reg.add("zz-registered-by-test",
            [] { return ScenarioRegistry::instance().build("counterexample"); });
    CHECK(reg.names().size() == before + 1);
    CHECK(reg.contains("zz-registered-by-test"));
}

TEST_CASE("counterexample scenario passes every pinned check") {
    ScenarioOutcome out = run_scenario(load_scenario("counterexample"));
    CHECK(out.exit_code == 0);
    REQUIRE(!out.summary.empty());
    for (std::size_t i = 1; i < out.summary.size(); ++i)
        CHECK(out.summary[i].rfind("pass ", 0) == 0);

    REQUIRE(out.files.count("counterexample-solution.csv") == 1);
    REQUIRE(out.files.count("counterexample-report.csv") == 1);
    const std::string& report = out.files.at("counterexample-report.csv");
    for (const char* check : {"values", "projected-identity", "pathwise-identity",
                              "zero-lower-force", "invariants", "oracle"})
        CHECK(report.find(check) != std::string::npos);
    const std::string& solution = out.files.at("counterexample-solution.csv");
    CHECK(solution.rfind("step,time,atom,outcomes,Y", 0) == 0);
    CHECK(solution.find("w1|w2") != std::string::npos);
}

TEST_CASE("scenario runs are byte-deterministic") {
    json cfg = load_scenario("counterexample");
    ScenarioOutcome a = run_scenario(cfg);
    ScenarioOutcome b = run_scenario(cfg);
    CHECK(a.exit_code == b.exit_code);
    CHECK(a.summary == b.summary);
    REQUIRE(a.files.size() == b.files.size());
    for (const auto& [file, content] : a.files) {
        REQUIRE(b.files.count(file) == 1);
        CHECK(content == b.files.at(file));
    }
}

TEST_CASE("checks are evaluated against the projection regardless of method") {
    json cfg = load_scenario("counterexample");
    cfg["solver"] = {{"method", "penalization"}, {"n", 1e6}};
    ScenarioOutcome out = run_scenario(cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.summary.front().find("penalization") != std::string::npos);

    cfg["solver"] = {{"method", "picard"}};
    CHECK(run_scenario(cfg).exit_code == 0);
}

TEST_CASE("config errors name the offending key") {
    json broken = {{"name", "broken"},
                   {"space", {{"constructor", "counterexample"}}},
                   {"data", json::object()}};
    try {
        run_scenario(broken);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("terminal") != std::string::npos);
    }

    json bad_check = load_scenario("counterexample");
    bad_check["checks"] = json::array();
    bad_check["checks"].push_back(json{{"check", "bogus"}});
    try {
        run_scenario(bad_check);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    json bad_method = load_scenario("counterexample");
    bad_method["solver"] = {{"method", "quantum"}};
    try {
        run_scenario(bad_method);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("quantum") != std::string::npos);
    }

    CHECK_THROWS_AS(load_scenario("definitely-not-registered"), ConfigError);
}

TEST_CASE("a minimal inline config runs without checks") {
    json cfg = {{"name", "tiny"},
                {"space", {{"constructor", "binomial"}, {"steps", 2}}},
                {"data", {{"terminal", {{"constant", 1.0}}}}},
                {"generator", {{"name", "zero"}}}};
    ScenarioOutcome out = run_scenario(cfg);
    CHECK(out.exit_code == 0);
    CHECK(out.files.count("tiny-solution.csv") == 1);
    CHECK(out.files.count("tiny-report.csv") == 1);
}

TEST_CASE("scenario configs load from files as well as the registry") {
    json cfg = load_scenario("counterexample");
    const auto path =
        std::filesystem::temp_directory_path() / "rbsde-scenario-copy.json";
    write_text_file(path.string(), cfg.dump(2) + "\n");
    json reloaded = load_scenario(path.string());
    std::filesystem::remove(path);
    CHECK(reloaded == cfg);
    CHECK(run_scenario(reloaded).exit_code == 0);
}

TEST_CASE("space serialization round-trips bit-exactly") {
    for (std::uint64_t seed : {321u, 322u}) {
        SpacePtr sp = random_tree_space(seed, {4, 1, 3, true});
        json j = space_to_json(*sp);
        SpacePtr back = space_from_json(j);
        CHECK(back->outcome_count() == sp->outcome_count());
        CHECK(back->steps() == sp->steps());
        CHECK(space_to_json(*back).dump() == j.dump());
        for (int w = 0; w < sp->outcome_count(); ++w) {
            CHECK(back->outcome(w).id == sp->outcome(w).id);
            CHECK(back->prob(w) == sp->prob(w));
        }
        for (int k = 0; k <= sp->steps(); ++k) CHECK(back->time(k) == sp->time(k));
    }
}

TEST_CASE("inline spaces and processes assemble from json") {
    json cfg;
    cfg["name"] = "inline";
    cfg["space"] = space_to_json(*counterexample_space());
    cfg["data"]["terminal"] = {5.0, 1.0};
    cfg["data"]["lower"]["rows"] = {{2.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}};
    cfg["generator"]["name"] = "zero";
    json expect;
    expect["step"] = 0;
    expect["outcome"] = "w1";
    expect["value"] = 3.0;
    json check;
    check["check"] = "values";
    check["expect"] = json::array({expect});
    cfg["checks"] = json::array({check});

    ScenarioOutcome out = run_scenario(cfg);
    CHECK(out.exit_code == 0);
}

TEST_CASE("american put scenario solves and sweeps cleanly") {
    ScenarioOutcome run = run_scenario(load_scenario("american-put"));
    CHECK(run.exit_code == 0);
    CHECK(run.files.count("american-put-solution.csv") == 1);

    ScenarioOutcome sweep = run_scenario_sweep(load_scenario("american-put"));
    CHECK(sweep.exit_code == 0);
    REQUIRE(sweep.files.count("american-put-sweep.csv") == 1);
    CHECK(sweep.files.at("american-put-sweep.csv").find("max_error") != std::string::npos);
}

TEST_CASE("remaining built-in scenarios pass their own checks") {
    for (const char* name : {"two-sided-demo", "random-tree-demo"}) {
        ScenarioOutcome out = run_scenario(load_scenario(name));
        CHECK(out.exit_code == 0);
    }
}

TEST_CASE("constructor validation: binomial and trinomial limits") {
    CHECK_THROWS_AS(binomial_space(0), ValidationError);
    CHECK_THROWS_AS(binomial_space(17), ValidationError);
    CHECK_THROWS_AS(binomial_space(3, 0.0), ValidationError);
    CHECK_THROWS_AS(binomial_space(3, 1.0), ValidationError);
    CHECK_THROWS_AS(trinomial_space(2, 0.5, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(trinomial_space(11, 1.0 / 3, 1.0 / 3, 1.0 / 3), ValidationError);
}
