#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbsde/solver.hpp"

namespace rbsde {

/// The two-outcome space with a predictable drop: times {0, 1, 2}, the
/// split revealed at step 1, P(w1) = P(w2) = 1/2.  With reward
/// L = (2, 0, 0), terminal (5, 1) and no driver it is the canonical case
/// where the envelope jumps at a predictable time: the projected one-step
/// identity holds while its pathwise version fails by exactly 1 on w2.
SpacePtr counterexample_space();

/// Non-recombining binomial path tree on a uniform grid over [0, 1];
/// outcome ids spell the move sequence ('u'/'d').
SpacePtr binomial_space(int steps, double up_prob = 0.5);

/// Ternary path tree; probabilities (down, mid, up) must sum to 1.
SpacePtr trinomial_space(int steps, double p_down, double p_mid, double p_up);

/// Named, self-contained scenario configs (inline space + data + checks).
class ScenarioRegistry {
  public:
    static ScenarioRegistry& instance();

    void add(const std::string& name, std::function<nlohmann::json()> builder);
    bool contains(const std::string& name) const;
    nlohmann::json build(const std::string& name) const;
    std::vector<std::string> names() const;  ///< sorted, unique

  private:
    ScenarioRegistry();
    std::map<std::string, std::function<nlohmann::json()>> builders_;
};

/// Registry name, or a path to a JSON config file.
nlohmann::json load_scenario(const std::string& name_or_path);

struct ScenarioOutcome {
    int exit_code = 0;                         ///< 0 iff every check passed
    std::vector<std::string> summary;          ///< one line per check
    std::map<std::string, std::string> files;  ///< file name -> content
};

/// Executes a scenario config: assembles the instance, solves with the
/// configured method (the CSV reports that method's solution), evaluates
/// the configured checks against the projection solution, and returns the
/// report files.  Deterministic: identical configs give identical bytes.
/// Throws ConfigError naming the offending key on malformed input.
ScenarioOutcome run_scenario(const nlohmann::json& config);

/// Penalization sweep entry point used by the CLI `sweep` subcommand:
/// schedule from config key "sweep.schedule" or a dyadic default, result
/// added to the outcome files; exit nonzero unless the error column
/// decreases monotonically to below `bound` with all monotone flags set.
ScenarioOutcome run_scenario_sweep(const nlohmann::json& config);

/// The assembled instance of a scenario config (exposed for tests/suites).
RBSDEInput scenario_input(const nlohmann::json& config);

}  // namespace rbsde
