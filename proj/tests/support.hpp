#pragma once

// Shared builders for the unit tests.  Everything here is deliberately
// small and hand-checkable; randomized coverage lives in the suites.

#include <cmath>
#include <utility>
#include <vector>

#include "rbsde/filtration.hpp"
#include "rbsde/process.hpp"

namespace testsupport {

/// One outcome, the given time grid: every process is deterministic.
inline rbsde::SpacePtr single_path_space(std::vector<double> times) {
    std::vector<std::vector<std::vector<int>>> partitions(times.size(), {{0}});
    return rbsde::FilteredSpace::create({{"w", 1.0}}, std::move(times),
                                        std::move(partitions));
}

/// Two outcomes revealed at step 1, arbitrary up-probability, times {0, 1}.
inline rbsde::SpacePtr coin_space(double p_first = 0.5) {
    return rbsde::FilteredSpace::create({{"a", p_first}, {"b", 1.0 - p_first}},
                                        {0.0, 1.0}, {{{0, 1}}, {{0}, {1}}});
}

/// Six outcomes, split {a,b,c} | {d,e,f} at step 1, singletons at step 2.
inline rbsde::SpacePtr six_outcome_space() {
    std::vector<rbsde::Outcome> outs{{"a", 0.10}, {"b", 0.20}, {"c", 0.15},
                                     {"d", 0.25}, {"e", 0.20}, {"f", 0.10}};
    return rbsde::FilteredSpace::create(
        std::move(outs), {0.0, 0.5, 1.0},
        {{{0, 1, 2, 3, 4, 5}}, {{0, 1, 2}, {3, 4, 5}}, {{0}, {1}, {2}, {3}, {4}, {5}}});
}

/// Largest entry-wise gap between two grids of identical shape.
inline double grid_gap(const rbsde::ProcessGrid& a, const rbsde::ProcessGrid& b) {
    double worst = 0.0;
    for (int k = 0; k < a.rows(); ++k)
        for (int w = 0; w < a.space().outcome_count(); ++w)
            worst = std::max(worst, std::abs(a.at(k, w) - b.at(k, w)));
    return worst;
}

}  // namespace testsupport
