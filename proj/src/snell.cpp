#include "rbsde/snell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbsde {

void SnellProblem::validate() const {
    reward.validate();
    running.validate();
    const FilteredSpace& sp = space();
    if (static_cast<int>(terminal.size()) != sp.outcome_count())
        throw ValidationError("terminal reward has wrong outcome count");
    if (!sp.constant_on(terminal, sp.steps()))
        throw ValidationError("terminal reward not measurable at the horizon");
    for (int w = 0; w < sp.outcome_count(); ++w)
        if (running.at(0, w) != 0.0)
            throw ValidationError("running reward must start at 0");
}

AdaptedProcess snell_envelope(const SnellProblem& problem) {
    const FilteredSpace& sp = problem.space();
    AdaptedProcess y(problem.reward.space_ptr());
    y.row(sp.steps()) = problem.terminal;
    for (int k = sp.steps() - 1; k >= 0; --k) {
        std::vector<double> next(sp.outcome_count());
        for (int w = 0; w < sp.outcome_count(); ++w)
            next[w] = y.at(k + 1, w) + problem.running.at(k + 1, w) - problem.running.at(k, w);
        const auto cond = sp.cond_expect(next, k);
        for (int w = 0; w < sp.outcome_count(); ++w)
            y.at(k, w) = std::max(problem.reward.at(k, w), cond[w]);
    }
    return y;
}

std::vector<double> snell_oracle(const SnellProblem& problem, int start,
                                 std::uint64_t max_count) {
    const FilteredSpace& sp = problem.space();
    const int n = sp.steps();
    std::vector<double> values(sp.atom_count(start));
    for (int a = 0; a < sp.atom_count(start); ++a) {
        const auto rules = enumerate_stopping_times_on_atom(sp, start, a, max_count);
        double best = -std::numeric_limits<double>::infinity();
        for (const StoppingTime& tau : rules) {
            // Flat conditional expectation of the stopped payoff over the atom.
            double acc = 0.0;
            for (int w : sp.atom(start, a).members) {
                const int stop = tau.value[w];
                double pay = problem.running.at(stop, w) - problem.running.at(start, w);
                pay += stop < n ? problem.reward.at(stop, w) : problem.terminal[w];
                acc += sp.prob(w) * pay;
            }
            best = std::max(best, acc / sp.atom(start, a).prob);
        }
        values[a] = best;
    }
    return values;
}

double recursion_identity_gap(const SnellProblem& problem, const AdaptedProcess& y) {
    const FilteredSpace& sp = problem.space();
    double worst = 0.0;
    for (int k = 1; k <= sp.steps(); ++k) {
        const auto cond_y = sp.cond_expect(y.row(k), k - 1);
        const auto cond_dv = sp.cond_expect(problem.running.increment(k), k - 1);
        for (int a = 0; a < sp.atom_count(k - 1); ++a) {
            const int w0 = sp.atom(k - 1, a).members.front();
            const double rhs = std::max(problem.reward.at(k - 1, w0), cond_y[w0] + cond_dv[w0]);
            worst = std::max(worst, std::abs(y.at(k - 1, w0) - rhs));
        }
    }
    return worst;
}

PathwiseGaps pathwise_recursion_gap(const SnellProblem& problem, const AdaptedProcess& y) {
    const FilteredSpace& sp = problem.space();
    PathwiseGaps g;
    g.gap.assign(sp.steps() + 1, std::vector<double>(sp.outcome_count(), 0.0));
    for (int k = 1; k <= sp.steps(); ++k) {
        for (int w = 0; w < sp.outcome_count(); ++w) {
            const double dv = problem.running.at(k, w) - problem.running.at(k - 1, w);
            const double rhs = std::max(problem.reward.at(k - 1, w), y.at(k, w) + dv);
            g.gap[k][w] = std::abs(y.at(k - 1, w) - rhs);
            g.max_gap = std::max(g.max_gap, g.gap[k][w]);
        }
    }
    return g;
}

}  // namespace rbsde
