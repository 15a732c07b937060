#include "rbsde/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbsde {

namespace {

/// Payoff of the pair on one outcome; single source of truth for every
/// evaluation path (pathwise op, parallel kernel, serial reference).
double payoff_one(const DynkinGame& game, int sigma_w, int tau_w, int w, int start) {
    const RBSDEInput& in = *game.data;
    const FilteredSpace& sp = *in.space;
    const int n = sp.steps();
    const int stop = std::min(sigma_w, tau_w);
    double acc = 0.0;
    for (int j = start; j < stop; ++j)
        acc += in.driver(j, w, game.value->at(j, w), {}) * sp.dt(j);
    acc += in.drift.at(stop, w) - in.drift.at(start, w);
    if (stop == n)
        acc += in.terminal[w];
    else if (tau_w <= sigma_w)
        acc += in.lower->at(tau_w, w);
    else
        acc += in.upper->at(sigma_w, w);
    return acc;
}

double payoff_on_atom(const DynkinGame& game, const StoppingTime& sigma,
                      const StoppingTime& tau, int start, const FilteredSpace::Atom& atom) {
    const FilteredSpace& sp = game.space();
    double acc = 0.0;
    for (int w : atom.members)
        acc += sp.prob(w) * payoff_one(game, sigma.value[w], tau.value[w], w, start);
    return acc / atom.prob;
}

void check_pair_budget(std::uint64_t count, std::uint64_t max_count) {
    if (count > 1 && count > max_count / count)
        throw CountExceeded("stopping-time pair count " + std::to_string(count) + "^2 exceeds " +
                            std::to_string(max_count));
}

}  // namespace

void DynkinGame::validate() const {
    if (!data || !value) throw ValidationError("game is missing data or value process");
    data->validate();
    if (!data->lower || !data->upper)
        throw ValidationError("a stopping game needs both barriers");
    if (data->driver.depends_on_z)
        throw ValidationError("game drivers must not depend on z");
    if (value->rows() != data->space->steps() + 1)
        throw ValidationError("value process has wrong row count");
}

std::vector<double> game_payoff(const DynkinGame& game, const StoppingTime& sigma,
                                const StoppingTime& tau, int start) {
    const FilteredSpace& sp = game.space();
    std::vector<double> out(sp.outcome_count());
    for (int w = 0; w < sp.outcome_count(); ++w) {
        if (sigma.value[w] < start || tau.value[w] < start)
            throw ValidationError("stopping time acts before the game start");
        out[w] = payoff_one(game, sigma.value[w], tau.value[w], w, start);
    }
    return out;
}

AdaptedProcess game_value_induction(const DynkinGame& game) {
    game.validate();
    const RBSDEInput& in = *game.data;
    const FilteredSpace& sp = *in.space;
    AdaptedProcess wv(in.space);
    wv.row(sp.steps()) = in.terminal;
    for (int k = sp.steps() - 1; k >= 0; --k) {
        std::vector<double> next(sp.outcome_count());
        for (int w = 0; w < sp.outcome_count(); ++w)
            next[w] = wv.at(k + 1, w) + in.drift.at(k + 1, w) - in.drift.at(k, w);
        const auto cond = sp.cond_expect(next, k);
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const int w0 = sp.atom(k, a).members.front();
            const double e =
                cond[w0] + in.driver(k, w0, game.value->at(k, w0), {}) * sp.dt(k);
            const double v = std::clamp(e, in.lower->at(k, w0), in.upper->at(k, w0));
            wv.set_atom(k, k, a, v);
        }
    }
    return wv;
}

GameValues game_values(const DynkinGame& game, std::uint64_t max_count, int start) {
    game.validate();
    const FilteredSpace& sp = game.space();
    GameValues out;
    out.sigma_star.value.assign(sp.outcome_count(), sp.steps());
    out.tau_star.value.assign(sp.outcome_count(), sp.steps());
    out.lower.resize(sp.atom_count(start));
    out.upper.resize(sp.atom_count(start));

    for (int a = 0; a < sp.atom_count(start); ++a) {
        check_pair_budget(stopping_time_count(sp, start, a, max_count), max_count);
        const auto rules = enumerate_stopping_times_on_atom(sp, start, a, max_count);
        const int nt = static_cast<int>(rules.size());
        const auto& atom = sp.atom(start, a);

        std::vector<double> ce(static_cast<std::size_t>(nt) * nt);
        const long pairs = static_cast<long>(nt) * nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (pairs >= 256)
#endif
        for (long p = 0; p < pairs; ++p) {
            const int s = static_cast<int>(p / nt);
            const int t = static_cast<int>(p % nt);
            ce[p] = payoff_on_atom(game, rules[s], rules[t], start, atom);
        }

        // max over tau of the sigma-guaranteed floor; min over sigma of the
        // tau-achievable ceiling.  Serial scans keep tie-breaks (and bytes)
        // deterministic.
        double lower = -std::numeric_limits<double>::infinity();
        int best_t = 0;
        for (int t = 0; t < nt; ++t) {
            double floor = std::numeric_limits<double>::infinity();
            for (int s = 0; s < nt; ++s)
                floor = std::min(floor, ce[static_cast<std::size_t>(s) * nt + t]);
            if (floor > lower) {
                lower = floor;
                best_t = t;
            }
        }
        double upper = std::numeric_limits<double>::infinity();
        int best_s = 0;
        for (int s = 0; s < nt; ++s) {
            double ceiling = -std::numeric_limits<double>::infinity();
            for (int t = 0; t < nt; ++t)
                ceiling = std::max(ceiling, ce[static_cast<std::size_t>(s) * nt + t]);
            if (ceiling < upper) {
                upper = ceiling;
                best_s = s;
            }
        }
        out.lower[a] = lower;
        out.upper[a] = upper;
        for (int w : atom.members) {
            out.sigma_star.value[w] = rules[best_s].value[w];
            out.tau_star.value[w] = rules[best_t].value[w];
        }
    }
    return out;
}

GameValues game_values_reference(const DynkinGame& game, std::uint64_t max_count, int start) {
    game.validate();
    const FilteredSpace& sp = game.space();
    GameValues out;
    out.sigma_star.value.assign(sp.outcome_count(), sp.steps());
    out.tau_star.value.assign(sp.outcome_count(), sp.steps());
    out.lower.resize(sp.atom_count(start));
    out.upper.resize(sp.atom_count(start));

    for (int a = 0; a < sp.atom_count(start); ++a) {
        check_pair_budget(stopping_time_count(sp, start, a, max_count), max_count);
        const auto rules = enumerate_stopping_times_on_atom(sp, start, a, max_count);
        const int nt = static_cast<int>(rules.size());

        double lower = -std::numeric_limits<double>::infinity();
        int best_t = 0;
        for (int t = 0; t < nt; ++t) {
            double floor = std::numeric_limits<double>::infinity();
            for (int s = 0; s < nt; ++s) {
                const auto pay = game_payoff(game, rules[s], rules[t], start);
                floor = std::min(floor, sp.cond_expect_atom(pay, start, a));
            }
            if (floor > lower) {
                lower = floor;
                best_t = t;
            }
        }
        double upper = std::numeric_limits<double>::infinity();
        int best_s = 0;
        for (int s = 0; s < nt; ++s) {
            double ceiling = -std::numeric_limits<double>::infinity();
            for (int t = 0; t < nt; ++t) {
                const auto pay = game_payoff(game, rules[s], rules[t], start);
                ceiling = std::max(ceiling, sp.cond_expect_atom(pay, start, a));
            }
            if (ceiling < upper) {
                upper = ceiling;
                best_s = s;
            }
        }
        out.lower[a] = lower;
        out.upper[a] = upper;
        for (int w : sp.atom(start, a).members) {
            out.sigma_star.value[w] = rules[best_s].value[w];
            out.tau_star.value[w] = rules[best_t].value[w];
        }
    }
    return out;
}

}  // namespace rbsde
