#include "rbsde/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rbsde/tolerances.hpp"

namespace rbsde {

namespace {

std::string describe(int k, int a) {
    std::ostringstream os;
    os << "(step " << k << ", atom " << a << ")";
    return os.str();
}

}  // namespace

SpacePtr FilteredSpace::create(std::vector<Outcome> outcomes,
                               std::vector<double> times,
                               std::vector<std::vector<std::vector<int>>> partitions) {
    auto space = std::shared_ptr<FilteredSpace>(new FilteredSpace());
    const int n_out = static_cast<int>(outcomes.size());
    if (n_out == 0) throw ValidationError("space needs at least one outcome");
    double mass = 0.0;
    for (int i = 0; i < n_out; ++i) {
        if (!(outcomes[i].prob > 0.0))
            throw ValidationError("outcome '" + outcomes[i].id + "' has non-positive probability");
        mass += outcomes[i].prob;
        for (int j = 0; j < i; ++j)
            if (outcomes[j].id == outcomes[i].id)
                throw ValidationError("duplicate outcome id '" + outcomes[i].id + "'");
    }
    if (std::abs(mass - 1.0) > tol::kProbSum)
        throw ValidationError("outcome probabilities sum to " + std::to_string(mass) + ", not 1");

    if (times.size() < 2) throw ValidationError("time grid needs at least two points");
    if (times.front() != 0.0) throw ValidationError("time grid must start at 0");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1]))
            throw ValidationError("time grid must be strictly increasing");

    if (partitions.size() != times.size())
        throw ValidationError("need exactly one partition per grid point");

    const int levels = static_cast<int>(times.size());
    space->outcomes_ = std::move(outcomes);
    space->times_ = std::move(times);
    space->levels_.resize(levels);
    space->atom_of_.assign(levels, std::vector<int>(n_out, -1));

    for (int k = 0; k < levels; ++k) {
        auto& level = space->levels_[k];
        for (const auto& members : partitions[k]) {
            if (members.empty()) throw ValidationError("empty atom at step " + std::to_string(k));
            Atom atom;
            atom.members = members;
            std::sort(atom.members.begin(), atom.members.end());
            for (int w : atom.members) {
                if (w < 0 || w >= n_out)
                    throw ValidationError("atom refers to unknown outcome at step " + std::to_string(k));
                if (space->atom_of_[k][w] != -1)
                    throw ValidationError("outcome '" + space->outcomes_[w].id +
                                          "' appears in two atoms at step " + std::to_string(k));
                space->atom_of_[k][w] = static_cast<int>(level.size());
                atom.prob += space->outcomes_[w].prob;
            }
            level.push_back(std::move(atom));
        }
        for (int w = 0; w < n_out; ++w)
            if (space->atom_of_[k][w] == -1)
                throw ValidationError("outcome '" + space->outcomes_[w].id +
                                      "' missing from partition at step " + std::to_string(k));
    }

    // Refinement: every atom at k+1 sits inside exactly one atom at k.
    for (int k = 0; k + 1 < levels; ++k) {
        for (int a = 0; a < space->atom_count(k + 1); ++a) {
            auto& child = space->levels_[k + 1][a];
            const int parent = space->atom_of_[k][child.members.front()];
            for (int w : child.members)
                if (space->atom_of_[k][w] != parent)
                    throw ValidationError("partition at step " + std::to_string(k + 1) +
                                          " does not refine step " + std::to_string(k) +
                                          " at atom " + std::to_string(a));
            child.parent = parent;
            space->levels_[k][parent].children.push_back(a);
        }
        for (int a = 0; a < space->atom_count(k); ++a) {
            auto& atom = space->levels_[k][a];
            std::sort(atom.children.begin(), atom.children.end());
            space->max_children_ = std::max(space->max_children_,
                                            static_cast<int>(atom.children.size()));
        }
    }
    return space;
}

double FilteredSpace::cond_expect_atom(std::span<const double> x, int k, int a) const {
    const Atom& atom = levels_[k][a];
    double acc = 0.0;
    for (int w : atom.members) acc += outcomes_[w].prob * x[w];
    return acc / atom.prob;
}

std::vector<double> FilteredSpace::cond_expect(std::span<const double> x, int k) const {
    std::vector<double> out(outcomes_.size());
    for (int a = 0; a < atom_count(k); ++a) {
        const double v = cond_expect_atom(x, k, a);
        for (int w : levels_[k][a].members) out[w] = v;
    }
    return out;
}

double FilteredSpace::expect(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t w = 0; w < outcomes_.size(); ++w) acc += outcomes_[w].prob * x[w];
    return acc;
}

bool FilteredSpace::constant_on(std::span<const double> x, int k) const {
    for (const Atom& atom : levels_[k]) {
        const double v = x[atom.members.front()];
        for (int w : atom.members)
            if (x[w] != v) return false;
    }
    return true;
}

void StoppingTime::validate(const FilteredSpace& space) const {
    if (static_cast<int>(value.size()) != space.outcome_count())
        throw ValidationError("stopping time has wrong outcome count");
    const int n = space.steps();
    for (int w = 0; w < space.outcome_count(); ++w)
        if (value[w] < 0 || value[w] > n)
            throw ValidationError("stopping time value out of range");
    // {value = k} must be a union of atoms of partitions[k]: on each atom at
    // step k, either every member stops at k or none does.
    for (int k = 0; k <= n; ++k) {
        for (int a = 0; a < space.atom_count(k); ++a) {
            const auto& members = space.atom(k, a).members;
            const bool first = value[members.front()] == k;
            for (int w : members)
                if ((value[w] == k) != first)
                    throw ValidationError("stopping set at step " + std::to_string(k) +
                                          " splits atom " + std::to_string(a));
        }
    }
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
    if (a == 0 || b == 0) return 0;
    if (a > cap / b) return cap + 1 > cap ? cap + 1 : cap;  // saturate just above cap
    const std::uint64_t p = a * b;
    return p > cap ? cap + 1 : p;
}

std::uint64_t count_rec(const FilteredSpace& space, int k, int a, std::uint64_t cap) {
    if (k == space.steps()) return 1;
    std::uint64_t prod = 1;
    for (int c : space.atom(k, a).children) {
        prod = saturating_mul(prod, count_rec(space, k + 1, c, cap), cap);
        if (prod > cap) return prod;
    }
    return prod > cap ? prod : prod + 1;  // +1 for the stop-now rule
}

/// All stop/continue rules on the subtree rooted at (k, a), materialized as
/// per-outcome values for the atom's members only.
void rules_rec(const FilteredSpace& space, int k, int a, std::vector<int>& scratch,
               std::vector<std::vector<int>>& out) {
    const auto& atom = space.atom(k, a);
    // Rule 1: stop now on the whole atom (forced at the horizon).
    for (int w : atom.members) scratch[w] = k;
    out.push_back(scratch);
    if (k == space.steps()) return;
    // Otherwise: continue, choosing one rule per child independently.
    std::vector<std::vector<std::vector<int>>> child_rules;
    child_rules.reserve(atom.children.size());
    for (int c : atom.children) {
        std::vector<std::vector<int>> sub;
        rules_rec(space, k + 1, c, scratch, sub);
        child_rules.push_back(std::move(sub));
    }
    std::vector<std::size_t> pick(child_rules.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < child_rules.size(); ++i) {
            const auto& rule = child_rules[i][pick[i]];
            for (int w : space.atom(k + 1, atom.children[i]).members) scratch[w] = rule[w];
        }
        out.push_back(scratch);
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < child_rules[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
}

}  // namespace

std::uint64_t stopping_time_count(const FilteredSpace& space, int k, int a,
                                  std::uint64_t cap) {
    return count_rec(space, k, a, cap);
}

std::uint64_t stopping_time_count(const FilteredSpace& space, int start, std::uint64_t cap) {
    std::uint64_t total = 1;
    for (int a = 0; a < space.atom_count(start); ++a) {
        total = saturating_mul(total, count_rec(space, start, a, cap), cap);
        if (total > cap) return total;
    }
    return total;
}

std::vector<StoppingTime> enumerate_stopping_times_on_atom(const FilteredSpace& space,
                                                           int k, int a,
                                                           std::uint64_t max_count) {
    const std::uint64_t count = count_rec(space, k, a, max_count);
    if (count > max_count)
        throw CountExceeded("stopping-time count at " + describe(k, a) + " exceeds " +
                            std::to_string(max_count));
    std::vector<int> scratch(space.outcome_count(), space.steps());
    std::vector<std::vector<int>> raw;
    raw.reserve(count);
    rules_rec(space, k, a, scratch, raw);
    std::vector<StoppingTime> out;
    out.reserve(raw.size());
    for (auto& v : raw) out.push_back(StoppingTime{std::move(v)});
    return out;
}

std::vector<StoppingTime> enumerate_stopping_times(const FilteredSpace& space,
                                                   std::uint64_t max_count, int start) {
    const std::uint64_t count = stopping_time_count(space, start, max_count);
    if (count > max_count)
        throw CountExceeded("stopping-time count from step " + std::to_string(start) +
                            " exceeds " + std::to_string(max_count));
    // Cartesian product of per-atom rule sets across the atoms of
    // partitions[start].
    std::vector<std::vector<StoppingTime>> per_atom;
    per_atom.reserve(space.atom_count(start));
    for (int a = 0; a < space.atom_count(start); ++a)
        per_atom.push_back(enumerate_stopping_times_on_atom(space, start, a, max_count));

    std::vector<StoppingTime> out;
    out.reserve(count);
    std::vector<std::size_t> pick(per_atom.size(), 0);
    while (true) {
        StoppingTime tau;
        tau.value.assign(space.outcome_count(), space.steps());
        for (std::size_t a = 0; a < per_atom.size(); ++a) {
            const auto& rule = per_atom[a][pick[a]];
            for (int w : space.atom(start, static_cast<int>(a)).members)
                tau.value[w] = rule.value[w];
        }
        out.push_back(std::move(tau));
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < per_atom[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return out;
}

}  // namespace rbsde
