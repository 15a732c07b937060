#include "rbsde/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rbsde {

namespace {

/// Atom counts are capped per level so deep trees cannot blow up the
/// outcome set; splitting simply stops once a level is wide enough.
constexpr int kLevelWidthCap = 256;

}  // namespace

SpacePtr random_tree_space(std::uint64_t seed, const TreeOptions& opt) {
    if (opt.steps < 1) throw ValidationError("tree needs at least one step");
    if (opt.min_branch < 1 || opt.max_branch < opt.min_branch)
        throw ValidationError("bad branch range");
    Rng rng(seed);

    std::vector<double> times{0.0};
    if (opt.irregular_times) {
        std::vector<double> raw(opt.steps);
        double total = 0.0;
        for (double& r : raw) {
            r = rng.uniform(0.5, 1.5);
            total += r;
        }
        double acc = 0.0;
        for (int k = 0; k < opt.steps; ++k) {
            acc += raw[k] / total;
            times.push_back(k + 1 == opt.steps ? 1.0 : acc);
        }
    } else {
        for (int k = 1; k <= opt.steps; ++k)
            times.push_back(static_cast<double>(k) / opt.steps);
    }

    // Grow level-synchronously; children of consecutive parents are
    // consecutive, so every atom's leaf set is a contiguous range.
    struct Level {
        std::vector<double> prob;
        std::vector<int> child_begin, child_count;
    };
    std::vector<Level> levels(opt.steps + 1);
    levels[0].prob = {1.0};
    for (int k = 0; k < opt.steps; ++k) {
        Level& cur = levels[k];
        Level& next = levels[k + 1];
        const int width = static_cast<int>(cur.prob.size());
        cur.child_begin.resize(width);
        cur.child_count.resize(width);
        for (int i = 0; i < width; ++i) {
            const int allowed = width >= kLevelWidthCap ? 1 : opt.max_branch;
            const int lo = std::min(opt.min_branch, allowed);
            const int b = lo + static_cast<int>(rng.next_below(
                                   static_cast<std::uint64_t>(allowed - lo + 1)));
            cur.child_begin[i] = static_cast<int>(next.prob.size());
            cur.child_count[i] = b;
            std::vector<double> w(b);
            double total = 0.0;
            for (double& wi : w) {
                wi = rng.uniform(0.2, 1.0);
                total += wi;
            }
            for (int j = 0; j < b; ++j) next.prob.push_back(cur.prob[i] * w[j] / total);
        }
    }

    const int leaves = static_cast<int>(levels[opt.steps].prob.size());
    std::vector<Outcome> outcomes(leaves);
    for (int i = 0; i < leaves; ++i)
        outcomes[i] = {"w" + std::to_string(i), levels[opt.steps].prob[i]};

    // Leaf ranges per node, back to front.
    std::vector<std::vector<std::pair<int, int>>> range(opt.steps + 1);
    range[opt.steps].resize(leaves);
    for (int i = 0; i < leaves; ++i) range[opt.steps][i] = {i, 1};
    for (int k = opt.steps - 1; k >= 0; --k) {
        const Level& cur = levels[k];
        range[k].resize(cur.prob.size());
        for (std::size_t i = 0; i < cur.prob.size(); ++i) {
            const int first = range[k + 1][cur.child_begin[i]].first;
            int count = 0;
            for (int j = 0; j < cur.child_count[i]; ++j)
                count += range[k + 1][cur.child_begin[i] + j].second;
            range[k][i] = {first, count};
        }
    }

    std::vector<std::vector<std::vector<int>>> partitions(opt.steps + 1);
    for (int k = 0; k <= opt.steps; ++k) {
        partitions[k].reserve(range[k].size());
        for (const auto& [first, count] : range[k]) {
            std::vector<int> atom(count);
            std::iota(atom.begin(), atom.end(), first);
            partitions[k].push_back(std::move(atom));
        }
    }
    return FilteredSpace::create(std::move(outcomes), std::move(times), std::move(partitions));
}

AdaptedProcess random_adapted(SpacePtr space, Rng& rng, double scale) {
    AdaptedProcess out(space);
    const FilteredSpace& sp = *space;
    for (int k = 0; k <= sp.steps(); ++k)
        for (int a = 0; a < sp.atom_count(k); ++a)
            out.set_atom(k, k, a, rng.uniform(-scale, scale));
    return out;
}

AdaptedProcess random_drift(SpacePtr space, Rng& rng, double scale) {
    AdaptedProcess out(space);
    const FilteredSpace& sp = *space;
    for (int k = 1; k <= sp.steps(); ++k)
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const double incr = rng.uniform(-scale, scale);
            const int w0 = sp.atom(k, a).members.front();
            out.set_atom(k, k, a, out.at(k - 1, w0) + incr);
        }
    return out;
}

AdaptedProcess random_martingale(SpacePtr space, Rng& rng, double scale) {
    AdaptedProcess out(space);
    const FilteredSpace& sp = *space;
    const int n = sp.steps();
    for (int a = 0; a < sp.atom_count(n); ++a) out.set_atom(n, n, a, rng.uniform(-scale, scale));
    for (int k = n - 1; k >= 0; --k) out.row(k) = sp.cond_expect(out.row(k + 1), k);
    return out;
}

AdaptedProcess random_supermartingale(SpacePtr space, Rng& rng, double scale) {
    AdaptedProcess out = random_martingale(space, rng, scale);
    const FilteredSpace& sp = *space;
    std::vector<double> k_path(sp.outcome_count(), 0.0);
    for (int k = 0; k < sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const double incr = rng.uniform(0.0, 0.5 * scale);
            for (int w : sp.atom(k, a).members) k_path[w] += incr;
        }
        for (int w = 0; w < sp.outcome_count(); ++w) out.at(k + 1, w) -= k_path[w];
    }
    return out;
}

std::vector<double> random_terminal(const FilteredSpace& space, Rng& rng, double scale) {
    std::vector<double> out(space.outcome_count());
    const int n = space.steps();
    for (int a = 0; a < space.atom_count(n); ++a) {
        const double v = rng.uniform(-scale, scale);
        for (int w : space.atom(n, a).members) out[w] = v;
    }
    return out;
}

namespace {

double min_first_density(const MartingaleBasis& basis) {
    const FilteredSpace& sp = basis.space();
    double best = 0.0;
    bool found = false;
    for (int k = 0; k < sp.steps(); ++k)
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& blk = basis.block(k, a);
            if (blk.dim >= 1) {
                const double d = blk.density[0];
                best = found ? std::min(best, d) : d;
                found = true;
            }
        }
    return found ? best : 0.0;
}

Generator draw_driver(const std::string& kind, Rng& rng, const MartingaleBasis& basis,
                      const FilteredSpace& sp, double lambda_dt_cap) {
    auto& reg = GeneratorRegistry::instance();
    if (kind == "zero") return reg.make("zero", {}, basis);
    if (kind == "linear-y")
        return reg.make("linear-y",
                        {{"a", rng.uniform(-0.5, 0.5)}, {"b", rng.uniform(0.0, 1.2)}}, basis);
    if (kind == "monotone-cubic")
        return reg.make("monotone-cubic", {{"scale", rng.uniform(0.1, 0.8)}}, basis);
    if (kind == "z-linear") {
        double max_dt = 0.0;
        for (int k = 0; k < sp.steps(); ++k) max_dt = std::max(max_dt, sp.dt(k));
        const double lam = rng.uniform(0.5, 1.0) * lambda_dt_cap / max_dt;
        const double den = min_first_density(basis);
        const double c = den > 0.0 ? lam * std::sqrt(den) : 0.0;
        return reg.make(
            "z-linear",
            {{"a", rng.uniform(-0.5, 0.5)}, {"b", rng.uniform(0.0, 1.0)}, {"c", c}}, basis);
    }
    throw ConfigError("unknown driver kind '" + kind + "'");
}

}  // namespace

RBSDEInput random_instance(std::uint64_t seed, const InstanceOptions& opt) {
    for (int attempt = 0; attempt < opt.max_redraws; ++attempt) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(attempt)));
        TreeOptions tree = opt.tree;
        if (opt.driver_kind == "z-linear") tree.min_branch = std::max(tree.min_branch, 2);
        SpacePtr sp = random_tree_space(rng.next_u64(), tree);
        auto basis = std::make_shared<const MartingaleBasis>(MartingaleBasis::build(sp));

        RBSDEInput in;
        in.space = sp;
        in.basis = basis;

        const AdaptedProcess anchor = random_martingale(sp, rng, 1.0);
        in.terminal.assign(sp->outcome_count(), 0.0);
        for (int a = 0; a < sp->atom_count(sp->steps()); ++a) {
            const double v =
                anchor.atom_value(sp->steps(), a) + rng.uniform(-0.3, 0.3);
            for (int w : sp->atom(sp->steps(), a).members) in.terminal[w] = v;
        }
        in.drift = random_drift(sp, rng, opt.drift_scale);

        if (opt.lower || opt.upper) {
            AdaptedProcess low(sp), up(sp);
            for (int k = 0; k <= sp->steps(); ++k)
                for (int a = 0; a < sp->atom_count(k); ++a) {
                    const double base = anchor.atom_value(k, a);
                    const double off = rng.uniform(0.0, 0.45);
                    const double bump =
                        rng.coin(0.35) ? rng.uniform(0.0, 2.0 * opt.force_scale) : 0.0;
                    const double gap = rng.uniform(0.05, 0.6);
                    if (opt.lower) {
                        const double l = base - off + bump;
                        low.set_atom(k, k, a, l);
                        if (opt.upper) up.set_atom(k, k, a, l + gap);
                    } else {
                        up.set_atom(k, k, a, base + off - bump);
                    }
                }
            if (opt.lower) in.lower = std::move(low);
            if (opt.upper) in.upper = std::move(up);
        }

        in.driver = draw_driver(opt.driver_kind, rng, *basis, *sp, opt.lambda_dt_cap);
        in.validate();
        if (!opt.require_active_lower && !opt.require_active_upper) return in;

        const Solution sol = solve_reflected(in);
        const double f_plus = sp->expect(sol.r_plus.row(sp->steps()));
        const double f_minus = sp->expect(sol.r_minus.row(sp->steps()));
        if ((!opt.require_active_lower || f_plus >= opt.min_force) &&
            (!opt.require_active_upper || f_minus >= opt.min_force))
            return in;
    }
    throw ValidationError("no instance with the requested barrier activity after " +
                          std::to_string(opt.max_redraws) + " draws");
}

namespace {

Generator offset_driver(const Generator& f, double delta) {
    Generator g = f;
    g.name = f.name + "+const";
    g.growth = f.growth + std::abs(delta);
    auto base = f.eval;
    g.eval = [base, delta](int k, int w, double y, std::span<const double> z) {
        return base(k, w, y, z) + delta;
    };
    return g;
}

}  // namespace

OrderedPair random_ordered_pair(std::uint64_t seed, PairKind kind) {
    Rng rng(seed);
    InstanceOptions opt;
    opt.tree.steps = 3 + static_cast<int>(rng.next_below(2));
    opt.lower = true;
    opt.upper = kind == PairKind::TwoBarrier;
    opt.driver_kind = rng.coin(0.5) ? "linear-y" : "monotone-cubic";

    OrderedPair pair;
    pair.low = random_instance(rng.next_u64(), opt);
    pair.high = pair.low;
    const FilteredSpace& sp = *pair.low.space;

    for (int a = 0; a < sp.atom_count(sp.steps()); ++a) {
        const double lift = rng.uniform(0.0, 0.5);
        for (int w : sp.atom(sp.steps(), a).members) pair.high.terminal[w] += lift;
    }

    AdaptedProcess drift(pair.low.space);
    for (int k = 1; k <= sp.steps(); ++k)
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const int w0 = sp.atom(k, a).members.front();
            const double dv = pair.low.drift.at(k, w0) - pair.low.drift.at(k - 1, w0);
            drift.set_atom(k, k, a, drift.at(k - 1, w0) + dv + rng.uniform(0.0, 0.2));
        }
    pair.high.drift = std::move(drift);

    pair.high.driver = offset_driver(pair.low.driver, rng.uniform(0.0, 0.4));

    if (kind != PairKind::SameBarrier) {
        // Barrier lifts stay below the minimum gap used by random_instance,
        // so two-barrier pairs keep L <= U.
        const double l_cap = kind == PairKind::TwoBarrier ? 0.05 : 0.3;
        for (int k = 0; k <= sp.steps(); ++k)
            for (int a = 0; a < sp.atom_count(k); ++a) {
                const int w0 = sp.atom(k, a).members.front();
                pair.high.lower->set_atom(k, k, a,
                                          pair.low.lower->at(k, w0) +
                                              rng.uniform(0.0, l_cap));
                if (kind == PairKind::TwoBarrier)
                    pair.high.upper->set_atom(k, k, a,
                                              pair.low.upper->at(k, w0) +
                                                  rng.uniform(0.0, 0.3));
            }
    }
    pair.low.validate();
    pair.high.validate();
    return pair;
}

SemimartingaleBarrierInstance random_semimartingale_barrier(std::uint64_t seed,
                                                            bool zero_driver,
                                                            bool with_drift) {
    Rng rng(seed);
    TreeOptions tree;
    tree.steps = 3 + static_cast<int>(rng.next_below(3));
    SpacePtr sp = random_tree_space(rng.next_u64(), tree);
    auto basis = std::make_shared<const MartingaleBasis>(MartingaleBasis::build(sp));

    SemimartingaleBarrierInstance out;
    out.l0 = rng.uniform(-0.5, 0.5);

    AdaptedProcess a_part(sp);
    for (int k = 1; k <= sp->steps(); ++k)
        for (int a = 0; a < sp->atom_count(k); ++a) {
            const int w0 = sp->atom(k, a).members.front();
            a_part.set_atom(k, k, a, a_part.at(k - 1, w0) + rng.uniform(0.0, 0.35));
        }

    AdaptedProcess n_part = random_martingale(sp, rng, 0.5);
    const double n0 = n_part.at(0, 0);
    for (int k = 0; k <= sp->steps(); ++k)
        for (int w = 0; w < sp->outcome_count(); ++w) n_part.at(k, w) -= n0;

    AdaptedProcess lower(sp);
    for (int k = 0; k <= sp->steps(); ++k)
        for (int w = 0; w < sp->outcome_count(); ++w)
            lower.at(k, w) = out.l0 - a_part.at(k, w) + n_part.at(k, w);

    RBSDEInput in;
    in.space = sp;
    in.basis = basis;
    in.terminal.assign(sp->outcome_count(), 0.0);
    for (int a = 0; a < sp->atom_count(sp->steps()); ++a) {
        const double bump = rng.uniform(0.0, 0.8);
        for (int w : sp->atom(sp->steps(), a).members)
            in.terminal[w] = lower.at(sp->steps(), w) + bump;
    }
    in.drift = with_drift ? random_drift(sp, rng, 0.2) : AdaptedProcess(sp);
    in.lower = std::move(lower);
    auto& reg = GeneratorRegistry::instance();
    in.driver = zero_driver
                    ? reg.make("zero", {}, *basis)
                    : reg.make("linear-y",
                               {{"a", rng.uniform(-0.3, 0.3)}, {"b", rng.uniform(0.0, 0.8)}},
                               *basis);
    in.validate();
    out.input = std::move(in);
    out.a_part = std::move(a_part);
    out.n_part = std::move(n_part);
    return out;
}

}  // namespace rbsde
