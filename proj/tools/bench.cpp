// Benchmark of the OpenMP kernels against their serial reference
// implementations, with an agreement column so the numbers can only be
// trusted when the outputs match.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rbsde/dynkin.hpp"
#include "rbsde/parallel.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/rng.hpp"
#include "rbsde/scenario.hpp"
#include "rbsde/solver.hpp"

namespace {

double best_of(int reps, const std::function<void()>& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        best = std::min(best,
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count());
    }
    return best;
}

double grid_gap(const rbsde::ProcessGrid& a, const rbsde::ProcessGrid& b) {
    double worst = 0.0;
    for (int k = 0; k < a.rows(); ++k)
        for (std::size_t w = 0; w < a.row(k).size(); ++w)
            worst = std::max(worst, std::abs(a.at(k, static_cast<int>(w)) -
                                             b.at(k, static_cast<int>(w))));
    return worst;
}

void print_row(const char* name, double serial, double parallel, double agreement) {
    std::printf("%-28s %10.4f %12.4f %9.2fx %12.3e\n", name, serial, parallel,
                serial / std::max(parallel, 1e-12), agreement);
}

}  // namespace

int main() {
    rbsde::apply_thread_cap();
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both columns run serially\n");
#endif
    std::printf("%-28s %10s %12s %9s %12s\n", "kernel", "serial(s)", "parallel(s)", "speedup",
                "agreement");

    // Deep binomial tree: 2^14 outcomes, a nonlinear driver so every node
    // performs a scalar Newton solve, and a barrier that actually binds.
    {
        rbsde::SpacePtr space = rbsde::binomial_space(14, 0.5);
        const rbsde::FilteredSpace& sp = *space;
        rbsde::Rng rng(rbsde::Rng::derive(7, 42));
        const rbsde::AdaptedProcess anchor = rbsde::random_martingale(space, rng, 1.0);
        rbsde::AdaptedProcess lower(space);
        for (int k = 0; k <= sp.steps(); ++k)
            for (int a = 0; a < sp.atom_count(k); ++a)
                lower.set_atom(k, k, a, anchor.atom_value(k, a) - 0.1);
        const rbsde::MartingaleBasis basis = rbsde::MartingaleBasis::build(space);
        const rbsde::Generator driver = rbsde::GeneratorRegistry::instance().make(
            "monotone-cubic", {{"scale", 0.5}}, basis);
        const rbsde::RBSDEInput in =
            rbsde::make_input(space, anchor.row(sp.steps()), driver, lower);

        rbsde::Solution parallel_sol, serial_sol;
        const double t_par = best_of(3, [&] { parallel_sol = rbsde::solve_reflected(in); });
        const double t_ser = best_of(
            3, [&] { serial_sol = rbsde::reference::solve_reflected_serial(in); });
        print_row("reflected-solve-2^14", t_ser, t_par,
                  grid_gap(parallel_sol.y, serial_sol.y));
    }

    // Dynkin pair table on a full ternary depth-3 tree: 730 stopping times
    // per player, ~5.3e5 payoff pairs.
    {
        rbsde::InstanceOptions opt;
        opt.tree.steps = 3;
        opt.tree.min_branch = 3;
        opt.tree.max_branch = 3;
        opt.driver_kind = "linear-y";
        opt.lower = opt.upper = true;
        const rbsde::RBSDEInput in = rbsde::random_instance(11, opt);
        const rbsde::Solution sol = rbsde::solve_reflected(in);
        rbsde::DynkinGame game{&in, &sol.y};
        game.validate();

        rbsde::GameValues gp, gs;
        const double t_par = best_of(3, [&] { gp = rbsde::game_values(game, 1000000); });
        const double t_ser =
            best_of(3, [&] { gs = rbsde::game_values_reference(game, 1000000); });
        double agreement = 0.0;
        for (std::size_t a = 0; a < gp.lower.size(); ++a)
            agreement = std::max({agreement, std::abs(gp.lower[a] - gs.lower[a]),
                                  std::abs(gp.upper[a] - gs.upper[a])});
        print_row("dynkin-pair-table", t_ser, t_par, agreement);
    }
    return 0;
}
