#pragma once

#include <string>

#include "json.hpp"
#include "rbsde/dynkin.hpp"
#include "rbsde/solver.hpp"

namespace rbsde {

/// Canonical float formatting with 17 significant digits: re-parsing
/// reproduces the double bit-exactly, and equal doubles always produce
/// equal bytes, which is what the determinism checks compare.
std::string fmt17(double v);

/// {"outcomes": [{"id", "p"}...], "times": [...], "partitions": [[[ids]..]..]}
nlohmann::json space_to_json(const FilteredSpace& space);
SpacePtr space_from_json(const nlohmann::json& j);

/// {"rows": [[...]...]}, step-major, one column per outcome in space order.
nlohmann::json process_to_json(const ProcessGrid& x);
AdaptedProcess adapted_from_json(SpacePtr space, const nlohmann::json& j);

/// One row per (step, atom):
///   step,time,atom,outcomes,Y,Z1..Zd*,dRplus,dRminus
/// Z and the dR columns describe the transition (t_k, t_{k+1}] and are zero
/// on the terminal row; outcome ids are joined with '|'.
std::string solution_csv(const RBSDEInput& input, const Solution& sol);

/// n,m,max_error,lower_force_gap,upper_force_gap,monotone_up,monotone_down
/// preceded by two comment lines with the reference forces E R+-_N.
std::string sweep_csv(const SweepReport& report);

/// atom,lower,upper,induction,solver,gap; one row per atom of the start
/// partition, `gap` the largest pairwise discrepancy of the four values.
std::string game_csv(const DynkinGame& game, const GameValues& values,
                     const AdaptedProcess& induction, int start = 0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rbsde
