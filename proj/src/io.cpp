#include "rbsde/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rbsde {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json space_to_json(const FilteredSpace& space) {
    nlohmann::json j;
    j["outcomes"] = nlohmann::json::array();
    for (int w = 0; w < space.outcome_count(); ++w)
        j["outcomes"].push_back({{"id", space.outcome(w).id}, {"p", space.outcome(w).prob}});
    j["times"] = space.times();
    nlohmann::json parts = nlohmann::json::array();
    for (int k = 0; k <= space.steps(); ++k) {
        nlohmann::json level = nlohmann::json::array();
        for (int a = 0; a < space.atom_count(k); ++a) {
            nlohmann::json atom = nlohmann::json::array();
            for (int w : space.atom(k, a).members) atom.push_back(space.outcome(w).id);
            level.push_back(std::move(atom));
        }
        parts.push_back(std::move(level));
    }
    j["partitions"] = std::move(parts);
    return j;
}

SpacePtr space_from_json(const nlohmann::json& j) {
    if (!j.contains("outcomes") || !j.contains("times") || !j.contains("partitions"))
        throw ConfigError("space needs 'outcomes', 'times' and 'partitions'");
    std::vector<Outcome> outcomes;
    std::map<std::string, int> index;
    for (const auto& o : j.at("outcomes")) {
        Outcome out{o.at("id").get<std::string>(), o.at("p").get<double>()};
        if (!index.emplace(out.id, static_cast<int>(outcomes.size())).second)
            throw ConfigError("duplicate outcome id '" + out.id + "'");
        outcomes.push_back(std::move(out));
    }
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<std::vector<std::vector<int>>> partitions;
    for (const auto& level : j.at("partitions")) {
        std::vector<std::vector<int>> atoms;
        for (const auto& atom : level) {
            std::vector<int> members;
            for (const auto& id : atom) {
                const auto it = index.find(id.get<std::string>());
                if (it == index.end())
                    throw ConfigError("partition references unknown outcome '" +
                                      id.get<std::string>() + "'");
                members.push_back(it->second);
            }
            atoms.push_back(std::move(members));
        }
        partitions.push_back(std::move(atoms));
    }
    return FilteredSpace::create(std::move(outcomes), std::move(times), std::move(partitions));
}

nlohmann::json process_to_json(const ProcessGrid& x) {
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k < x.rows(); ++k) rows.push_back(x.row(k));
    return {{"rows", std::move(rows)}};
}

AdaptedProcess adapted_from_json(SpacePtr space, const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    const nlohmann::json& src = j.is_object() ? j.at("rows") : j;
    for (const auto& row : src) rows.push_back(row.get<std::vector<double>>());
    return AdaptedProcess::from_rows(std::move(space), std::move(rows));
}

std::string solution_csv(const RBSDEInput& input, const Solution& sol) {
    const FilteredSpace& sp = *input.space;
    const int d = input.basis->dim();
    std::ostringstream os;
    os << "step,time,atom,outcomes,Y";
    for (int i = 1; i <= d; ++i) os << ",Z" << i;
    os << ",dRplus,dRminus\n";
    for (int k = 0; k <= sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            os << k << ',' << fmt17(sp.time(k)) << ',' << a << ',';
            for (std::size_t i = 0; i < atom.members.size(); ++i) {
                if (i) os << '|';
                os << sp.outcome(atom.members[i]).id;
            }
            os << ',' << fmt17(sol.y.atom_value(k, a));
            const bool last = k == sp.steps();
            for (int i = 0; i < d; ++i)
                os << ',' << fmt17(last ? 0.0 : sol.z.at(k, a)[i]);
            const int w0 = atom.members.front();
            const double drp = last ? 0.0 : sol.r_plus.at(k + 1, w0) - sol.r_plus.at(k, w0);
            const double drm = last ? 0.0 : sol.r_minus.at(k + 1, w0) - sol.r_minus.at(k, w0);
            os << ',' << fmt17(drp) << ',' << fmt17(drm) << '\n';
        }
    }
    return os.str();
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream os;
    os << "# reference_lower_force," << fmt17(report.reference_lower_force) << '\n';
    os << "# reference_upper_force," << fmt17(report.reference_upper_force) << '\n';
    os << "n,m,max_error,lower_force_gap,upper_force_gap,monotone_up,monotone_down\n";
    for (const SweepRow& row : report.rows)
        os << fmt17(row.n) << ',' << fmt17(row.m) << ',' << fmt17(row.max_error) << ','
           << fmt17(row.lower_force_gap) << ',' << fmt17(row.upper_force_gap) << ','
           << (row.monotone_up ? 1 : 0) << ',' << (row.monotone_down ? 1 : 0) << '\n';
    return os.str();
}

std::string game_csv(const DynkinGame& game, const GameValues& values,
                     const AdaptedProcess& induction, int start) {
    const FilteredSpace& sp = game.space();
    std::ostringstream os;
    os << "atom,lower,upper,induction,solver,gap\n";
    for (int a = 0; a < sp.atom_count(start); ++a) {
        const double ind = induction.atom_value(start, a);
        const double y = game.value->atom_value(start, a);
        const double lo = values.lower[a];
        const double hi = values.upper[a];
        const double top = std::max(std::max(lo, hi), std::max(ind, y));
        const double bot = std::min(std::min(lo, hi), std::min(ind, y));
        os << a << ',' << fmt17(lo) << ',' << fmt17(hi) << ',' << fmt17(ind) << ','
           << fmt17(y) << ',' << fmt17(top - bot) << '\n';
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

}  // namespace rbsde
