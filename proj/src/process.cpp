#include "rbsde/process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rbsde {

ProcessGrid::ProcessGrid(SpacePtr space, double fill) : space_(std::move(space)) {
    rows_.assign(space_->steps() + 1, std::vector<double>(space_->outcome_count(), fill));
}

std::vector<double> ProcessGrid::increment(int k) const {
    std::vector<double> d(rows_[k].size());
    for (std::size_t w = 0; w < d.size(); ++w) d[w] = rows_[k][w] - rows_[k - 1][w];
    return d;
}

void ProcessGrid::set_atom(int k, int k_atom, int a, double v) {
    for (int w : space_->atom(k_atom, a).members) rows_[k][w] = v;
}

AdaptedProcess AdaptedProcess::from_rows(SpacePtr space, std::vector<std::vector<double>> rows) {
    AdaptedProcess x;
    x.space_ = std::move(space);
    x.rows_ = std::move(rows);
    if (x.rows() != x.space().steps() + 1)
        throw ValidationError("adapted process has wrong row count");
    for (const auto& r : x.rows_)
        if (static_cast<int>(r.size()) != x.space().outcome_count())
            throw ValidationError("adapted process row has wrong outcome count");
    x.validate();
    return x;
}

void AdaptedProcess::validate() const {
    for (int k = 0; k < rows(); ++k)
        if (!space_->constant_on(rows_[k], k))
            throw ValidationError("process not adapted at step " + std::to_string(k));
}

PredictableProcess PredictableProcess::from_rows(SpacePtr space,
                                                 std::vector<std::vector<double>> rows) {
    PredictableProcess x;
    x.space_ = std::move(space);
    x.rows_ = std::move(rows);
    if (x.rows() != x.space().steps() + 1)
        throw ValidationError("predictable process has wrong row count");
    for (const auto& r : x.rows_)
        if (static_cast<int>(r.size()) != x.space().outcome_count())
            throw ValidationError("predictable process row has wrong outcome count");
    x.validate();
    return x;
}

void PredictableProcess::validate() const {
    for (int k = 0; k < rows(); ++k)
        if (!space_->constant_on(rows_[k], std::max(k - 1, 0)))
            throw ValidationError("process not previsible at step " + std::to_string(k));
}

AdaptedProcess PredictableProcess::as_adapted() const {
    AdaptedProcess x(space_);
    for (int k = 0; k < rows(); ++k) x.row(k) = rows_[k];
    return x;
}

PredictableProcess predictable_projection(const AdaptedProcess& x) {
    const FilteredSpace& sp = x.space();
    PredictableProcess out(x.space_ptr());
    out.row(0) = x.row(0);
    for (int k = 1; k <= sp.steps(); ++k) out.row(k) = sp.cond_expect(x.row(k), k - 1);
    return out;
}

PredictableProcess dual_predictable_projection(const AdaptedProcess& a) {
    const FilteredSpace& sp = a.space();
    PredictableProcess out(a.space_ptr());
    for (int k = 1; k <= sp.steps(); ++k) {
        const auto proj = sp.cond_expect(a.increment(k), k - 1);
        for (int w = 0; w < sp.outcome_count(); ++w) out.at(k, w) = out.at(k - 1, w) + proj[w];
    }
    return out;
}

DoobDecomposition doob_decomposition(const AdaptedProcess& s, double tolerance) {
    const FilteredSpace& sp = s.space();
    DoobDecomposition d{PredictableProcess(s.space_ptr()), AdaptedProcess(s.space_ptr())};
    for (int k = 0; k < sp.steps(); ++k) {
        const auto pred = sp.cond_expect(s.row(k + 1), k);
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const int w0 = sp.atom(k, a).members.front();
            const double dk = s.at(k, w0) - pred[w0];
            if (dk < -tolerance)
                throw NotSupermartingale("supermartingale inequality fails at (step " +
                                         std::to_string(k) + ", atom " + std::to_string(a) +
                                         ") by " + std::to_string(-dk));
            for (int w : sp.atom(k, a).members) {
                d.compensator.at(k + 1, w) = d.compensator.at(k, w) + dk;
                d.martingale.at(k + 1, w) =
                    d.martingale.at(k, w) + (s.at(k + 1, w) - pred[w]);
            }
        }
    }
    return d;
}

double martingale_defect(const AdaptedProcess& x) {
    const FilteredSpace& sp = x.space();
    double worst = 0.0;
    for (int k = 0; k < sp.steps(); ++k) {
        const auto pred = sp.cond_expect(x.row(k + 1), k);
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const int w0 = sp.atom(k, a).members.front();
            worst = std::max(worst, std::abs(pred[w0] - x.at(k, w0)));
        }
    }
    return worst;
}

FVDecomposition jordan_split(const PredictableProcess& r) {
    const FilteredSpace& sp = r.space();
    for (int w = 0; w < sp.outcome_count(); ++w)
        if (r.at(0, w) != 0.0) throw ValidationError("jordan split requires R_0 = 0");
    FVDecomposition d{PredictableProcess(r.space_ptr()), PredictableProcess(r.space_ptr())};
    for (int k = 1; k <= sp.steps(); ++k) {
        for (int w = 0; w < sp.outcome_count(); ++w) {
            const double dr = r.at(k, w) - r.at(k - 1, w);
            d.plus.at(k, w) = d.plus.at(k - 1, w) + std::max(dr, 0.0);
            d.minus.at(k, w) = d.minus.at(k - 1, w) + std::max(-dr, 0.0);
        }
    }
    return d;
}

AdaptedProcess quadratic_variation(const AdaptedProcess& x) {
    const FilteredSpace& sp = x.space();
    AdaptedProcess qv(x.space_ptr());
    for (int k = 1; k <= sp.steps(); ++k)
        for (int w = 0; w < sp.outcome_count(); ++w) {
            const double dx = x.at(k, w) - x.at(k - 1, w);
            qv.at(k, w) = qv.at(k - 1, w) + dx * dx;
        }
    return qv;
}

PathNorms path_norms(const AdaptedProcess& x, double p) {
    if (!(p > 0.0) || p > 2.0) throw ValidationError("path_norms needs p in (0, 2]");
    const FilteredSpace& sp = x.space();
    PathNorms n;
    for (int w = 0; w < sp.outcome_count(); ++w) {
        double sup = 0.0, var = 0.0, bracket = 0.0;
        for (int k = 0; k <= sp.steps(); ++k) {
            sup = std::max(sup, std::abs(x.at(k, w)));
            if (k > 0) {
                const double dx = x.at(k, w) - x.at(k - 1, w);
                var += std::abs(dx);
                bracket += dx * dx;
            }
        }
        const double pw = sp.prob(w);
        n.sup_p += pw * std::pow(sup, p);
        n.var_p += pw * std::pow(var, p);
        n.bracket_p += pw * std::pow(bracket, p / 2.0);
    }
    return n;
}

}  // namespace rbsde
