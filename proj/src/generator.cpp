#include "rbsde/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbsde/rng.hpp"

namespace rbsde {

namespace {

double param(const GeneratorRegistry::Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

/// Smallest nonzero first-coordinate bracket density over the tree; converts
/// a slope in z_1 into a Lipschitz constant w.r.t. the |.|_M norm.
double min_first_density(const MartingaleBasis& basis) {
    const FilteredSpace& sp = basis.space();
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k < sp.steps(); ++k)
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& blk = basis.block(k, a);
            if (blk.dim >= 1 && blk.density[0] > 0.0) lo = std::min(lo, blk.density[0]);
        }
    return lo;
}

}  // namespace

std::optional<std::string> probe_generator(const Generator& f, const MartingaleBasis& basis,
                                           std::uint64_t seed, int samples) {
    const FilteredSpace& sp = basis.space();
    Rng rng(seed);
    const int d = basis.dim();
    std::vector<double> z(d, 0.0), z2(d, 0.0), diff(d, 0.0);
    for (int s = 0; s < samples; ++s) {
        const int k = rng.next_below(sp.steps());
        const int a = rng.next_below(sp.atom_count(k));
        const int w = sp.atom(k, a).members.front();
        const auto& blk = basis.block(k, a);
        // Probe with representable coefficients only: entries above the
        // atom's local dimension stay zero, matching what represent() emits.
        for (int i = 0; i < d; ++i) {
            z[i] = i < blk.dim ? rng.uniform(-3.0, 3.0) : 0.0;
            z2[i] = i < blk.dim ? rng.uniform(-3.0, 3.0) : 0.0;
            diff[i] = z[i] - z2[i];
        }
        const double y = rng.uniform(-5.0, 5.0);
        const double y2 = rng.uniform(-5.0, 5.0);
        const double fy = f(k, w, y, z);
        const double fy2 = f(k, w, y2, z);
        const double fz2 = f(k, w, y, z2);
        const double slack = 1e-9 * (1.0 + std::abs(fy) + std::abs(fy2) + std::abs(fz2));

        const double mono = (fy - fy2) * (y - y2) - f.mu * (y - y2) * (y - y2);
        if (mono > slack) {
            std::ostringstream os;
            os << f.name << ": one-sided slope bound mu=" << f.mu << " fails at (k=" << k
               << ", y=" << y << ", y'=" << y2 << ") by " << mono;
            return os.str();
        }
        const double lip = std::abs(fy - fz2) - f.lambda * m_norm(basis, k, a, diff);
        if (lip > slack) {
            std::ostringstream os;
            os << f.name << ": z-Lipschitz bound lambda=" << f.lambda << " fails at (k=" << k
               << ", atom=" << a << ") by " << lip;
            return os.str();
        }
        const double yhat = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
        const double growth = yhat * fy - f.growth - f.mu * std::abs(y) -
                              f.lambda * m_norm(basis, k, a, z);
        if (growth > slack) {
            std::ostringstream os;
            os << f.name << ": growth witness " << f.growth << " fails at (k=" << k
               << ", y=" << y << ") by " << growth;
            return os.str();
        }
    }
    return std::nullopt;
}

GeneratorRegistry& GeneratorRegistry::instance() {
    static GeneratorRegistry reg;
    return reg;
}

void GeneratorRegistry::add(const std::string& name, Factory factory) {
    if (!factories_.emplace(name, std::move(factory)).second)
        throw ConfigError("driver '" + name + "' already registered");
}

Generator GeneratorRegistry::make(const std::string& name, const Params& params,
                                  const MartingaleBasis& basis) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown driver '" + name + "'");
    return it->second(params, basis);
}

std::vector<std::string> GeneratorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : factories_) out.push_back(name);
    return out;
}

GeneratorRegistry::GeneratorRegistry() {
    add("zero", [](const Params&, const MartingaleBasis&) {
        Generator g;
        g.name = "zero";
        g.eval = [](int, int, double, std::span<const double>) { return 0.0; };
        return g;
    });

    add("linear-y", [](const Params& p, const MartingaleBasis&) {
        const double a = param(p, "a", 0.0);
        const double b = param(p, "b", 0.0);
        Generator g;
        g.name = "linear-y";
        g.eval = [a, b](int, int, double y, std::span<const double>) { return a - b * y; };
        g.mu = -b;
        g.growth = std::abs(a);
        return g;
    });

    add("monotone-cubic", [](const Params& p, const MartingaleBasis&) {
        const double scale = param(p, "scale", 1.0);
        if (scale < 0.0) throw ConfigError("monotone-cubic needs scale >= 0");
        Generator g;
        g.name = "monotone-cubic";
        g.eval = [scale](int, int, double y, std::span<const double>) {
            return -scale * y * y * y;
        };
        return g;
    });

    add("z-linear", [](const Params& p, const MartingaleBasis& basis) {
        const double a = param(p, "a", 0.0);
        const double b = param(p, "b", 0.0);
        const double c = param(p, "c", 0.0);
        Generator g;
        g.name = "z-linear";
        g.eval = [a, b, c](int, int, double y, std::span<const double> z) {
            return a - b * y + (z.empty() ? 0.0 : c * z[0]);
        };
        g.mu = -b;
        g.growth = std::abs(a);
        g.depends_on_z = c != 0.0;
        if (c != 0.0) {
            const double lo = min_first_density(basis);
            g.lambda = std::isfinite(lo) ? std::abs(c) / std::sqrt(lo) : 0.0;
        }
        return g;
    });

    add("two-sided-penalty", [](const Params& p, const MartingaleBasis&) {
        const double n = param(p, "n", 1.0);
        const double m = param(p, "m", 1.0);
        const double l = param(p, "l", 0.0);
        const double u = param(p, "u", 0.0);
        if (n < 0.0 || m < 0.0) throw ConfigError("two-sided-penalty needs n, m >= 0");
        if (l > u) throw ConfigError("two-sided-penalty needs l <= u");
        Generator g;
        g.name = "two-sided-penalty";
        g.eval = [n, m, l, u](int, int, double y, std::span<const double>) {
            return n * std::max(l - y, 0.0) - m * std::max(y - u, 0.0);
        };
        g.growth = n * std::max(l, 0.0) + m * std::max(-u, 0.0);
        return g;
    });
}

}  // namespace rbsde
