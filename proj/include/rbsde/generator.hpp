#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "rbsde/martingale_basis.hpp"

namespace rbsde {

/// Driver f(t_k, w, y, z) of a backward equation.  `z` is the previsible
/// coefficient vector against the orthogonal martingale basis at (k, atom);
/// drivers that ignore z must set depends_on_z = false so Picard iteration
/// can short-circuit.
///
/// Declared constants:
///   mu     - one-sided slope bound: (f(y) - f(y'))(y - y') <= mu (y - y')^2,
///   lambda - Lipschitz bound in z w.r.t. the state norm |.|_M,
///   growth - witness c in the growth bound y^ f(t,y,z) <= c + mu|y| (+ lambda|z|_M).
/// They are spot-checked by randomized probing (probe_generator) whenever a
/// scenario is assembled.
struct Generator {
    std::string name;
    std::function<double(int k, int w, double y, std::span<const double> z)> eval;
    double mu = 0.0;
    double lambda = 0.0;
    double growth = 0.0;
    bool depends_on_z = false;

    double operator()(int k, int w, double y, std::span<const double> z) const {
        return eval(k, w, y, z);
    }
};

/// Randomized spot check of the declared constants on a concrete space and
/// basis.  Returns the description of the first violation, or nullopt.
std::optional<std::string> probe_generator(const Generator& f, const MartingaleBasis& basis,
                                           std::uint64_t seed, int samples = 256);

/// Named driver factory registry.  Ships with:
///   zero               f = 0
///   linear-y           f(y) = a - b y            (params a, b; mu = -b)
///   monotone-cubic     f(y) = -scale y^3         (param scale >= 0; mu = 0)
///   z-linear           f(y,z) = a - b y + c z_1  (params a, b, c)
///   two-sided-penalty  f(y) = n (y-l)^- - m (y-u)^+  (params n, m, l, u)
/// Factories receive their JSON-ish parameter map plus the basis so that
/// z-sensitive drivers can convert coefficient slopes into |.|_M Lipschitz
/// constants.
class GeneratorRegistry {
  public:
    using Params = std::map<std::string, double>;
    using Factory = std::function<Generator(const Params&, const MartingaleBasis&)>;

    static GeneratorRegistry& instance();

    void add(const std::string& name, Factory factory);
    Generator make(const std::string& name, const Params& params,
                   const MartingaleBasis& basis) const;
    std::vector<std::string> names() const;

  private:
    GeneratorRegistry();
    std::map<std::string, Factory> factories_;
};

}  // namespace rbsde
