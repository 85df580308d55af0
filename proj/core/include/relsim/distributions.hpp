#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relsim/random.hpp"

namespace relsim {

struct Normal {
    double mean;
    double std;
};

struct Lognormal {
    double log_mean;
    double log_std;
};

struct Uniform {
    double lower;
    double upper;
};

// Weibull parameterized by mean strength and modulus; the internal scale
// satisfies lambda * Gamma(1 + 1/m) = mean_strength.
struct WeibullByMean {
    double mean_strength;
    double modulus;
    double scale() const;
};

// One scalar marginal. Construction validates the parameter invariants
// (std > 0, log_std > 0, lower < upper, mean_strength > 0, modulus > 0).
class MarginalDistribution {
public:
    using Variant = std::variant<Normal, Lognormal, Uniform, WeibullByMean>;

    MarginalDistribution(Normal n);           // NOLINT(google-explicit-constructor)
    MarginalDistribution(Lognormal ln);       // NOLINT
    MarginalDistribution(Uniform u);          // NOLINT
    MarginalDistribution(WeibullByMean w);    // NOLINT

    const Variant& dist() const { return v_; }

    // log density; -inf outside the support
    double log_pdf(double x) const;
    double cdf(double x) const;
    // inverse CDF; throws std::domain_error for p outside (0,1)
    double quantile(double p) const;

    // isoprobabilistic map u = PhiInv(CDF(x)) and its inverse, with analytic
    // shortcuts per family so the deep tails stay accurate
    double to_u(double x) const;
    double from_u(double u) const;

    double mean() const;
    bool in_support(double x) const;
    std::string family_name() const;

private:
    Variant v_;
};

struct InputSample {
    std::vector<double> values;
};

// Ordered list of independent named marginals; the joint density is the
// product of the marginals.
class ParameterSpace {
public:
    ParameterSpace() = default;

    ParameterSpace& add(std::string name, MarginalDistribution dist);

    std::size_t dimension() const { return marginals_.size(); }
    const MarginalDistribution& marginal(std::size_t d) const { return marginals_[d].second; }
    const std::string& name(std::size_t d) const { return marginals_[d].first; }
    bool contains(const InputSample& x) const;

private:
    std::vector<std::pair<std::string, MarginalDistribution>> marginals_;
};

// Each component drawn independently via the inverse CDF of one uniform from
// the stream, in marginal order. Deterministic for a fixed seed.
InputSample sample(const ParameterSpace& space, UniformStream& rng);

std::vector<double> to_standard_normal(const ParameterSpace& space, const InputSample& x);
InputSample from_standard_normal(const ParameterSpace& space, const std::vector<double>& u);

// Per-dimension stratified (Latin hypercube style) design, seeded.
std::vector<InputSample> latin_hypercube(const ParameterSpace& space, int n,
                                         UniformStream& rng);

} // namespace relsim
