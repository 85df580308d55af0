#include "relsim/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relsim/errors.hpp"
#include "relsim/normal.hpp"

namespace relsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
} // namespace

double WeibullByMean::scale() const { return mean_strength / std::tgamma(1.0 + 1.0 / modulus); }

MarginalDistribution::MarginalDistribution(Normal n) : v_(n) {
    if (!(n.std > 0.0)) throw std::invalid_argument("Normal: std must be > 0");
    if (!std::isfinite(n.mean) || !std::isfinite(n.std))
        throw std::invalid_argument("Normal: parameters must be finite");
}

MarginalDistribution::MarginalDistribution(Lognormal ln) : v_(ln) {
    if (!(ln.log_std > 0.0)) throw std::invalid_argument("Lognormal: log_std must be > 0");
    if (!std::isfinite(ln.log_mean) || !std::isfinite(ln.log_std))
        throw std::invalid_argument("Lognormal: parameters must be finite");
}

MarginalDistribution::MarginalDistribution(Uniform u) : v_(u) {
    if (!(u.lower < u.upper)) throw std::invalid_argument("Uniform: lower must be < upper");
    if (!std::isfinite(u.lower) || !std::isfinite(u.upper))
        throw std::invalid_argument("Uniform: parameters must be finite");
}

MarginalDistribution::MarginalDistribution(WeibullByMean w) : v_(w) {
    if (!(w.mean_strength > 0.0))
        throw std::invalid_argument("WeibullByMean: mean_strength must be > 0");
    if (!(w.modulus > 0.0)) throw std::invalid_argument("WeibullByMean: modulus must be > 0");
}

double MarginalDistribution::log_pdf(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                const double z = (x - d.mean) / d.std;
                return -0.5 * z * z - 0.5 * kLog2Pi - std::log(d.std);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (x <= 0.0) return kNegInf;
                const double z = (std::log(x) - d.log_mean) / d.log_std;
                return -0.5 * z * z - 0.5 * kLog2Pi - std::log(d.log_std) - std::log(x);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (x < d.lower || x > d.upper) return kNegInf;
                return -std::log(d.upper - d.lower);
            } else {
                if (x <= 0.0) return kNegInf;
                const double lam = d.scale();
                const double t = x / lam;
                return std::log(d.modulus / lam) + (d.modulus - 1.0) * std::log(t) -
                       std::pow(t, d.modulus);
            }
        },
        v_);
}

double MarginalDistribution::cdf(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return std_normal_cdf((x - d.mean) / d.std);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (x <= 0.0) return 0.0;
                return std_normal_cdf((std::log(x) - d.log_mean) / d.log_std);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (x <= d.lower) return 0.0;
                if (x >= d.upper) return 1.0;
                return (x - d.lower) / (d.upper - d.lower);
            } else {
                if (x <= 0.0) return 0.0;
                const double t = x / d.scale();
                return -std::expm1(-std::pow(t, d.modulus));
            }
        },
        v_);
}

double MarginalDistribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("quantile: p must be inside (0,1)");
    return std::visit(
        [p](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return d.mean + d.std * std_normal_quantile(p);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(d.log_mean + d.log_std * std_normal_quantile(p));
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return d.lower + (d.upper - d.lower) * p;
            } else {
                // -log(1-p) via log1p for upper-tail accuracy
                return d.scale() * std::pow(-std::log1p(-p), 1.0 / d.modulus);
            }
        },
        v_);
}

double MarginalDistribution::to_u(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return (x - d.mean) / d.std;
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return (std::log(x) - d.log_mean) / d.log_std;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                const double p = (x - d.lower) / (d.upper - d.lower);
                if (p <= 0.0) return kNegInf;
                if (p >= 1.0) return std::numeric_limits<double>::infinity();
                return std_normal_quantile(p);
            } else {
                // CDF = 1 - exp(-t^m); PhiInv(1 - s) = -PhiInv(s) keeps the
                // upper tail exact
                const double t = x / d.scale();
                const double s = std::exp(-std::pow(t, d.modulus));
                if (s <= 0.0) return std::numeric_limits<double>::infinity();
                if (s >= 1.0) return kNegInf;
                return -std_normal_quantile(s);
            }
        },
        v_);
}

double MarginalDistribution::from_u(double u) const {
    return std::visit(
        [u](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return d.mean + d.std * u;
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(d.log_mean + d.log_std * u);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return d.lower + (d.upper - d.lower) * std_normal_cdf(u);
            } else {
                // 1 - Phi(u) = Phi(-u); x = lambda * (-log(Phi(-u)))^(1/m)
                const double s = std_normal_cdf(-u);
                if (s <= 0.0) return std::numeric_limits<double>::infinity();
                return d.scale() * std::pow(-std::log(s), 1.0 / d.modulus);
            }
        },
        v_);
}

double MarginalDistribution::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return d.mean;
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(d.log_mean + 0.5 * d.log_std * d.log_std);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return 0.5 * (d.lower + d.upper);
            } else {
                return d.mean_strength;
            }
        },
        v_);
}

bool MarginalDistribution::in_support(double x) const {
    return std::visit(
        [x](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return std::isfinite(x);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return x > 0.0;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return x >= d.lower && x <= d.upper;
            } else {
                return x > 0.0;
            }
        },
        v_);
}

std::string MarginalDistribution::family_name() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) return "normal";
            else if constexpr (std::is_same_v<T, Lognormal>) return "lognormal";
            else if constexpr (std::is_same_v<T, Uniform>) return "uniform";
            else return "weibull_mean";
        },
        v_);
}

ParameterSpace& ParameterSpace::add(std::string name, MarginalDistribution dist) {
    for (const auto& [n, _] : marginals_)
        if (n == name) throw std::invalid_argument("ParameterSpace: duplicate name '" + name + "'");
    marginals_.emplace_back(std::move(name), std::move(dist));
    return *this;
}

bool ParameterSpace::contains(const InputSample& x) const {
    if (x.values.size() != dimension()) return false;
    for (std::size_t d = 0; d < dimension(); ++d)
        if (!marginals_[d].second.in_support(x.values[d])) return false;
    return true;
}

InputSample sample(const ParameterSpace& space, UniformStream& rng) {
    InputSample s;
    s.values.reserve(space.dimension());
    for (std::size_t d = 0; d < space.dimension(); ++d)
        s.values.push_back(space.marginal(d).quantile(rng.next()));
    return s;
}

std::vector<double> to_standard_normal(const ParameterSpace& space, const InputSample& x) {
    if (x.values.size() != space.dimension())
        throw std::invalid_argument("to_standard_normal: dimension mismatch");
    std::vector<double> u(space.dimension());
    for (std::size_t d = 0; d < space.dimension(); ++d)
        u[d] = space.marginal(d).to_u(x.values[d]);
    return u;
}

InputSample from_standard_normal(const ParameterSpace& space, const std::vector<double>& u) {
    if (u.size() != space.dimension())
        throw std::invalid_argument("from_standard_normal: dimension mismatch");
    InputSample x;
    x.values.resize(space.dimension());
    for (std::size_t d = 0; d < space.dimension(); ++d)
        x.values[d] = space.marginal(d).from_u(u[d]);
    return x;
}

std::vector<InputSample> latin_hypercube(const ParameterSpace& space, int n,
                                         UniformStream& rng) {
    if (n < 1) throw std::invalid_argument("latin_hypercube: n must be >= 1");
    const std::size_t dim = space.dimension();
    // one shuffled stratum permutation per dimension
    std::vector<std::vector<int>> perm(dim, std::vector<int>(n));
    for (std::size_t d = 0; d < dim; ++d) {
        for (int i = 0; i < n; ++i) perm[d][i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = std::min(i, static_cast<int>(rng.next() * (i + 1)));
            std::swap(perm[d][i], perm[d][j]);
        }
    }
    std::vector<InputSample> out(n);
    for (int i = 0; i < n; ++i) {
        out[i].values.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double u = (perm[d][i] + rng.next()) / n;
            out[i].values[d] = space.marginal(d).quantile(u);
        }
    }
    return out;
}

} // namespace relsim
