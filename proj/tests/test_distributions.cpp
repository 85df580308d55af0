#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "relsim/distributions.hpp"
#include "relsim/models.hpp"
#include "relsim/normal.hpp"
#include "test_util.hpp"

using namespace relsim;
using relsim::test::FixedStream;
using relsim::test::RecordingStream;

namespace {

// test-local CDFs, written independently of the library implementation, used
// to re-derive sampled values from recorded uniforms by bisection
double oracle_cdf(const MarginalDistribution& m, double x) {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return 0.5 * std::erfc(-(x - d.mean) / (d.std * std::sqrt(2.0)));
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (x <= 0.0) return 0.0;
                return 0.5 * std::erfc(-(std::log(x) - d.log_mean) /
                                       (d.log_std * std::sqrt(2.0)));
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return std::clamp((x - d.lower) / (d.upper - d.lower), 0.0, 1.0);
            } else {
                if (x <= 0.0) return 0.0;
                const double lambda = d.mean_strength / std::tgamma(1.0 + 1.0 / d.modulus);
                return 1.0 - std::exp(-std::pow(x / lambda, d.modulus));
            }
        },
        m.dist());
}

double oracle_quantile_bisect(const MarginalDistribution& m, double u) {
    double lo = -1e9, hi = 1e9;
    // bracket tighter for positive-support families
    if (oracle_cdf(m, 0.0) == 0.0) lo = 1e-300;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (oracle_cdf(m, mid) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("parameter invariants are enforced at construction") {
    CHECK_THROWS_AS(MarginalDistribution(Normal{5.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(Normal{5.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(Lognormal{0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(Uniform{2.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(Uniform{3.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(WeibullByMean{0.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalDistribution(WeibullByMean{1.0, 0.0}), std::invalid_argument);
    ParameterSpace s;
    s.add("a", Normal{0.0, 1.0});
    CHECK_THROWS_AS(s.add("a", Normal{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("degenerate stream samples the uniform median") {
    ParameterSpace s;
    s.add("u", Uniform{0.0, 1.0});
    FixedStream half({0.5});
    const InputSample x = sample(s, half);
    CHECK(x.values[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sample is the inverse CDF of the recorded uniforms") {
    const ParameterSpace space = borehole_space();
    RandomStream rng(42);
    RecordingStream rec(rng);
    const InputSample x = sample(space, rec);
    REQUIRE(rec.drawn.size() == space.dimension());
    for (std::size_t d = 0; d < space.dimension(); ++d) {
        const double expected = oracle_quantile_bisect(space.marginal(d), rec.drawn[d]);
        CHECK(relsim::test::close_rel(x.values[d], expected, 1e-8));
    }
}

TEST_CASE("log pdf reference points") {
    const MarginalDistribution n(Normal{0.0, 1.0});
    CHECK(n.log_pdf(0.0) == doctest::Approx(-0.91893853320467274178).epsilon(1e-14));
    const MarginalDistribution u(Uniform{0.0, 2.0});
    CHECK(u.log_pdf(3.0) == -std::numeric_limits<double>::infinity());
    CHECK(u.log_pdf(1.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    // m = 1 makes the Weibull exponential with unit scale: log f(1) = -1
    const MarginalDistribution w(WeibullByMean{1.0, 1.0});
    CHECK(w.log_pdf(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    const MarginalDistribution ln(Lognormal{0.0, 1.0});
    CHECK(ln.log_pdf(-1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("quantile reference points and domain errors") {
    const MarginalDistribution n(Normal{0.0, 1.0});
    CHECK(n.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    const MarginalDistribution u(Uniform{3.0, 7.0});
    CHECK(u.quantile(0.25) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(n.quantile(1.0 - 8.45e-9) - 5.64) < 0.01);
    CHECK_THROWS_AS(n.quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(n.quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(u.quantile(-0.5), std::domain_error);
}

TEST_CASE("standard-normal transform maps medians to the origin") {
    const MarginalDistribution n(Normal{4.0, 2.5});
    CHECK(n.to_u(4.0) == doctest::Approx(0.0).epsilon(1e-14));
    const MarginalDistribution u01(Uniform{0.0, 1.0});
    CHECK(u01.to_u(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("round trip through standard normal space is the identity") {
    const ParameterSpace space = borehole_space();
    RandomStream rng(7);
    for (int i = 0; i < 1000; ++i) {
        const InputSample x = sample(space, rng);
        const InputSample x2 = from_standard_normal(space, to_standard_normal(space, x));
        for (std::size_t d = 0; d < space.dimension(); ++d) {
            const double scale = std::max(std::abs(x.values[d]), 1.0);
            CHECK(std::abs(x.values[d] - x2.values[d]) / scale < 1e-8);
        }
    }
}

TEST_CASE("sample means match analytic means within five standard errors") {
    const int n = 1000000;
    const MarginalDistribution dists[] = {
        MarginalDistribution(Normal{3.0, 2.0}),
        MarginalDistribution(Lognormal{0.5, 0.4}),
        MarginalDistribution(Uniform{-1.0, 5.0}),
        MarginalDistribution(WeibullByMean{2.5, 9.5}),
        // m = 1: exponential case, sample mean -> mean_strength
        MarginalDistribution(WeibullByMean{0.8, 1.0}),
    };
    int tag = 0;
    for (const auto& d : dists) {
        ParameterSpace s;
        s.add("x", d);
        RandomStream rng(100 + tag++);
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) xs[i] = sample(s, rng).values[0];
        const double m = relsim::test::mean_of(xs);
        const double se = std::sqrt(relsim::test::var_of(xs) / n);
        CHECK(std::abs(m - d.mean()) < 5.0 * se);
    }
}

TEST_CASE("quantile inverts the cdf over the central 99.99 percent") {
    const MarginalDistribution dists[] = {
        MarginalDistribution(Normal{-2.0, 0.7}),
        MarginalDistribution(Lognormal{1.2, 0.8}),
        MarginalDistribution(Uniform{10.0, 11.0}),
        MarginalDistribution(WeibullByMean{3.0, 6.0}),
    };
    for (const auto& d : dists) {
        for (int i = 0; i <= 50; ++i) {
            const double p = 5e-5 + (1.0 - 1e-4) * i / 50.0;
            const double x = d.quantile(p);
            const double x2 = d.quantile(d.cdf(x));
            CHECK(relsim::test::close_rel(x, x2, 1e-8));
        }
    }
}

TEST_CASE("latin hypercube covers every stratum once per dimension") {
    const ParameterSpace space = standard_normal_space(3);
    RandomStream rng(11);
    const int n = 16;
    const auto pts = latin_hypercube(space, n, rng);
    REQUIRE(static_cast<int>(pts.size()) == n);
    for (std::size_t d = 0; d < space.dimension(); ++d) {
        std::set<int> strata;
        for (const auto& p : pts) {
            const double u = space.marginal(d).cdf(p.values[d]);
            strata.insert(static_cast<int>(u * n));
        }
        CHECK(static_cast<int>(strata.size()) == n);
    }
}
