#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlsmc/rng.hpp"
#include "dlsmc/stats.hpp"
#include "dlsmc/uncertainty.hpp"

using namespace dlsmc;

namespace {

// Rejection sampler over the untruncated Gaussian; distributional oracle for
// the inverse-CDF implementation.
double rejection_sample(const TruncatedGaussianSpec& spec, Rng& gen) {
    std::normal_distribution<double> dist(spec.mean, spec.sd);
    for (;;) {
        double x = dist(gen);
        if (x >= spec.lower && x <= spec.upper)
            return spec.log_space ? std::exp(x) : x;
    }
}

// Closed-form variance of a Gaussian truncated to [mean - w sd, mean + w sd].
double truncated_variance_factor(double w) {
    double z = normal_cdf(w) - normal_cdf(-w);
    double t = 2.0 * w * normal_pdf(w) / z;
    return 1.0 - t;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        double fa = static_cast<double>(i) / a.size();
        double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

}  // namespace

TEST_CASE("median of the symmetric truncated growth shock is the mean") {
    UncertaintySet unc;
    auto z = unc.sample_growth_shocks(0, 0.5, 0.5);
    CHECK_THAT(z.tfp_growth, Catch::Matchers::WithinAbs(0.076, 1e-12));
    CHECK_THAT(z.sigma_growth, Catch::Matchers::WithinAbs(-0.0152, 1e-12));
}

TEST_CASE("growth shock draws stay inside the truncation bounds") {
    UncertaintySet unc;
    Rng gen(7);
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        auto z = unc.sample_growth_shocks(0, gen);
        REQUIRE(z.tfp_growth >= 0.076 - 2.0 * 0.056);
        REQUIRE(z.tfp_growth <= 0.076 + 2.0 * 0.056);
        REQUIRE(z.sigma_growth >= -0.0152 - 2.0 * 0.0032);
        REQUIRE(z.sigma_growth <= -0.0152 + 2.0 * 0.0032);
    }
}

TEST_CASE("empirical sd of g_sigma(0) matches the truncated-normal closed form") {
    UncertaintySet unc;
    Rng gen(11);
    const int n = 1'000'000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = unc.sample_growth_shocks(0, gen).sigma_growth;
    double expected = 0.0032 * std::sqrt(truncated_variance_factor(2.0));
    // Shrink factor is about 0.880.
    CHECK_THAT(std::sqrt(truncated_variance_factor(2.0)),
               Catch::Matchers::WithinAbs(0.880, 0.002));
    CHECK_THAT(stdev(draws), Catch::Matchers::WithinRel(expected, 0.01));
}

TEST_CASE("time-indexed growth shock families decay as specified") {
    UncertaintySet unc;
    CHECK_THAT(unc.tfp_growth_mean(1), Catch::Matchers::WithinRel(0.076 * std::exp(-0.025), 1e-12));
    CHECK_THAT(unc.tfp_growth_sd(2), Catch::Matchers::WithinRel(0.056 * std::exp(-0.05), 1e-12));
    CHECK_THAT(unc.sigma_growth_mean(3),
               Catch::Matchers::WithinRel(-0.0152 * std::pow(0.999, 15.0), 1e-12));
}

TEST_CASE("initial parameter ranges honor the truncation rules") {
    UncertaintySet unc;
    auto ets = unc.ets();
    CHECK_THAT(ets.level_lower(), Catch::Matchers::WithinAbs(1.780, 1e-3));
    CHECK_THAT(ets.level_upper(), Catch::Matchers::WithinAbs(5.131, 1e-3));
    auto damage = unc.damage();
    CHECK_THAT(damage.level_lower(), Catch::Matchers::WithinAbs(0.00118, 1e-12));
    CHECK_THAT(damage.level_upper(), Catch::Matchers::WithinAbs(0.00472, 1e-12));

    auto p = unc.sample_initial_params(0.5, 0.5, 0.5);
    CHECK_THAT(p[0], Catch::Matchers::WithinAbs(std::exp(1.1060), 1e-9));
    // Asymmetric truncation shifts the damage median above the mean; value
    // from a bisection of the truncated CDF.
    CHECK_THAT(p[1], Catch::Matchers::WithinAbs(0.00256197, 1e-7));
    CHECK_THAT(p[2], Catch::Matchers::WithinAbs(std::exp(5.8510), 1e-6));
}

TEST_CASE("damage coefficient draws are never non-positive") {
    UncertaintySet unc;
    Rng gen(13);
    for (int i = 0; i < 1'000'000; ++i) {
        auto p = unc.sample_initial_params(gen);
        REQUIRE(p[1] > 0.0);
        REQUIRE(p[1] >= 0.00118);
        REQUIRE(p[1] <= 0.00472);
        REQUIRE(p[0] > 0.0);
        REQUIRE(p[2] > 0.0);
    }
}

TEST_CASE("inverse-CDF sampler matches a rejection sampler in distribution") {
    UncertaintySet unc;
    const int n = 100'000;
    // Two-sample KS critical value at alpha = 0.01.
    double critical = 1.628 * std::sqrt(2.0 / n);

    for (auto spec : {unc.tfp_growth(0), unc.sigma_growth(4), unc.ets(), unc.damage()}) {
        Rng gen_a(17), gen_b(23);
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = spec.sample(gen_a);
            b[i] = rejection_sample(spec, gen_b);
        }
        CHECK(two_sample_ks(std::move(a), std::move(b)) < critical);
    }
}
