#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "dlsmc/rng.hpp"
#include "dlsmc/stats.hpp"

namespace dlsmc {

struct DisturbancePair {
    double tfp_growth;    // g_A(t) draw, per 5-year step
    double sigma_growth;  // g_sigma(t) draw, per year
};

// Gaussian truncated to [lower, upper], sampled by inverse CDF. With
// log_space set, the Gaussian lives in log space and realized draws are
// exponentials (truncation bounds are in log space as well).
struct TruncatedGaussianSpec {
    double mean = 0.0;
    double sd = 1.0;
    double lower = 0.0;
    double upper = 0.0;
    bool log_space = false;

    void validate() const {
        if (!(sd > 0.0)) throw std::invalid_argument("TruncatedGaussianSpec: sd must be > 0");
        if (!(lower < upper)) throw std::invalid_argument("TruncatedGaussianSpec: lower must be < upper");
    }

    // Inverse CDF of the truncated distribution at u in (0,1); returns the
    // realized (level-space) value.
    double quantile(double u) const {
        double a = (lower - mean) / sd;
        double b = (upper - mean) / sd;
        double fa = normal_cdf(a);
        double fb = normal_cdf(b);
        double x = mean + sd * normal_quantile(fa + u * (fb - fa));
        x = std::clamp(x, lower, upper);
        return log_space ? std::exp(x) : x;
    }

    double sample(Rng& gen) const { return quantile(uniform01(gen)); }

    double level_lower() const { return log_space ? std::exp(lower) : lower; }
    double level_upper() const { return log_space ? std::exp(upper) : upper; }
    double median() const { return quantile(0.5); }

    bool contains(double level_value) const {
        return level_value >= level_lower() && level_value <= level_upper();
    }
};

inline TruncatedGaussianSpec symmetric_truncated(double mean, double sd, double width,
                                                 bool log_space = false) {
    return TruncatedGaussianSpec{mean, sd, mean - width * sd, mean + width * sd, log_space};
}

// The five uncertainty channels: time-indexed truncated Gaussians for the
// productivity and decarbonization growth rates, and three initial-parameter
// distributions drawn once per trajectory.
struct UncertaintySet {
    double years_per_step = 5.0;

    // g_A(t): mean/sd decay exp(-0.005 t*Delta), truncated at +-2 sd.
    double tfp_growth_mean0 = 0.076;
    double tfp_growth_sd0 = 0.056;
    double tfp_growth_decay = 0.005;  // per year

    // g_sigma(t): mean/sd decay (1-0.001)^(t*Delta), truncated at +-2 sd.
    double sigma_growth_mean0 = -0.0152;
    double sigma_growth_sd0 = 0.0032;
    double sigma_growth_decay = 0.001;  // per year

    double truncation_width = 2.0;

    // Equilibrium temperature sensitivity: exp(N(1.1060, 0.2646^2)), log-space truncation.
    double ets_log_mean = 1.1060;
    double ets_log_sd = 0.2646;

    // Damage coefficient: N(0.00236, 0.00118^2) truncated at [mean-1sd, mean+2sd].
    double damage_mean = 0.00236;
    double damage_sd = 0.00118;
    double damage_lower_width = 1.0;
    double damage_upper_width = 2.0;

    // Carbon cycle coefficient: exp(N(5.8510, 0.2649^2)), log-space truncation.
    double carbon_eq_log_mean = 5.8510;
    double carbon_eq_log_sd = 0.2649;

    double tfp_growth_mean(int t) const {
        return tfp_growth_mean0 * std::exp(-tfp_growth_decay * years_per_step * t);
    }
    double tfp_growth_sd(int t) const {
        return tfp_growth_sd0 * std::exp(-tfp_growth_decay * years_per_step * t);
    }
    double sigma_growth_mean(int t) const {
        return sigma_growth_mean0 * std::pow(1.0 - sigma_growth_decay, years_per_step * t);
    }
    double sigma_growth_sd(int t) const {
        return sigma_growth_sd0 * std::pow(1.0 - sigma_growth_decay, years_per_step * t);
    }

    TruncatedGaussianSpec tfp_growth(int t) const {
        return symmetric_truncated(tfp_growth_mean(t), tfp_growth_sd(t), truncation_width);
    }
    TruncatedGaussianSpec sigma_growth(int t) const {
        return symmetric_truncated(sigma_growth_mean(t), sigma_growth_sd(t), truncation_width);
    }
    TruncatedGaussianSpec ets() const {
        return symmetric_truncated(ets_log_mean, ets_log_sd, truncation_width, true);
    }
    TruncatedGaussianSpec damage() const {
        return TruncatedGaussianSpec{damage_mean, damage_sd,
                                     damage_mean - damage_lower_width * damage_sd,
                                     damage_mean + damage_upper_width * damage_sd, false};
    }
    TruncatedGaussianSpec carbon_eq() const {
        return symmetric_truncated(carbon_eq_log_mean, carbon_eq_log_sd, truncation_width, true);
    }

    DisturbancePair sample_growth_shocks(int t, double u_tfp, double u_sigma) const {
        return DisturbancePair{tfp_growth(t).quantile(u_tfp), sigma_growth(t).quantile(u_sigma)};
    }
    DisturbancePair sample_growth_shocks(int t, Rng& gen) const {
        double u1 = uniform01(gen);
        double u2 = uniform01(gen);
        return sample_growth_shocks(t, u1, u2);
    }
    DisturbancePair mean_shocks(int t) const {
        return DisturbancePair{tfp_growth_mean(t), sigma_growth_mean(t)};
    }

    // (ets, damage coefficient, carbon cycle coefficient) from three uniforms.
    std::array<double, 3> sample_initial_params(double u1, double u2, double u3) const {
        return {ets().quantile(u1), damage().quantile(u2), carbon_eq().quantile(u3)};
    }
    std::array<double, 3> sample_initial_params(Rng& gen) const {
        double u1 = uniform01(gen);
        double u2 = uniform01(gen);
        double u3 = uniform01(gen);
        return sample_initial_params(u1, u2, u3);
    }
};

}  // namespace dlsmc
