#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dlsmc/uncertainty.hpp"

namespace dlsmc {

inline constexpr int kStateDim = 11;

// Controls: consumption as a fraction of net output, and the emission
// mitigation rate. Both dimensionless.
struct PolicyPair {
    double consumption = 0.75;  // c in (0,1)
    double mitigation = 0.0;    // mu in [0,1]
};

struct ModelParams {
    // Horizon: t=0 is the year 2015, steps of 5 years, t=N the year 2500.
    int steps = 97;
    double years_per_step = 5.0;
    int terminal_extension = 100;  // fixed-policy steps appended after t=N

    // Preferences.
    double risk_aversion = 1.45;   // alpha
    double annual_discount = 0.015;  // rho

    // Production.
    double capital_elasticity = 0.3;      // gamma
    double annual_depreciation = 0.1;     // delta_K
    double abatement_exponent = 2.6;      // theta2

    // Carbon cycle and temperature.
    double co2_to_carbon = 1.0 / 3.666;   // beta, tC per tCO2
    double forcing_coeff = 3.6813;        // eta [W/m^2 per CO2 doubling]
    double preindustrial_carbon = 588.0;  // GtC
    double phi21 = 0.12;
    double phi32 = 0.007;
    double carbon_upper_eq = 360.0;       // GtC; replaced per trajectory when drawn
    double carbon_lower_eq = 1720.0;      // GtC
    double psi1 = 0.1005;
    double psi3 = 0.088;
    double psi4 = 0.025;
    double ets = 3.1;                     // deg C; psi2 = eta / ets
    double damage_coeff = 0.00236;        // pi2

    // Initial states.
    double capital0 = 223.0;                       // trillions 2015$
    std::array<double, 3> carbon0{851.0, 460.0, 1740.0};  // GtC
    std::array<double, 2> temp0{0.85, 0.0068};            // deg C above 1900

    // Exogenous paths.
    double labor0 = 7.403;        // billions
    double labor_asymptote = 11.5;
    double labor_growth = 0.134;
    double tfp0 = 5.115;          // A_0
    double tfp_growth0 = 0.076;   // g_A(0), per step
    double tfp_growth_decay = 0.005;   // per year
    double initial_output = 105.5;     // trillions; calibrates sigma_0
    double initial_mitigation = 0.03;  // ditto
    double industrial_emissions0 = 35.85;  // GtCO2/yr; sigma_0 numerator
    double sigma_growth0 = -0.0152;    // g_sigma(0), per year
    double sigma_growth_decay = 0.001; // per year
    double backstop0 = 550.0;          // $/tCO2
    double backstop_decline = 0.025;   // per step
    double land_emissions0 = 2.6;      // GtCO2/yr
    double land_emissions_decline = 0.115;  // per step

    // Terminal continuation policy.
    double terminal_consumption = 0.78;
    double terminal_mitigation = 1.0;

    // Trillions of output against billions of people: per-capita units.
    double per_capita_scale = 1000.0;

    double sigma0() const {
        return industrial_emissions0 / (initial_output * (1.0 - initial_mitigation));
    }
    double step_discount() const {
        return std::pow(1.0 + annual_discount, -years_per_step);
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw std::invalid_argument(std::string("ModelParams: ") + name + " must be > 0");
        };
        positive(risk_aversion, "risk_aversion");
        positive(annual_depreciation, "annual_depreciation");
        positive(abatement_exponent, "abatement_exponent");
        positive(psi1, "psi1");
        positive(psi3, "psi3");
        positive(psi4, "psi4");
        positive(ets, "ets");
        if (!(capital_elasticity > 0.0 && capital_elasticity < 1.0))
            throw std::invalid_argument("ModelParams: capital_elasticity must lie in (0,1)");
        if (steps < 1) throw std::invalid_argument("ModelParams: steps must be >= 1");
    }
};

// The 11-dimensional stochastic state. Capital is measured per unit of
// effective labor; carbon and temperature in natural units; tfp_factor is
// the ratio of realized to deterministic labor-augmenting productivity; the
// last three entries are the per-trajectory parameter draws.
struct StateVector {
    double capital = 0.0;                       // k > 0
    std::array<double, 3> carbon{0.0, 0.0, 0.0};  // M_AT, M_UP, M_LO [GtC]
    std::array<double, 2> temp{0.0, 0.0};         // T_AT, T_LO [deg C]
    double tfp_factor = 1.0;                    // a
    double carbon_intensity = 0.0;              // sigma [GtCO2 per trillion $]
    double ets = 3.1;
    double damage_coeff = 0.00236;
    double carbon_upper_eq = 360.0;

    std::array<double, kStateDim> to_array() const {
        return {capital, carbon[0], carbon[1], carbon[2], temp[0], temp[1],
                tfp_factor, carbon_intensity, ets, damage_coeff, carbon_upper_eq};
    }

    static StateVector from_array(std::span<const double> v) {
        StateVector x;
        x.capital = v[0];
        x.carbon = {v[1], v[2], v[3]};
        x.temp = {v[4], v[5]};
        x.tfp_factor = v[6];
        x.carbon_intensity = v[7];
        x.ets = v[8];
        x.damage_coeff = v[9];
        x.carbon_upper_eq = v[10];
        return x;
    }

    bool valid() const {
        return capital > 0.0 && carbon[0] > 0.0 && carbon[1] > 0.0 && carbon[2] > 0.0 &&
               tfp_factor > 0.0 && carbon_intensity > 0.0 && ets > 0.0 &&
               carbon_upper_eq > 0.0 && damage_coeff >= 0.0 &&
               std::isfinite(temp[0]) && std::isfinite(temp[1]);
    }
};

// CRRA utility in the DICE convention, u(c) = (c^(1-alpha) - 1)/(1-alpha).
inline double crra_utility(double c, double alpha) {
    if (!(c > 0.0)) throw std::domain_error("crra_utility: consumption must be > 0");
    if (alpha == 1.0) return std::log(c);
    return (std::pow(c, 1.0 - alpha) - 1.0) / (1.0 - alpha);
}

// Unshifted power utility, u(c) = c^(1-alpha)/(1-alpha). Policy-equivalent
// affine rescale of crra_utility; stays negative for alpha > 1, which the
// exponential value transform requires.
inline double power_utility(double c, double alpha) {
    if (!(c > 0.0)) throw std::domain_error("power_utility: consumption must be > 0");
    if (alpha == 1.0) return std::log(c);
    return std::pow(c, 1.0 - alpha) / (1.0 - alpha);
}

inline double power_utility_derivative(double c, double alpha) {
    return std::pow(c, -alpha);
}

// Deterministic exogenous quantities, precomputed over the full horizon
// including the terminal extension.
struct ExogenousPaths {
    std::vector<double> labor;             // L_t [billions]
    std::vector<double> tfp_growth_mean;   // mean g_A(t), per step
    std::vector<double> sigma_growth_mean; // mean g_sigma(t), per year
    std::vector<double> tfp_det;           // deterministic A_t
    std::vector<double> tfp_aug_det;       // deterministic Atilde_t = A_t^(1/(1-gamma))
    std::vector<double> effective_labor;   // Atilde_t * L_t (denormalization constant)
    std::vector<double> sigma_det;         // deterministic sigma_t
    std::vector<double> land_emissions;    // Etilde_t [GtCO2/yr]
    std::vector<double> exo_forcing;       // Ftilde_t [W/m^2]
    std::vector<double> abatement_coeff;   // Lambda_t = coeff * sigma_t * mu^theta2
};

// DICE-2016R2 machinery: all operations are pure and const after
// construction, safe for unrestricted concurrent use.
class Model {
public:
    explicit Model(ModelParams params = {}) : p_(params) {
        p_.validate();
        const int horizon = p_.steps + p_.terminal_extension + 1;
        auto& e = paths_;
        e.labor.resize(horizon);
        e.tfp_growth_mean.resize(horizon);
        e.sigma_growth_mean.resize(horizon);
        e.tfp_det.resize(horizon);
        e.tfp_aug_det.resize(horizon);
        e.effective_labor.resize(horizon);
        e.sigma_det.resize(horizon);
        e.land_emissions.resize(horizon);
        e.exo_forcing.resize(horizon);
        e.abatement_coeff.resize(horizon);

        const double delta = p_.years_per_step;
        e.labor[0] = p_.labor0;
        e.tfp_det[0] = p_.tfp0;
        e.sigma_det[0] = p_.sigma0();
        for (int t = 0; t < horizon; ++t) {
            e.tfp_growth_mean[t] = p_.tfp_growth0 * std::exp(-p_.tfp_growth_decay * delta * t);
            e.sigma_growth_mean[t] = p_.sigma_growth0 *
                                     std::pow(1.0 - p_.sigma_growth_decay, delta * t);
            e.land_emissions[t] = p_.land_emissions0 * std::pow(1.0 - p_.land_emissions_decline, t);
            e.exo_forcing[t] = t < 17 ? 0.5 + t / 34.0 : 1.0;
            e.abatement_coeff[t] = p_.backstop0 * std::pow(1.0 - p_.backstop_decline, t) /
                                   (1000.0 * p_.abatement_exponent);
            if (t + 1 < horizon) {
                e.labor[t + 1] = e.labor[t] *
                                 std::pow(p_.labor_asymptote / e.labor[t], p_.labor_growth);
                e.tfp_det[t + 1] = e.tfp_det[t] / (1.0 - e.tfp_growth_mean[t]);
                e.sigma_det[t + 1] = e.sigma_det[t] *
                                     std::exp(e.sigma_growth_mean[t] * delta);
            }
        }
        const double aug = 1.0 / (1.0 - p_.capital_elasticity);
        for (int t = 0; t < horizon; ++t) {
            e.tfp_aug_det[t] = std::pow(e.tfp_det[t], aug);
            e.effective_labor[t] = e.tfp_aug_det[t] * e.labor[t];
        }
    }

    const ModelParams& params() const { return p_; }
    const ExogenousPaths& paths() const { return paths_; }
    int steps() const { return p_.steps; }
    int horizon() const { return static_cast<int>(paths_.labor.size()) - 1; }

    void check_step(int t) const {
        if (t < 0 || t > horizon())
            throw std::out_of_range("Model: time step outside precomputed horizon");
    }

    double labor(int t) const { check_step(t); return paths_.labor[t]; }
    double effective_labor(int t) const { check_step(t); return paths_.effective_labor[t]; }
    double land_emissions(int t) const { check_step(t); return paths_.land_emissions[t]; }
    double exo_forcing(int t) const { check_step(t); return paths_.exo_forcing[t]; }
    double abatement_coeff(int t) const { check_step(t); return paths_.abatement_coeff[t]; }
    double tfp_growth_mean(int t) const { check_step(t); return paths_.tfp_growth_mean[t]; }
    double sigma_growth_mean(int t) const { check_step(t); return paths_.sigma_growth_mean[t]; }
    double sigma_det(int t) const { check_step(t); return paths_.sigma_det[t]; }
    double tfp_aug_det(int t) const { check_step(t); return paths_.tfp_aug_det[t]; }

    int year(int t) const { return 2015 + static_cast<int>(p_.years_per_step) * t; }

    // Output per unit of effective labor, y = k^gamma a^(1-gamma).
    double gross_output(double capital, double tfp_factor) const {
        if (!(capital > 0.0 && tfp_factor > 0.0))
            throw std::domain_error("gross_output: inputs must be > 0");
        return std::pow(capital, p_.capital_elasticity) *
               std::pow(tfp_factor, 1.0 - p_.capital_elasticity);
    }

    // Denormalization: per-effective-labor value times Atilde_t^det L_t.
    double to_raw(double normalized, int t) const { return normalized * effective_labor(t); }
    double from_raw(double raw, int t) const { return raw / effective_labor(t); }

    double damages_fraction(double temp_at, double damage_coeff) const {
        return damage_coeff * temp_at * temp_at;
    }

    double abatement_fraction(int t, double sigma, double mitigation) const {
        return abatement_coeff(t) * sigma * std::pow(mitigation, p_.abatement_exponent);
    }

    double net_output(double gross, double damages, double abatement) const {
        return (1.0 - abatement) * gross / (1.0 + damages);
    }

    // Net output per unit of effective labor for (x, pi) at t.
    double net_output_at(const StateVector& x, const PolicyPair& pi, int t) const {
        double y = gross_output(x.capital, x.tfp_factor);
        double d = damages_fraction(x.temp[0], x.damage_coeff);
        double lambda = abatement_fraction(t, x.carbon_intensity, pi.mitigation);
        return net_output(y, d, lambda);
    }

    // Total CO2 emissions [GtCO2/yr]: industrial plus exogenous land use.
    double emissions(const StateVector& x, double mitigation, int t) const {
        double gross_raw = to_raw(gross_output(x.capital, x.tfp_factor), t);
        return x.carbon_intensity * (1.0 - mitigation) * gross_raw + land_emissions(t);
    }

    // Carbon transition matrix with the drawn upper-strata equilibrium in
    // place of 360; columns sum to one by construction.
    std::array<std::array<double, 3>, 3> carbon_matrix(double upper_eq) const {
        double phi12 = p_.phi21 * p_.preindustrial_carbon / upper_eq;
        double phi23 = p_.phi32 * upper_eq / p_.carbon_lower_eq;
        return {{{1.0 - p_.phi21, phi12, 0.0},
                 {p_.phi21, 1.0 - phi12 - p_.phi32, phi23},
                 {0.0, p_.phi32, 1.0 - phi23}}};
    }

    // Temperature transition matrix with psi2 = eta / ets.
    std::array<std::array<double, 2>, 2> temperature_matrix(double ets) const {
        double psi2 = p_.forcing_coeff / ets;
        return {{{1.0 - p_.psi1 * psi2 - p_.psi1 * p_.psi3, p_.psi1 * p_.psi3},
                 {p_.psi4, 1.0 - p_.psi4}}};
    }

    double forcing(double carbon_at, int t) const {
        return p_.forcing_coeff * std::log2(carbon_at / p_.preindustrial_carbon) +
               exo_forcing(t);
    }

    // Deterministic half of the transition: advances capital, carbon and
    // temperature to t+1 while productivity, carbon intensity and the drawn
    // parameters stay at time t. This is the post-decision state.
    StateVector post_decision(const StateVector& x, const PolicyPair& pi, int t) const {
        const double delta = p_.years_per_step;
        double y = gross_output(x.capital, x.tfp_factor);
        double d = damages_fraction(x.temp[0], x.damage_coeff);
        double lambda = abatement_fraction(t, x.carbon_intensity, pi.mitigation);
        double q = net_output(y, d, lambda);

        double e_total = x.carbon_intensity * (1.0 - pi.mitigation) * to_raw(y, t) +
                         land_emissions(t);

        StateVector out = x;
        auto phi = carbon_matrix(x.carbon_upper_eq);
        for (int i = 0; i < 3; ++i) {
            out.carbon[i] = phi[i][0] * x.carbon[0] + phi[i][1] * x.carbon[1] +
                            phi[i][2] * x.carbon[2];
        }
        out.carbon[0] += delta * p_.co2_to_carbon * e_total;

        double f_next = forcing(out.carbon[0], t + 1);
        auto psi = temperature_matrix(x.ets);
        out.temp[0] = psi[0][0] * x.temp[0] + psi[0][1] * x.temp[1] + p_.psi1 * f_next;
        out.temp[1] = psi[1][0] * x.temp[0] + psi[1][1] * x.temp[1];

        double invest = (1.0 - pi.consumption) * q;
        double capital_next_raw = std::pow(1.0 - p_.annual_depreciation, delta) *
                                      to_raw(x.capital, t) +
                                  delta * to_raw(invest, t);
        out.capital = capital_next_raw / effective_labor(t + 1);
        return out;
    }

    // Stochastic half: growth draws advance productivity and carbon
    // intensity from t to t+1.
    StateVector apply_growth(const StateVector& post, const DisturbancePair& z, int t) const {
        StateVector out = post;
        double aug = 1.0 / (1.0 - p_.capital_elasticity);
        out.tfp_factor = post.tfp_factor *
                         std::pow((1.0 - tfp_growth_mean(t)) / (1.0 - z.tfp_growth), aug);
        out.carbon_intensity = post.carbon_intensity *
                               std::exp(z.sigma_growth * p_.years_per_step);
        return out;
    }

    StateVector transition(const StateVector& x, const PolicyPair& pi,
                           const DisturbancePair& z, int t) const {
        return apply_growth(post_decision(x, pi, t), z, t);
    }

    // Per-capita consumption in the DICE scale convention,
    // c_pc = c * Q_t * 1000 / L_t with Q in trillions and L in billions.
    double per_capita_consumption(const StateVector& x, const PolicyPair& pi, int t) const {
        double q_raw = to_raw(net_output_at(x, pi, t), t);
        return pi.consumption * q_raw * p_.per_capita_scale / labor(t);
    }

    // Population-weighted period utility, Delta * L_t * u(c_pc). The DICE
    // convention (crra_utility) is the documented reward; the Bellman
    // machinery uses the unshifted variant below.
    double reward(const StateVector& x, const PolicyPair& pi, int t) const {
        return p_.years_per_step * labor(t) *
               crra_utility(per_capita_consumption(x, pi, t), p_.risk_aversion);
    }

    double bellman_reward(const StateVector& x, const PolicyPair& pi, int t) const {
        return p_.years_per_step * labor(t) *
               power_utility(per_capita_consumption(x, pi, t), p_.risk_aversion);
    }

    // Terminal boundary value at t = steps: the system is evolved
    // deterministically (growth rates at their means, drawn parameters kept)
    // for terminal_extension further steps under the fixed continuation
    // policy, and the discounted utility sum is returned.
    double terminal_reward(const StateVector& x) const { return terminal_rollout(x, false); }
    double terminal_value(const StateVector& x) const { return terminal_rollout(x, true); }

    StateVector initial_state() const {
        StateVector x;
        x.capital = p_.capital0 / effective_labor(0);
        x.carbon = p_.carbon0;
        x.temp = p_.temp0;
        x.tfp_factor = 1.0;
        x.carbon_intensity = p_.sigma0();
        x.ets = p_.ets;
        x.damage_coeff = p_.damage_coeff;
        x.carbon_upper_eq = p_.carbon_upper_eq;
        return x;
    }

private:
    double terminal_rollout(const StateVector& terminal_state, bool unshifted) const {
        const PolicyPair pi{p_.terminal_consumption, p_.terminal_mitigation};
        const double rho = step_discount_cached();
        StateVector x = terminal_state;
        double value = 0.0;
        double disc = 1.0;
        for (int s = 0; s < p_.terminal_extension; ++s) {
            int t = p_.steps + s;
            value += disc * (unshifted ? bellman_reward(x, pi, t) : reward(x, pi, t));
            DisturbancePair z{tfp_growth_mean(t), sigma_growth_mean(t)};
            x = transition(x, pi, z, t);
            disc *= rho;
        }
        return value;
    }

    double step_discount_cached() const { return p_.step_discount(); }

    ModelParams p_;
    ExogenousPaths paths_;
};

}  // namespace dlsmc
