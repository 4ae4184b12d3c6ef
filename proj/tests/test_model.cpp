#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dlsmc/model.hpp"
#include "dlsmc/rng.hpp"

using namespace dlsmc;

namespace {

StateVector random_state(Rng& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StateVector x;
    x.capital = 0.5 + 5.0 * u(gen);
    x.carbon = {400.0 + 1200.0 * u(gen), 200.0 + 800.0 * u(gen), 1000.0 + 2000.0 * u(gen)};
    x.temp = {0.2 + 5.0 * u(gen), 0.1 + 2.0 * u(gen)};
    x.tfp_factor = 0.5 + 1.5 * u(gen);
    x.carbon_intensity = 0.05 + 0.4 * u(gen);
    x.ets = 1.8 + 3.3 * u(gen);
    x.damage_coeff = 0.0012 + 0.0035 * u(gen);
    x.carbon_upper_eq = 210.0 + 370.0 * u(gen);
    return x;
}

// Straight-line reimplementation of the terminal continuation in raw
// (unnormalized) units; exercises the exogenous paths, the normalization and
// the transition assembly through a fully independent code path.
double terminal_oracle(const ModelParams& p, const StateVector& xN) {
    const double delta = p.years_per_step;
    const int n = p.steps;
    const double aug = 1.0 / (1.0 - p.capital_elasticity);

    // Exogenous paths from scratch.
    int horizon = n + p.terminal_extension + 1;
    std::vector<double> labor(horizon), tfp(horizon), g_a(horizon), g_s(horizon);
    labor[0] = p.labor0;
    tfp[0] = p.tfp0;
    for (int t = 0; t < horizon; ++t) {
        g_a[t] = p.tfp_growth0 * std::exp(-p.tfp_growth_decay * delta * t);
        g_s[t] = p.sigma_growth0 * std::pow(1.0 - p.sigma_growth_decay, delta * t);
        if (t + 1 < horizon) {
            labor[t + 1] = labor[t] * std::pow(p.labor_asymptote / labor[t], p.labor_growth);
            tfp[t + 1] = tfp[t] / (1.0 - g_a[t]);
        }
    }

    // Raw-unit initial conditions at t = N.
    double atilde_det_n = std::pow(tfp[n], aug);
    double capital = xN.capital * atilde_det_n * labor[n];  // trillions
    double atilde = xN.tfp_factor * atilde_det_n;           // realized, constant under mean growth
    std::array<double, 3> m = xN.carbon;
    std::array<double, 2> temp = xN.temp;
    double sigma = xN.carbon_intensity;

    double phi12 = 0.12 * 588.0 / xN.carbon_upper_eq;
    double phi23 = 0.007 * xN.carbon_upper_eq / 1720.0;
    double psi2 = p.forcing_coeff / xN.ets;

    double value = 0.0;
    double disc = 1.0;
    double rho = std::pow(1.0 + p.annual_discount, -delta);
    for (int s = 0; s < p.terminal_extension; ++s) {
        int t = n + s;
        // Realized Atilde keeps tracking the deterministic path under mean growth.
        double atilde_t = atilde * std::pow(std::pow(tfp[t], aug) / atilde_det_n, 1.0);
        double gross = std::pow(capital, p.capital_elasticity) *
                       std::pow(atilde_t * labor[t], 1.0 - p.capital_elasticity);
        double damage = xN.damage_coeff * temp[0] * temp[0];
        double lambda = p.backstop0 * std::pow(1.0 - p.backstop_decline, t) /
                        (1000.0 * p.abatement_exponent) * sigma * 1.0;  // mu = 1
        double net = (1.0 - lambda) * gross / (1.0 + damage);
        double consumption = p.terminal_consumption * net;
        double cpc = consumption * 1000.0 / labor[t];
        value += disc * delta * labor[t] *
                 (std::pow(cpc, 1.0 - p.risk_aversion) - 1.0) / (1.0 - p.risk_aversion);

        double emis = 2.6 * std::pow(1.0 - 0.115, t);  // mu = 1: land use only
        std::array<double, 3> m_next;
        m_next[0] = (1.0 - 0.12) * m[0] + phi12 * m[1] + delta * p.co2_to_carbon * emis;
        m_next[1] = 0.12 * m[0] + (1.0 - phi12 - 0.007) * m[1] + phi23 * m[2];
        m_next[2] = 0.007 * m[1] + (1.0 - phi23) * m[2];
        double ftilde = (t + 1) < 17 ? 0.5 + (t + 1) / 34.0 : 1.0;
        double force = p.forcing_coeff * std::log2(m_next[0] / 588.0) + ftilde;
        std::array<double, 2> temp_next;
        temp_next[0] = (1.0 - p.psi1 * psi2 - p.psi1 * p.psi3) * temp[0] +
                       p.psi1 * p.psi3 * temp[1] + p.psi1 * force;
        temp_next[1] = p.psi4 * temp[0] + (1.0 - p.psi4) * temp[1];
        capital = std::pow(1.0 - p.annual_depreciation, delta) * capital +
                  delta * (net - consumption);
        sigma *= std::exp(g_s[t] * delta);
        m = m_next;
        temp = temp_next;
        disc *= rho;
    }
    return value;
}

}  // namespace

TEST_CASE("exogenous paths reproduce the base recursions") {
    Model model;
    CHECK(model.labor(0) == 7.403);
    CHECK_THAT(model.labor(1), Catch::Matchers::WithinAbs(7.853, 5e-4));
    CHECK_THAT(model.tfp_growth_mean(1), Catch::Matchers::WithinAbs(0.07412, 5e-6));
    CHECK_THAT(model.sigma_det(0), Catch::Matchers::WithinRel(0.35032, 1e-4));
    CHECK_THAT(model.exo_forcing(0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(model.exo_forcing(16), Catch::Matchers::WithinAbs(0.5 + 16.0 / 34.0, 1e-15));
    CHECK(model.exo_forcing(17) == 1.0);
    CHECK(model.exo_forcing(40) == 1.0);
    CHECK_THROWS_AS(model.labor(model.horizon() + 1), std::out_of_range);
    CHECK_THROWS_AS(model.labor(-1), std::out_of_range);
}

TEST_CASE("gross output is Cobb-Douglas in normalized units") {
    Model model;
    CHECK(model.gross_output(1.0, 1.0) == 1.0);
    CHECK_THAT(model.gross_output(8.0, 1.0), Catch::Matchers::WithinAbs(1.8661, 5e-5));
    CHECK_THROWS_AS(model.gross_output(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(model.gross_output(1.0, -1.0), std::domain_error);
}

TEST_CASE("denormalized initial gross output matches the raw-unit formula") {
    Model model;
    StateVector x0 = model.initial_state();
    double normalized_route = model.to_raw(model.gross_output(x0.capital, 1.0), 0);
    const auto& p = model.params();
    double raw_route = p.tfp0 * std::pow(p.capital0, p.capital_elasticity) *
                       std::pow(p.labor0, 1.0 - p.capital_elasticity);
    CHECK_THAT(normalized_route, Catch::Matchers::WithinRel(raw_route, 1e-12));
    CHECK(raw_route > 105.0);
    CHECK(raw_route < 105.5);
}

TEST_CASE("damage fraction is quadratic in atmospheric temperature") {
    Model model;
    CHECK(model.damages_fraction(0.0, 0.00236) == 0.0);
    CHECK_THAT(model.damages_fraction(3.0, 0.00236), Catch::Matchers::WithinAbs(0.02124, 1e-12));
    CHECK_THAT(model.damages_fraction(2.0, 0.00118), Catch::Matchers::WithinAbs(0.00472, 1e-12));
}

TEST_CASE("abatement and net output follow the cost schedule") {
    Model model;
    double sigma0 = model.params().sigma0();
    CHECK_THAT(model.abatement_fraction(0, sigma0, 1.0),
               Catch::Matchers::WithinAbs(0.07411, 5e-5));
    CHECK(model.net_output(2.0, 0.0, 0.0) == 2.0);

    StateVector x = model.initial_state();
    double prev = model.net_output_at(x, PolicyPair{0.7, 0.0}, 0);
    for (double mu : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        double q = model.net_output_at(x, PolicyPair{0.7, mu}, 0);
        CHECK(q < prev);
        prev = q;
    }
}

TEST_CASE("carbon is conserved by every transition") {
    Model model;
    Rng gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100'000; ++i) {
        StateVector x = random_state(gen);
        PolicyPair pi{0.05 + 0.9 * u(gen), u(gen)};
        int t = static_cast<int>(u(gen) * 96);
        double e_total = model.emissions(x, pi.mitigation, t);
        StateVector next = model.post_decision(x, pi, t);
        double before = x.carbon[0] + x.carbon[1] + x.carbon[2];
        double after = next.carbon[0] + next.carbon[1] + next.carbon[2];
        double expected = before + model.params().years_per_step *
                                       model.params().co2_to_carbon * e_total;
        worst = std::max(worst, std::abs(after - expected) / expected);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("temperature recursion under constant doubling forcing reaches ets") {
    Model model;
    Rng gen(31);
    std::uniform_real_distribution<double> u(1.781, 5.130);
    for (int i = 0; i < 100; ++i) {
        double ets = i == 0 ? 3.1 : u(gen);
        auto psi = model.temperature_matrix(ets);
        std::array<double, 2> temp{0.85, 0.0068};
        double eta = model.params().forcing_coeff;
        for (int it = 0; it < 200'000; ++it) {
            std::array<double, 2> next;
            next[0] = psi[0][0] * temp[0] + psi[0][1] * temp[1] + model.params().psi1 * eta;
            next[1] = psi[1][0] * temp[0] + psi[1][1] * temp[1];
            if (std::abs(next[0] - temp[0]) < 1e-13 && std::abs(next[1] - temp[1]) < 1e-13) {
                temp = next;
                break;
            }
            temp = next;
        }
        REQUIRE_THAT(temp[0], Catch::Matchers::WithinAbs(ets, 1e-6));
    }
}

TEST_CASE("initial forcing matches the closed form") {
    Model model;
    CHECK_THAT(model.forcing(851.0, 0), Catch::Matchers::WithinAbs(2.4633, 1e-4));
}

TEST_CASE("transition advances state as expected at t=0") {
    Model model;
    StateVector x0 = model.initial_state();
    PolicyPair pi{0.75, 0.03};
    StateVector post = model.post_decision(x0, pi, 0);
    // Atmospheric carbon in 2020 lands near 890 GtC, temperature near 1.02 C.
    CHECK_THAT(post.carbon[0], Catch::Matchers::WithinAbs(891.0, 2.0));
    CHECK_THAT(post.temp[0], Catch::Matchers::WithinAbs(1.016, 0.01));
    // Growth shocks only touch productivity and carbon intensity.
    DisturbancePair z{0.09, -0.017};
    StateVector next = model.apply_growth(post, z, 0);
    CHECK(next.capital == post.capital);
    CHECK(next.carbon == post.carbon);
    CHECK(next.temp == post.temp);
    CHECK(next.tfp_factor > post.tfp_factor);  // drawn growth above the mean
    CHECK(next.carbon_intensity < post.carbon_intensity);
}

TEST_CASE("normalization round trip is exact") {
    Model model;
    for (int t : {0, 1, 17, 45, 96, 97}) {
        double k = 223.0;
        CHECK_THAT(model.to_raw(model.from_raw(k, t), t), Catch::Matchers::WithinRel(k, 1e-14));
    }
}

TEST_CASE("utility and reward follow the DICE conventions") {
    Model model;
    CHECK(crra_utility(1.0, 1.45) == 0.0);
    CHECK_THAT(crra_utility(2.0, 1.45), Catch::Matchers::WithinAbs(0.595460, 5e-6));
    CHECK_THAT(model.params().step_discount(), Catch::Matchers::WithinAbs(0.92826, 5e-6));
    CHECK_THROWS_AS(crra_utility(0.0, 1.45), std::domain_error);
    CHECK_THROWS_AS(power_utility(-1.0, 1.45), std::domain_error);

    // The Bellman reward is an affine shift of the documented reward.
    StateVector x = model.initial_state();
    PolicyPair pi{0.75, 0.1};
    double shift = model.params().years_per_step * model.labor(3) /
                   (1.0 - model.params().risk_aversion);
    CHECK_THAT(model.bellman_reward(x, pi, 3) - model.reward(x, pi, 3),
               Catch::Matchers::WithinRel(shift, 1e-12));
    CHECK(model.bellman_reward(x, pi, 3) < 0.0);

    // Per-capita consumption follows c * Q * 1000 / L.
    double q_raw = model.to_raw(model.net_output_at(x, pi, 3), 3);
    CHECK_THAT(model.per_capita_consumption(x, pi, 3),
               Catch::Matchers::WithinRel(0.75 * q_raw * 1000.0 / model.labor(3), 1e-13));
}

TEST_CASE("terminal reward matches an independent raw-unit rollout") {
    Model model;
    Rng gen(97);
    for (int i = 0; i < 20; ++i) {
        StateVector x = random_state(gen);
        double expected = terminal_oracle(model.params(), x);
        double got = model.terminal_reward(x);
        REQUIRE(std::isfinite(got));
        REQUIRE_THAT(got, Catch::Matchers::WithinRel(expected, 1e-10));
    }
}

TEST_CASE("terminal reward is strictly decreasing in initial temperature") {
    Model model;
    Rng gen(101);
    StateVector x = random_state(gen);
    StateVector hot = x;
    hot.temp[0] += 0.5;
    CHECK(model.terminal_reward(hot) < model.terminal_reward(x));
    CHECK(model.terminal_value(hot) < model.terminal_value(x));
}
