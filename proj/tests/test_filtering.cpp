#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"
#include "habitctl/oracle.hpp"
#include "helpers.hpp"

using namespace habitctl;
using namespace testing_tuples;

namespace {

ModelParams rk4_tuple() {
    ModelParams p;
    p.sigma_s = 0.2;
    p.sigma_mu = 0.1;
    p.lambda = 0.5;
    p.rho = 0.0;
    p.theta0 = 0.05;
    return p;
}

std::vector<double> grid(double T, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = T * i / (n - 1);
    return t;
}

}  // namespace

TEST_CASE("omega_hat closed form agrees with RK4 of the Riccati equation") {
    for (const auto& p : {rk4_tuple(), default_params(), tangent_tuple(), hyperbolic_tuple()}) {
        const auto ts = grid(p.horizon, 100);
        const auto ref = oracle::rk4_omega(ts, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i)
            worst = std::max(worst, std::abs(omega_hat_closed(ts[i], p) - ref[i]));
        CHECK(worst <= 1e-8);
    }
    const auto p = rk4_tuple();
    CHECK(omega_hat_closed(1.0, p) == doctest::Approx(oracle::rk4_omega({1.0}, p)[0]).epsilon(1e-9));
}

TEST_CASE("omega_hat initial value and fixed point") {
    auto p = default_params();
    CHECK(omega_hat_closed(0.0, p) == p.theta0);
    p.theta0 = steady_state_theta(p);
    for (double t : {0.0, 0.1, 0.5, 1.0, 7.0}) CHECK(omega_hat_closed(t, p) == p.theta0);
    CHECK_THROWS_AS(omega_hat_closed(-0.1, p), DomainError);
}

TEST_CASE("steady state theta") {
    auto p = default_params();
    CHECK(omega_hat_closed(1e3, p) == doctest::Approx(steady_state_theta(p)).epsilon(1e-6));
    CHECK(steady_state_theta(p) > 0.0);

    auto q = p;
    q.sigma_mu = 0.0;
    CHECK(std::abs(steady_state_theta(q)) < 1e-15);

    q = p;
    q.rho = 0.0;
    q.lambda = 0.0;
    CHECK(steady_state_theta(q) == doctest::Approx(q.sigma_s * q.sigma_mu));

    // stationarity: 0 = sigma_mu^2 - 2 lambda th - (th + s sm rho)^2 / s^2
    const double th = steady_state_theta(p);
    const double s = p.sigma_s;
    const double lhs = p.sigma_mu * p.sigma_mu - 2.0 * p.lambda * th -
                       std::pow(th + s * p.sigma_mu * p.rho, 2) / (s * s);
    CHECK(std::abs(lhs) < 1e-14);
}

TEST_CASE("omega_hat is monotone and stays between theta0 and theta*") {
    for (double scale : {0.0, 0.2, 1.0, 1.0 + 1e-9, 3.0, 50.0}) {
        auto p = default_params();
        const double th = steady_state_theta(p);
        p.theta0 = scale * th;
        const double lo = std::min(p.theta0, th), hi = std::max(p.theta0, th);
        double prev = omega_hat_closed(0.0, p);
        for (double t : grid(5.0, 400)) {
            const double w = omega_hat_closed(t, p);
            CHECK(w >= lo);
            CHECK(w <= hi);
            if (p.theta0 > th) CHECK(w <= prev + 1e-15);
            if (p.theta0 < th) CHECK(w >= prev - 1e-15);
            prev = w;
        }
    }
}

TEST_CASE("filter_step drift sign and zero-gain case") {
    const auto p = default_params();
    const double gain = filter_gain(0.0, p);
    const double fixed = p.lambda * p.mu_bar / (p.lambda + gain);
    for (double mu : {fixed - 0.3, fixed + 0.3}) {
        FilterState st{0.0, mu, p.theta0};
        const auto nx = filter_step(st, 0.0, 1e-3, p);
        const double drift = -(p.lambda + gain) * mu + p.lambda * p.mu_bar;
        CHECK((nx.mu_hat - mu) * drift > 0.0);
        CHECK(nx.t == doctest::Approx(1e-3));
        CHECK(nx.omega_hat == doctest::Approx(omega_hat_closed(1e-3, p)));
    }

    auto q = p;
    q.sigma_mu = 0.0;
    q.theta0 = 0.0;
    q.rho = 0.0;
    CHECK(filter_gain(0.3, q) == 0.0);
    FilterState st{0.0, 0.4, 0.0};
    const double dt = 1e-3;
    for (int i = 0; i < 1000; ++i) st = filter_step(st, (i % 2 ? 1.0 : -1.0) * 0.05, dt, q);
    // pure mean reversion, no dependence on returns
    CHECK(st.mu_hat == doctest::Approx(q.mu_bar + (0.4 - q.mu_bar) * std::pow(1.0 - q.lambda * dt, 1000)));

    CHECK_THROWS_AS(filter_step(st, 0.0, 0.0, p), DomainError);
    CHECK_THROWS_AS(filter_step(st, 0.0, -1e-3, p), DomainError);
    CHECK_THROWS_AS(filter_step_innovation(st, 0.0, 0.0, p), DomainError);
}

TEST_CASE("innovation increment arithmetic") {
    auto p = default_params();
    FilterState st{0.0, 0.07, p.theta0};
    CHECK(innovation_increment(st, 0.07 * 0.01, 0.01, p) == 0.0);
    p.sigma_s = 1.0;
    st.mu_hat = 0.0;
    CHECK(innovation_increment(st, 0.02, 0.01, p) == doctest::Approx(0.02));
}

TEST_CASE("the two filter forms coincide") {
    const auto p = default_params();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    FilterState a = initial_filter_state(p), b = a;
    const double dt = 1e-3;
    for (int i = 0; i < 1000; ++i) {
        const double r = 0.05 * dt + p.sigma_s * std::sqrt(dt) * nd(rng);
        a = filter_step(a, r, dt, p);
        b = filter_step_innovation(b, r, dt, p);
    }
    CHECK(a.mu_hat == doctest::Approx(b.mu_hat).epsilon(1e-12));
}

TEST_CASE("Monte Carlo: filter error variance and innovation variance") {
    const auto p = default_params();
    const int n_paths = 10000;
    const int n_steps = 1000;
    const double dt = p.horizon / n_steps;
    const double sq = std::sqrt(dt);
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> nd;

    double sum_e2 = 0.0, sum_e4 = 0.0;
    double sum_dw = 0.0, sum_dw2 = 0.0, sum_dw4 = 0.0;
    for (int k = 0; k < n_paths; ++k) {
        double mu = p.eta0 + std::sqrt(p.theta0) * nd(rng);
        FilterState st = initial_filter_state(p);
        for (int i = 0; i < n_steps; ++i) {
            const double dw = sq * nd(rng);
            const double db = p.rho * dw + std::sqrt(1.0 - p.rho * p.rho) * sq * nd(rng);
            const double ret = mu * dt + p.sigma_s * dw;
            if (i == 0) {
                const double inn = innovation_increment(st, ret, dt, p);
                sum_dw += inn;
                sum_dw2 += inn * inn;
                sum_dw4 += inn * inn * inn * inn;
            }
            st = filter_step(st, ret, dt, p);
            mu += -p.lambda * (mu - p.mu_bar) * dt + p.sigma_mu * db;
        }
        const double e2 = (mu - st.mu_hat) * (mu - st.mu_hat);
        sum_e2 += e2;
        sum_e4 += e2 * e2;
    }
    const double mse = sum_e2 / n_paths;
    const double se = std::sqrt((sum_e4 / n_paths - mse * mse) / n_paths);
    CHECK(std::abs(mse - omega_hat_closed(p.horizon, p)) <= 3.0 * se);

    const double m1 = sum_dw / n_paths;
    const double var = sum_dw2 / n_paths - m1 * m1;
    const double var_se = std::sqrt((sum_dw4 / n_paths - var * var) / n_paths);
    CHECK(std::abs(var - dt) <= 3.0 * var_se);
    CHECK(std::abs(m1) <= 3.0 * std::sqrt(var / n_paths));
}
