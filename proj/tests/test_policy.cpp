#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"
#include "habitctl/oracle.hpp"
#include "habitctl/policy.hpp"
#include "helpers.hpp"

using namespace habitctl;
using namespace testing_tuples;

namespace {

template <class F>
double d1(F f, double h) {
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

template <class F>
double d2(F f, double h) {
    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

}  // namespace

TEST_CASE("value function: terminal value, homogeneity, boundary") {
    const Model model(default_params());
    const double T = model.params.horizon;
    const double p = model.params.p;
    for (double x : {0.5, 2.0, 7.0}) CHECK(value_v({T, x, 1.3, 0.2}, model) == doctest::Approx(std::pow(x, p) / p).epsilon(1e-15));

    for (const StateVector s : {StateVector{0.0, 2.0, 1.0, 0.05}, StateVector{0.6, 1.1, 0.4, -0.3}}) {
        const StateVector k{s.t, 2.5 * s.x, 2.5 * s.z, s.eta};
        CHECK(value_v(k, model) == doctest::Approx(std::pow(2.5, p) * value_v(s, model)).epsilon(1e-13));
    }

    const double m0 = model.m(0.0);
    const StateVector edge{0.0, m0 * 1.2, 1.2, 0.1};
    CHECK(value_v(edge, model) == -std::numeric_limits<double>::infinity());
    CHECK(policy_pi(edge, model) == 0.0);
    CHECK(policy_c(edge, model) == doctest::Approx(1.2));
    CHECK_THROWS_AS(value_v({0.0, m0 * 1.2 - 1e-6, 1.2, 0.1}, model), DomainError);
    CHECK_THROWS_AS(policy_pi({0.0, m0 * 1.2 - 1e-6, 1.2, 0.1}, model), DomainError);
    CHECK_THROWS_AS(policy_c({0.0, m0 * 1.2 - 1e-6, 1.2, 0.1}, model), DomainError);

    auto q = default_params();
    q.p = 0.05;
    q.lambda = 2.0;
    q.sigma_mu = 0.02;
    q.rho = 0.0;
    q.theta0 = 0.0005;
    const Model pos(q);
    CHECK(value_v({0.0, pos.m(0.0), 1.0, 0.0}, pos) == 0.0);

    // at T the reserve is zero and N = 1, so all wealth above nothing is excess
    CHECK(policy_c({T, 3.0, 1.0, 0.0}, model) - 1.0 == doctest::Approx(3.0));
}

TEST_CASE("Merton-style investment when the filter gain vanishes") {
    auto p = default_params();
    p.sigma_mu = 0.0;
    p.theta0 = 0.0;
    const Model model(p);
    for (double eta : {-0.2, 0.1, 0.4}) {
        const StateVector s{0.3, 2.0, 0.8, eta};
        const double excess = s.x - model.m(s.t) * s.z;
        CHECK(policy_pi(s, model) ==
              doctest::Approx(eta * excess / ((1 - p.p) * p.sigma_s * p.sigma_s)).epsilon(1e-14));
    }
}

TEST_CASE("feedback controls satisfy the first-order conditions") {
    const Model model(default_params());
    const auto& pr = model.params;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double h = 1e-3;
    double worst_pi = 0.0, worst_c = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = 0.95 * U(rng);
        const double z = 0.5 + U(rng);
        const double x = model.m(t) * z + 0.3 + 1.5 * U(rng);
        const double eta = -0.5 + U(rng);
        auto V = [&](double xx, double zz, double ee) { return value_v({t, xx, zz, ee}, model); };

        const double vx = d1([&](double e) { return V(x + e, z, eta); }, h);
        const double vz = d1([&](double e) { return V(x, z + e, eta); }, h);
        const double vxx = d2([&](double e) { return V(x + e, z, eta); }, h);
        const double vxe = d1([&](double e) { return d1([&](double f) { return V(x + f, z, eta + e); }, h); }, h);

        const double g = omega_hat_closed(t, pr) + pr.sigma_s * pr.sigma_mu * pr.rho;
        const double pi_ref = -(eta * vx + g * vxe) / (pr.sigma_s * pr.sigma_s * vxx);
        const double c_ref = z + std::pow(vx - pr.delta_fn(t) * vz, 1.0 / (pr.p - 1.0));
        const StateVector s{t, x, z, eta};
        worst_pi = std::max(worst_pi, rel_err(policy_pi(s, model), pi_ref));
        worst_c = std::max(worst_c, rel_err(policy_c(s, model), c_ref));
        CHECK(policy_c(s, model) > z);
    }
    CHECK(worst_pi <= 1e-8);
    CHECK(worst_c <= 1e-7);
}

TEST_CASE("policies are homogeneous of degree one in (x, z)") {
    const Model model(default_params());
    for (const StateVector s : {StateVector{0.0, 2.0, 1.0, 0.05}, StateVector{0.7, 0.9, 0.3, -0.4}}) {
        for (double k : {0.5, 2.0, 10.0}) {
            const StateVector ks{s.t, k * s.x, k * s.z, s.eta};
            CHECK(policy_pi(ks, model) == doctest::Approx(k * policy_pi(s, model)).epsilon(1e-13));
            CHECK(policy_c(ks, model) - ks.z == doctest::Approx(k * (policy_c(s, model) - s.z)).epsilon(1e-13));
        }
    }
}

TEST_CASE("ratio form of the controls agrees with the direct form") {
    const Model model(default_params());
    for (const StateVector s : {StateVector{0.0, 2.0, 1.0, 0.05}, StateVector{0.5, 3.0, 2.0, 0.3},
                                StateVector{0.9, 0.5, 0.1, -0.6}}) {
        const auto in = policy_inputs(s.t, s.eta, model);
        const auto direct = optimal_policy(s, model.params, in);
        const auto ratio = policy_ratios(s, model.params, in);
        CHECK(ratio.pi == doctest::Approx(direct.pi / s.x).epsilon(1e-14));
        CHECK(ratio.c == doctest::Approx(direct.c / s.x).epsilon(1e-14));
        CHECK(direct.pi == doctest::Approx(policy_pi(s, model)).epsilon(1e-15));
    }
}

TEST_CASE("HJB residual converges at second order and rejects 1.01 V") {
    const Model model(default_params());
    const double m0 = model.m(0.0);
    const HjbGrid grid{{0.0, 0.5, 1.0}, {m0 + 0.5, m0 + 1.5}, {0.6, 1.0}, {-0.2, 0.05, 0.3}};
    const auto r1 = hjb_residual(grid, 0.0025, model);
    const auto r2 = hjb_residual(grid, 0.00125, model);
    CHECK(r2.max_abs < 1e-3);
    const double ratio = r1.max_abs / r2.max_abs;
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
    CHECK(r2.values.size() == 3 * 2 * 2 * 3);

    const auto ctrl = hjb_residual(grid, 0.00125, model, [&](const StateVector& s) { return 1.01 * value_v(s, model); });
    CHECK(ctrl.max_abs > 1e-2);
}

TEST_CASE("explicit wealth at t = 0 and in a deterministic market") {
    auto p = default_params();
    p.sigma_mu = 0.0;
    p.theta0 = 0.0;
    p.eta0 = 0.0;
    p.mu_bar = 0.0;
    p.delta_fn = TimeFunction::affine(0.2, -0.1);
    const Model model(p);

    // Reference: the feedback controls with pi = 0 reduce to an ODE in (X, Z).
    auto rhs = [&](double t, double x, double z) {
        const double c = policy_c({t, x, z, 0.0}, model);
        return std::pair{-c, p.delta_fn(t) * c - p.alpha_fn(t) * z};
    };
    const int n = 50;
    const int sub = 100;
    const double dt = p.horizon / n;
    FilteredPath path;
    path.t.resize(n + 1);
    path.mu_hat = Eigen::VectorXd::Zero(n + 1);
    path.dw_hat = Eigen::VectorXd::Constant(n, 0.37);
    path.z.resize(n + 1);
    Eigen::VectorXd x_ref(n + 1);
    double x = p.x0, z = p.z0;
    for (int k = 0; k <= n; ++k) {
        path.t[k] = k * dt;
        path.z[k] = z;
        x_ref[k] = x;
        if (k == n) break;
        const double hh = dt / sub;
        for (int j = 0; j < sub; ++j) {
            const double t = k * dt + j * hh;
            const auto [k1x, k1z] = rhs(t, x, z);
            const auto [k2x, k2z] = rhs(t + hh / 2, x + hh / 2 * k1x, z + hh / 2 * k1z);
            const auto [k3x, k3z] = rhs(t + hh / 2, x + hh / 2 * k2x, z + hh / 2 * k2z);
            const auto [k4x, k4z] = rhs(t + hh, x + hh * k3x, z + hh * k3z);
            x += hh / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
            z += hh / 6 * (k1z + 2 * k2z + 2 * k3z + k4z);
        }
    }
    const auto xs = wealth_explicit(path, model);
    CHECK(xs[0] == doctest::Approx(p.x0).epsilon(1e-15));
    for (int k = 0; k <= n; ++k) CHECK(rel_err(xs[k], x_ref[k]) < 1e-8);
    CHECK(xs[n] > model.m(p.horizon) * path.z[n]);
}
