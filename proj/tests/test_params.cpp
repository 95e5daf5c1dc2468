#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "habitctl/admissibility.hpp"
#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"
#include "habitctl/subsistence.hpp"
#include "helpers.hpp"

using namespace habitctl;
using namespace testing_tuples;

TEST_CASE("time functions: constant, affine, grid") {
    const auto c = TimeFunction::constant(0.3);
    CHECK(c(0.7) == 0.3);
    CHECK(c.integral(0.2, 1.2) == doctest::Approx(0.3));

    const auto a = TimeFunction::affine(0.1, 0.2);
    CHECK(a(0.5) == doctest::Approx(0.2));
    CHECK(a.integral(0.0, 1.0) == doctest::Approx(0.2));

    const auto g = TimeFunction::grid({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
    CHECK(g(0.25) == doctest::Approx(0.5));
    CHECK(g.integral(0.0, 1.0) == doctest::Approx(0.5));
    CHECK(g.integral(0.25, 0.75) == doctest::Approx(0.375));
    CHECK(g.knots_between(0.0, 1.0).size() == 1);
    CHECK(g.min_on(0.2, 0.8) == doctest::Approx(0.4));
    CHECK_FALSE(g.covers(0.0, 1.5));

    CHECK_THROWS_AS(TimeFunction::grid({0.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(TimeFunction::grid({0.0, 0.0}, {1.0, 1.0}), ConfigError);
}

TEST_CASE("parameter validation names the violated invariant") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = [](auto mutate) {
        ModelParams q;
        mutate(q);
        return q;
    };
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.sigma_s = 0.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.p = 0.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.p = 1.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.rho = 1.2; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.theta0 = -1e-3; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.horizon = 0.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.delta_fn = TimeFunction::affine(0.1, -1.0); }).validate(),
                    ConfigError);
    CHECK_THROWS_AS(
        bad([](ModelParams& q) { q.alpha_fn = TimeFunction::grid({0.0, 0.5}, {0.1, 0.1}); }).validate(),
        ConfigError);
    try {
        bad([](ModelParams& q) { q.rho = 2.0; }).validate();
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("rho") != std::string::npos);
    }
}

TEST_CASE("p < 0 with uncorrelated noise is Normal and bounded") {
    ModelParams p;
    p.rho = 0.0;
    const auto rc = classify_regime(p);
    CHECK(rc.regime == Regime::Normal);
    CHECK(rc.gamma3 < 0.0);
    CHECK(rc.gamma1 > 0.0);
    CHECK_FALSE(rc.critical_horizon.has_value());
    CHECK(rc.xi == doctest::Approx(std::sqrt(rc.delta_disc)));
}

TEST_CASE("discriminant is gamma2^2 - gamma1 gamma3") {
    for (double rho : {-0.9, -0.3, 0.0, 0.4}) {
        for (double p : {-3.0, -0.5, 0.4, 0.8}) {
            ModelParams q;
            q.rho = rho;
            q.p = p;
            const auto rc = classify_regime(q);
            const double lam = q.lambda, sS = q.sigma_s, sM = q.sigma_mu;
            const double expanded = lam * lam - 2.0 * lam * p * rho * sM / ((1.0 - p) * sS) -
                                    p * sM * sM / ((1.0 - p) * sS * sS);
            CHECK(rc.delta_disc == doctest::Approx(expanded).epsilon(1e-12));
        }
    }
}

TEST_CASE("gamma1 > 0 for every p < 0") {
    for (double p : {-0.01, -1.0, -5.0, -50.0}) {
        for (double rho : {-1.0, -0.5, 0.0, 0.7, 1.0}) {
            ModelParams q;
            q.p = p;
            q.rho = rho;
            CHECK(classify_regime(q).gamma1 > 0.0);
        }
    }
}

TEST_CASE("root-found lambda gives the Hyperbolic regime, always bounded") {
    const ModelParams p = hyperbolic_tuple();
    const auto rc = classify_regime(p);
    CHECK(std::abs(rc.delta_disc) <= disc_zero_tolerance(p));
    CHECK(rc.regime == Regime::Hyperbolic);
    CHECK(rc.gamma2 < 0.0);
    CHECK_FALSE(rc.critical_horizon.has_value());
}

TEST_CASE("Delta = 0 and gamma2 = 0 gives the Polynomial regime") {
    // sigma_mu = 0 makes gamma1 = 0, then gamma2 = -lambda; bisect lambda on gamma2
    ModelParams p = polynomial_tuple();
    p.lambda = bisect(
        [&](double lam) {
            ModelParams q = p;
            q.lambda = lam;
            return classify_regime(q).gamma2 + 1e-300;
        },
        -1.0, 1.0);
    p.lambda = std::max(p.lambda, 0.0);
    const auto rc = classify_regime(p);
    CHECK(rc.regime == Regime::Polynomial);
    CHECK_FALSE(rc.critical_horizon.has_value());
}

TEST_CASE("Tangent regime: critical horizon equals the blow-up time of a") {
    // grid search on sigma_mu for a negative discriminant at p = 0.9
    ModelParams p;
    p.p = 0.9;
    p.rho = 0.0;
    p.lambda = 0.5;
    double found = -1.0;
    for (double sm = 0.01; sm < 1.0; sm += 0.01) {
        p.sigma_mu = sm;
        if (classify_regime(p).delta_disc < 0.0) {
            found = sm;
            break;
        }
    }
    REQUIRE(found > 0.0);
    p.sigma_mu = 0.1;
    const auto rc = classify_regime(p);
    REQUIRE(rc.regime == Regime::Tangent);
    REQUIRE(rc.critical_horizon.has_value());
    CHECK(*rc.critical_horizon ==
          doctest::Approx(std::numbers::pi / (2.0 * rc.zeta) - std::atan(rc.gamma2 / rc.zeta) / rc.zeta));

    // integrate a backward until it leaves any reasonable range
    double tau = 0.0, a = 0.0;
    const double h = 1e-5;
    auto rhs = [&](double x) { return -(-2.0 * rc.gamma1 * x * x - 2.0 * rc.gamma2 * x - 0.5 * rc.gamma3); };
    while (std::abs(a) < 1e6 && tau < 10.0) {
        const double k1 = rhs(a), k2 = rhs(a + 0.5 * h * k1), k3 = rhs(a + 0.5 * h * k2), k4 = rhs(a + h * k3);
        a += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        tau += h;
    }
    CHECK(tau == doctest::Approx(*rc.critical_horizon).epsilon(1e-4));

    p.horizon = *rc.critical_horizon + 0.01;
    CHECK_THROWS_AS(require_finite_horizon(classify_regime(p), p), ExplosionError);
}

TEST_CASE("with lambda >= 0 the Normal regime never explodes") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int normal = 0;
    for (int i = 0; i < 2000; ++i) {
        ModelParams q;
        q.p = u(rng) < 0.5 ? -5.0 * u(rng) - 0.01 : 0.98 * u(rng) + 0.01;
        q.rho = 2.0 * u(rng) - 1.0;
        q.sigma_s = 0.05 + u(rng);
        q.sigma_mu = u(rng);
        q.lambda = 2.0 * u(rng);
        const auto rc = classify_regime(q);
        if (q.p > 0.0 && rc.gamma2 > 0.0) CHECK(rc.delta_disc < 0.0);
        if (rc.regime == Regime::Normal) {
            ++normal;
            CHECK(rc.gamma2 < rc.xi);
            CHECK_FALSE(rc.critical_horizon.has_value());
        }
    }
    CHECK(normal > 100);
}

TEST_CASE("classification is deterministic") {
    const ModelParams p = tangent_tuple();
    CHECK(classify_regime(p) == classify_regime(p));
}

TEST_CASE("admissibility for p < 0 needs only the budget and boundedness") {
    ModelParams p;
    const auto rep = check_admissibility(p);
    CHECK(rep.admissible());
    CHECK(rep.m0 == doctest::Approx((1.0 - std::exp(-0.2)) / 0.2));
    CHECK(rep.find("risk_aversion_bound") == nullptr);
    CHECK(rep.find("tail_growth_bound") == nullptr);
}

TEST_CASE("budget exactly at m(0) z0: nonempty but not strict") {
    ModelParams p;
    p.x0 = SubsistenceCost(p)(0.0) * p.z0;
    const auto rep = check_admissibility(p);
    CHECK(rep.find("budget_nonempty")->passed);
    CHECK_FALSE(rep.find("budget_strict")->passed);
    CHECK_FALSE(rep.admissible());
    REQUIRE(rep.violations().size() == 1);
    CHECK(rep.violations()[0] == "budget_strict");
}

TEST_CASE("x0 below the subsistence cost fails both budget checks") {
    ModelParams p;
    p.x0 = 0.5;
    const auto rep = check_admissibility(p);
    CHECK_FALSE(rep.find("budget_nonempty")->passed);
    CHECK_FALSE(rep.find("budget_strict")->passed);
}

TEST_CASE("0 < p < 1 violating the risk-aversion bound is rejected by name") {
    ModelParams p;
    p.p = 0.9;
    p.lambda = 0.05;
    p.rho = 0.0;
    p.sigma_mu = 0.02;
    p.theta0 = 0.001;
    const double s = p.sigma_s;
    const double theta = std::max(p.theta0, steady_state_theta(p));
    const double lhs = p.p * (1 + p.p) / ((1 - p.p) * (1 - p.p));
    const double rhs = p.lambda * p.lambda * std::pow(s, 4) / (4 * std::pow(theta + s * p.sigma_mu * p.rho, 2));
    REQUIRE(lhs >= rhs);
    const auto rep = check_admissibility(p);
    REQUIRE(rep.find("risk_aversion_bound") != nullptr);
    CHECK_FALSE(rep.find("risk_aversion_bound")->passed);
    CHECK_FALSE(rep.admissible());
}

TEST_CASE("0 < p < 1 tuple satisfying every condition") {
    ModelParams p;
    p.p = 0.05;
    p.lambda = 2.0;
    p.sigma_mu = 0.02;
    p.rho = 0.0;
    p.theta0 = 0.0005;
    const auto rep = check_admissibility(p);
    for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
    CHECK(rep.k1_bar > 0.0);
}

TEST_CASE("explosive horizon fails the explosion check") {
    ModelParams p;
    p.p = 0.9;
    p.rho = 0.0;
    p.sigma_mu = 0.1;
    p.horizon = 2.0;
    const auto rep = check_admissibility(p);
    CHECK_FALSE(rep.find("horizon_below_explosion")->passed);
}
