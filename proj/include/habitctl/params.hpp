#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace habitctl {

/// Nonnegative deterministic rate on [0, T]: a constant, an affine function
/// a + b t, or a sampled grid with linear interpolation (constant extension
/// is not performed; the grid must cover the horizon).
class TimeFunction {
public:
    enum class Kind { Constant, Affine, Grid };

    TimeFunction() = default;

    static TimeFunction constant(double value);
    static TimeFunction affine(double intercept, double slope);
    static TimeFunction grid(std::vector<double> times, std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    double operator()(double t) const;

    /// Exact integral over [a, b] (the function is piecewise linear).
    double integral(double a, double b) const;

    /// Grid nodes strictly inside (a, b); empty for constant/affine.
    std::vector<double> knots_between(double a, double b) const;

    /// Minimum over [a, b]; attained at an endpoint or a knot.
    double min_on(double a, double b) const;

    bool covers(double a, double b) const;

    double intercept() const noexcept { return a_; }
    double slope() const noexcept { return b_; }
    const std::vector<double>& grid_times() const noexcept { return t_; }
    const std::vector<double>& grid_values() const noexcept { return v_; }

private:
    Kind kind_ = Kind::Constant;
    double a_ = 0.0;
    double b_ = 0.0;
    std::vector<double> t_;
    std::vector<double> v_;
};

struct ModelParams {
    double sigma_s = 0.2;
    double sigma_mu = 0.1;
    double lambda = 0.5;
    double mu_bar = 0.05;
    double rho = -0.3;
    double p = -1.0;
    double horizon = 1.0;
    double eta0 = 0.05;
    double theta0 = 0.05;
    double x0 = 2.0;
    double z0 = 1.0;
    TimeFunction delta_fn = TimeFunction::constant(0.1);
    TimeFunction alpha_fn = TimeFunction::constant(0.3);

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

/// The tuple used throughout the verification harness (p = -1).
ModelParams default_params();

enum class Regime { Normal, Hyperbolic, Polynomial, Tangent };

std::string_view to_string(Regime regime) noexcept;

/// Which family of elementary functions solves the constant-coefficient
/// auxiliary Riccati equation, plus the constants that parametrise it.
struct RegimeClassification {
    Regime regime = Regime::Normal;
    double delta_disc = 0.0;  ///< gamma2^2 - gamma1 * gamma3
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double xi = 0.0;     ///< sqrt(delta_disc) in the Normal regime, 0 otherwise
    double xi1 = 0.0;    ///< rate of the f-equation, all regimes
    double zeta = 0.0;   ///< sqrt(-delta_disc) in the Tangent regime, 0 otherwise
    double varpi = 0.0;  ///< atan(gamma2 / zeta) in the Tangent regime
    std::optional<double> critical_horizon;

    /// Discriminant actually used by the closed forms (0 in the degenerate regimes).
    double effective_disc() const noexcept;

    bool operator==(const RegimeClassification&) const = default;
};

/// |delta_disc| at or below this is treated as zero.
double disc_zero_tolerance(const ModelParams& params) noexcept;

RegimeClassification classify_regime(const ModelParams& params);

/// Throws ExplosionError if the horizon reaches the critical horizon.
void require_finite_horizon(const RegimeClassification& regime, const ModelParams& params);

}  // namespace habitctl
