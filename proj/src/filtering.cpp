#include "habitctl/filtering.hpp"

#include <algorithm>
#include <cmath>

#include "habitctl/errors.hpp"

namespace habitctl {

namespace {

struct RiccatiConstants {
    double r;     // sigma_s * sqrt(k)
    double beta;  // lambda sigma_s^2 + sigma_s sigma_mu rho
    double s2;
};

RiccatiConstants riccati_constants(const ModelParams& p) {
    const double s = p.sigma_s;
    const double k = p.lambda * p.lambda * s * s + 2.0 * s * p.sigma_mu * p.lambda * p.rho +
                     p.sigma_mu * p.sigma_mu;
    return {s * std::sqrt(std::max(k, 0.0)), p.lambda * s * s + s * p.sigma_mu * p.rho, s * s};
}

}  // namespace

double omega_hat_closed(double t, const ModelParams& params) {
    if (t < 0.0) throw DomainError("omega_hat_closed: t must be >= 0");
    const auto [r, beta, s2] = riccati_constants(params);
    const double y0 = params.theta0 + beta;
    // tanh(r t / s2) / r, with its r -> 0 limit t / s2
    const double x = r * t / s2;
    const double tr = (x < 1e-8) ? t / s2 * (1.0 - x * x / 3.0) : std::tanh(x) / r;
    const double den = 1.0 + y0 * tr;
    if (!(den > 0.0)) throw NumericError("omega_hat_closed: denominator vanished");
    // deviation form: theta* exactly when theta0 = theta*, and the factor lies
    // in [0, 1] since r >= |beta|, so the clamp only strips rounding
    const double theta_star = r - beta;
    const double w = theta_star + (params.theta0 - theta_star) * (1.0 - r * tr) / den;
    return std::clamp(w, std::min(params.theta0, theta_star), std::max(params.theta0, theta_star));
}

double steady_state_theta(const ModelParams& params) noexcept {
    const auto [r, beta, s2] = riccati_constants(params);
    (void)s2;
    return r - beta;
}

double filter_gain(double t, const ModelParams& params) {
    const double s = params.sigma_s;
    return (omega_hat_closed(t, params) + s * params.sigma_mu * params.rho) / (s * s);
}

FilterState filter_step(const FilterState& state, double return_increment, double dt,
                        const ModelParams& params) {
    if (!(dt > 0.0)) throw DomainError("filter_step: dt must be > 0");
    const double s = params.sigma_s;
    const double gain = (state.omega_hat + s * params.sigma_mu * params.rho) / (s * s);
    FilterState next;
    next.t = state.t + dt;
    next.mu_hat = state.mu_hat +
                  (-(params.lambda + gain) * state.mu_hat + params.lambda * params.mu_bar) * dt +
                  gain * return_increment;
    next.omega_hat = omega_hat_closed(next.t, params);
    return next;
}

FilterState filter_step_innovation(const FilterState& state, double return_increment, double dt,
                                   const ModelParams& params) {
    if (!(dt > 0.0)) throw DomainError("filter_step_innovation: dt must be > 0");
    const double s = params.sigma_s;
    const double dw = innovation_increment(state, return_increment, dt, params);
    FilterState next;
    next.t = state.t + dt;
    next.mu_hat = state.mu_hat - params.lambda * (state.mu_hat - params.mu_bar) * dt +
                  (state.omega_hat + s * params.sigma_mu * params.rho) / s * dw;
    next.omega_hat = omega_hat_closed(next.t, params);
    return next;
}

double innovation_increment(const FilterState& state, double return_increment, double dt,
                            const ModelParams& params) noexcept {
    return (return_increment - state.mu_hat * dt) / params.sigma_s;
}

}  // namespace habitctl
