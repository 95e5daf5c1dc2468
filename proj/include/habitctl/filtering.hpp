#pragma once

#include "habitctl/params.hpp"

namespace habitctl {

struct FilterState {
    double t = 0.0;
    double mu_hat = 0.0;
    double omega_hat = 0.0;
};

/// Conditional variance of the drift given the price history, started at theta0.
double omega_hat_closed(double t, const ModelParams& params);

/// Fixed point of the variance Riccati equation.
double steady_state_theta(const ModelParams& params) noexcept;

/// Kalman gain (Omega + sigma_s sigma_mu rho) / sigma_s^2 at time t.
double filter_gain(double t, const ModelParams& params);

/// One Euler step of the conditional mean driven by the arithmetic return dS/S.
FilterState filter_step(const FilterState& state, double return_increment, double dt,
                        const ModelParams& params);

/// Same step written against the innovation increment. Algebraically identical.
FilterState filter_step_innovation(const FilterState& state, double return_increment, double dt,
                                   const ModelParams& params);

double innovation_increment(const FilterState& state, double return_increment, double dt,
                            const ModelParams& params) noexcept;

inline FilterState initial_filter_state(const ModelParams& params) {
    return {0.0, params.eta0, params.theta0};
}

}  // namespace habitctl
