#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "habitctl/closed_form.hpp"

namespace habitctl {

struct StateVector {
    double t = 0.0;
    double x = 0.0;
    double z = 0.0;
    double eta = 0.0;
};

struct PolicyPair {
    double pi = 0.0;
    double c = 0.0;
};

/// Everything the feedback formulas need at one state besides (x, z, eta):
/// m(t), delta(t) m(t), the filter gain numerator and N with its eta-derivatives.
struct PolicyInputs {
    double m = 0.0;
    double delta_m = 0.0;
    double g = 0.0;  // Omega(t) + sigma_s sigma_mu rho
    NValue n;
};

PolicyInputs policy_inputs(double t, double eta, const Model& model);

/// V = N^{1-p} (x - m z)^p / p. At the boundary x = m z this is 0 for p > 0
/// and -infinity for p < 0.
double value_v(const StateVector& s, const Model& model);
double value_from(const StateVector& s, const ModelParams& params, const PolicyInputs& in);

double policy_pi(const StateVector& s, const Model& model);
double policy_c(const StateVector& s, const Model& model);

/// Both feedback controls from precomputed inputs; throws DomainError below the boundary.
PolicyPair optimal_policy(const StateVector& s, const ModelParams& params, const PolicyInputs& in);

/// pi/x and c/x written in terms of the habit-to-wealth ratio z/x.
PolicyPair policy_ratios(const StateVector& s, const ModelParams& params, const PolicyInputs& in);

/// Inputs to the explicit optimal wealth formula along one filtered path.
struct FilteredPath {
    Eigen::VectorXd t;       // n + 1 nodes
    Eigen::VectorXd mu_hat;  // n + 1
    Eigen::VectorXd dw_hat;  // n innovation increments
    Eigen::VectorXd z;       // n + 1 habit values
};

using NLookup = std::function<NValue(std::size_t k, double t, double eta)>;

/// X*_t = (x0 - m(0) z0) N(t, mu_hat_t)/N(0, eta0)
///        * exp(sum mu_hat^2 dt / (2(1-p) s^2) + sum mu_hat dW / ((1-p) s)) + m(t) Z_t,
/// with left-point sums on the path's grid.
Eigen::VectorXd wealth_explicit(const FilteredPath& path, const Model& model,
                                const NLookup& lookup = {});

/// Increments of log Gamma, Gamma = N(t, mu_hat) / (X - m Z), implied by the
/// explicit exponential form on a path grid.
Eigen::VectorXd log_gamma_increments(const FilteredPath& path, const ModelParams& params);

using VEvaluator = std::function<double(const StateVector&)>;

struct HjbGrid {
    std::vector<double> t, x, z, eta;
};

struct HjbResidual {
    std::vector<double> values;  // flattened t-major
    double max_abs = 0.0;
    double rms = 0.0;
};

/// Maximised HJB evaluated on V by finite differences with step h in every
/// variable (one-sided in t at the ends of [0, T]).
HjbResidual hjb_residual(const HjbGrid& grid, double h, const Model& model,
                         const VEvaluator& v_override = {});

}  // namespace habitctl
