#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "habitctl/closed_form.hpp"

// Independent numerical reference solutions used to check the closed forms.
// Only the filter variance is shared with the closed-form side.
namespace habitctl::oracle {

/// RK4 integration of the variance Riccati equation from Omega(0) = theta0,
/// reported at each (nondecreasing) time in `times`.
std::vector<double> rk4_omega(const std::vector<double>& times, const ModelParams& params,
                              double step = 1e-5);

/// RK4 of the constant-coefficient auxiliary system, integrated backward from
/// its zero terminal value; reported at each time-to-go in `taus` (nondecreasing).
std::vector<AuxQuintuple> rk4_aux(const std::vector<double>& taus, const ModelParams& params,
                                  double step = 1e-5);

/// RK4 of the time-dependent (A, B, C) system backward from A = B = C = 0 at s,
/// with the filter variance taken from its closed form at every substep.
/// Reported at each t in `times` (nonincreasing, all <= s).
std::vector<AbcTriple> rk4_abc(double s, const std::vector<double>& times,
                               const ModelParams& params, double step = 1e-5);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 50);

/// m(t) by nested adaptive quadrature of both integrals.
double m_adaptive(double t, const ModelParams& params, double tol = 1e-13);

/// Crank-Nicolson solve of the linear PDE for N on [-half_width, half_width]
/// from N(T, .) = 1 back to t_target; linear interpolation to eta_query.
Eigen::VectorXd crank_nicolson_n(const ModelParams& params, double t_target,
                                 const Eigen::VectorXd& eta_query, int n_eta = 801,
                                 int n_t = 1000, double half_width = 3.0);

}  // namespace habitctl::oracle
