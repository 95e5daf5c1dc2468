#pragma once

#include <functional>

#include <Eigen/Dense>

#include "habitctl/model.hpp"

namespace habitctl {

struct AuxQuintuple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double f = 0.0;
    double g = 0.0;
};

struct AbcTriple {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
};

/// Elementary functions of tau for the linearised Riccati equation u'' = D u:
///   C = cosh(sqrt(D) tau), S = sinh(sqrt(D) tau)/sqrt(D), E = (C - 1)/D,
///   J1 = (tau C - S)/D,   J2 = (2E - tau S)/D,
/// continued analytically through D = 0 (trig for D < 0).
struct RiccatiBasis {
    double C = 1.0;
    double S = 0.0;
    double E = 0.0;
    double J1 = 0.0;
    double J2 = 0.0;
};

RiccatiBasis riccati_basis(double disc, double tau) noexcept;

/// a, b, c, f, g at (t; s), 0 <= t <= s. Depends on s - t only.
AuxQuintuple aux_quintuple(double t, double s, const RegimeClassification& regime,
                           const ModelParams& params);

/// Map the auxiliary functions to the coefficients of exp(A eta^2 + B eta + C).
AbcTriple abc_from_aux(double t, double s, const AuxQuintuple& q, double omega,
                       const ModelParams& params);

AbcTriple abc(double t, double s, const Model& model);

struct NValue {
    double n = 1.0;
    double n_eta = 0.0;
    double n_etaeta = 0.0;
};

/// Everything N(t, .) needs at a fixed t: the Simpson nodes in s with their
/// (A, B, C) and weighted source term. Evaluating at many eta is then cheap.
class NSlice {
public:
    NSlice(double t, const Model& model);

    double t() const noexcept { return t_; }
    NValue operator()(double eta) const;

private:
    double t_;
    Eigen::ArrayXd A_, B_, C_, w_;  // w = Simpson weight * (1 + delta m)^{p/(p-1)}
    AbcTriple terminal_;
};

double n_function(double t, double eta, const Model& model);
double n_eta(double t, double eta, const Model& model);

/// Largest A(t; s) over a uniform (n+1)x(n+1) triangular grid of [0, T].
double sup_A_on_grid(const Model& model, int n = 20);

struct Mesh2D {
    Eigen::VectorXd t;
    Eigen::VectorXd eta;

    static Mesh2D uniform(double t0, double t1, int nt, double eta0, double eta1, int neta);
};

struct ResidualField {
    Eigen::MatrixXd values;  // rows follow t, columns follow eta
    double max_abs = 0.0;
    double rms = 0.0;
};

using NEvaluator = std::function<double(double t, double eta)>;

/// Finite-difference residual of the linear PDE satisfied by N. Derivatives
/// use step h in both t and eta around each mesh point (central in eta;
/// central in t, backward second-order on the t = T row).
ResidualField pde_residual_n(const Mesh2D& mesh, double h, const Model& model,
                             const NEvaluator& n_override = {});

}  // namespace habitctl
