#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "habitctl/simulation.hpp"

namespace habitctl {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    bool operator==(const CheckResult&) const = default;
};

struct PolicyComparison {
    std::string policy;
    double mean = 0.0;
    double se = 0.0;
    double gap = 0.0;     // optimal minus perturbed, paired by path
    double gap_se = 0.0;
    bool passed = false;  // gap > 2 gap_se
    bool operator==(const PolicyComparison&) const = default;
};

/// Y_t = int_0^t (c - Z)^p / p ds + V(t, X_t, Z_t, mu_hat_t), compared with V(0, ...).
struct CheckpointSeries {
    std::string policy;
    std::vector<double> times;
    std::vector<double> mean;       // mean of Y_t - V0
    std::vector<double> se;
    std::vector<double> step_mean;  // mean of Y_{t_j} - Y_{t_{j-1}}
    std::vector<double> step_se;
    bool flat = false;              // every |mean| < 2 se
    bool nonincreasing = false;     // every step_mean < 2 step_se
    bool significant_drop = false;  // some mean < -2 se
    bool operator==(const CheckpointSeries&) const = default;
};

struct ConvergenceStudy {
    std::string name;
    std::vector<double> h;
    std::vector<double> max_abs;
    double ratio = 0.0;             // last refinement
    double negative_control = 0.0;  // max residual of the perturbed solution at the finest h
    bool passed = false;
    bool operator==(const ConvergenceStudy&) const = default;
};

struct VerificationReport {
    std::size_t n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    double v0 = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double z_score = 0.0;
    std::vector<PolicyComparison> perturbations;
    std::size_t clamp_events = 0;
    std::size_t hard_violations = 0;
    std::size_t price_guard_events = 0;
    double min_slack = 0.0;
    std::vector<CheckpointSeries> checkpoints;
    std::vector<ConvergenceStudy> residuals;
    std::vector<CheckResult> checks;

    bool passed() const noexcept;
    bool operator==(const VerificationReport&) const = default;
};

struct VerifyOptions {
    SimConfig sim;
    std::vector<PolicySpec> perturbations = default_perturbations();
    bool residuals = true;
    bool quick = false;

    static std::vector<PolicySpec> default_perturbations();
};

CheckpointSeries checkpoint_series(const std::string& label, const Ensemble& ens, double v0);

/// Refinement study of the N-equation residual: steps h, h/2, ... on a fixed mesh.
ConvergenceStudy n_residual_study(const Model& model, const std::vector<double>& hs, bool quick);
/// Same for the maximised HJB residual of V, with V * 1.01 as the negative control.
ConvergenceStudy hjb_residual_study(const Model& model, const std::vector<double>& hs, bool quick);

/// Default refinement ladders.
std::vector<double> default_n_steps_h();
std::vector<double> default_hjb_steps_h();

VerificationReport verification_suite(const Model& model, const VerifyOptions& options);

}  // namespace habitctl
