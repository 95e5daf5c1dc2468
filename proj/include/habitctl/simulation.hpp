#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "habitctl/n_surface.hpp"
#include "habitctl/policy.hpp"

namespace habitctl {

struct SimConfig {
    std::size_t n_paths = 10000;
    int n_steps = 1000;
    std::uint64_t seed = 20240611;
    bool antithetic = false;
    unsigned threads = 1;
    bool keep_paths = false;
    int checkpoints = 5;  // equally spaced in (0, T], used for the value-process test

    void validate() const;
};

/// Standard normal draws for one path; everything else is derived from these
/// so that two step sizes can share the same Brownian path.
struct PathNoise {
    double h = 0.0;
    double mu0 = 0.0;          // N(0,1) for the initial drift
    std::vector<double> dB;    // drift-noise increments, variance h
    std::vector<double> ou;    // int_0^h e^{-lambda(h-u)} dB_u over each step
    std::vector<double> dWp;   // part of the price noise independent of B, variance h

    std::size_t steps() const noexcept { return dB.size(); }
    /// Merge consecutive pairs of steps exactly (step count must be even).
    PathNoise coarsen(double lambda) const;
    PathNoise negated() const;
};

PathNoise draw_noise(std::mt19937_64& rng, int n_steps, double h, double lambda);

/// Independent stream for path `index`.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);

/// Per-time-node quantities shared by every path, plus the tabulated N.
class SimEngine {
public:
    SimEngine(const Model& model, int n_steps);

    const Model& model() const noexcept { return *model_; }
    const NSurface& surface() const noexcept { return surface_; }
    int n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return dt_; }
    double time(std::size_t k) const noexcept { return t_[k]; }

    PolicyInputs inputs(std::size_t k, double eta) const;
    double m(std::size_t k) const noexcept { return m_[k]; }
    double omega(std::size_t k) const noexcept { return omega_[k]; }
    double delta(std::size_t k) const noexcept { return delta_[k]; }
    double alpha(std::size_t k) const noexcept { return alpha_[k]; }
    double value(std::size_t k, double x, double z, double eta) const;

private:
    const Model* model_;
    int n_steps_;
    double dt_;
    std::vector<double> t_, m_, dm_, g_, omega_, delta_, alpha_;
    NSurface surface_;
};

/// Feedback rule evaluated at node k of the simulation grid.
using FeedbackPolicy = std::function<PolicyPair(std::size_t k, const StateVector&)>;

struct PolicySpec {
    enum class Kind { Optimal, Subsistence, ScalePi, ScaleExcessConsumption, ShiftM, ZeroNEta, Blend };
    Kind kind = Kind::Optimal;
    double param = 0.0;

    /// "optimal", "subsistence", or "perturbation:<name>[=<value>]" with name one of
    /// scale_pi, scale_excess_c, shift_m, zero_n_eta, blend.
    static PolicySpec parse(const std::string& text);
    std::string label() const;
};

FeedbackPolicy make_policy(const PolicySpec& spec, const SimEngine& engine);

struct SimPath {
    Eigen::VectorXd t, S, mu, mu_hat, omega_hat, X, Z, c, pi;
    Eigen::VectorXd dw_hat;  // innovation increments, one per step
    double utility = 0.0;
};

struct Ensemble {
    std::vector<double> utility;          // one per path
    Eigen::MatrixXd checkpoint_value;     // paths x checkpoints: running utility + V
    std::vector<double> checkpoint_times;
    std::vector<SimPath> paths;           // only with keep_paths
    std::size_t clamp_events = 0;         // X pushed back up to m Z
    std::size_t hard_violations = 0;      // shortfall beyond 1e-10 x0
    std::size_t price_guard_events = 0;   // 1 + return <= 0
    double min_slack = std::numeric_limits<double>::infinity();  // min (X - m Z) and (c - Z)
    bool degenerate = false;              // some utility is -inf
};

/// One path driven by given noise. `record` fills the arrays of `out`.
void simulate_path(const PathNoise& noise, const FeedbackPolicy& policy, const SimEngine& engine,
                   SimPath& out, bool record, Ensemble* counters = nullptr,
                   double* checkpoint_row = nullptr, int checkpoints = 0);

Ensemble simulate_paths(const FeedbackPolicy& policy, const SimEngine& engine, const SimConfig& sim);

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
};

/// Mean and standard error; antithetic pairs are averaged first.
McEstimate mc_estimate(const std::vector<double>& samples, bool antithetic = false);
McEstimate mc_value(const FeedbackPolicy& policy, const SimEngine& engine, const SimConfig& sim);
McEstimate mc_value(const PolicySpec& spec, const ModelParams& params, const SimConfig& sim);

}  // namespace habitctl
