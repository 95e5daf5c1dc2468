#pragma once

#include <vector>

#include <Eigen/Dense>

#include "habitctl/closed_form.hpp"

namespace habitctl {

/// N and its eta-derivatives tabulated on fixed time nodes and a uniform eta
/// grid, read back by quintic Hermite interpolation. Off-grid times and eta
/// outside the table fall back to direct evaluation.
class NSurface {
public:
    NSurface(const Model& model, std::vector<double> times, double eta_lo, double eta_hi,
             double spacing = 0.04);

    /// Nodes k T / n_steps, eta range wide enough for filtered paths.
    static NSurface for_simulation(const Model& model, int n_steps, double spacing = 0.04);

    NValue at(std::size_t k, double eta) const;
    NValue operator()(double t, double eta) const;

    const std::vector<double>& times() const noexcept { return times_; }
    double eta_lo() const noexcept { return lo_; }
    double eta_hi() const noexcept { return hi_; }

private:
    const Model* model_;
    std::vector<double> times_;
    std::vector<NSlice> slices_;
    double lo_;
    double hi_;
    double h_;
    int n_;  // intervals
    Eigen::MatrixXd val_, d1_, d2_;  // rows follow time nodes
};

}  // namespace habitctl
