#pragma once

#include <vector>

#include "habitctl/params.hpp"

namespace habitctl {

/// m(t) = int_t^T exp(int_t^s (delta - alpha)) ds, the wealth needed per unit of
/// habit to keep consuming at the habit level until T.
///
/// K(t) = int_0^t (delta - alpha) is exact for piecewise-linear rates, so the
/// only quadrature is a cumulative Simpson rule for int e^K on panels aligned
/// with the rate knots.
class SubsistenceCost {
public:
    explicit SubsistenceCost(const ModelParams& params, int panels_per_horizon = 1024);

    double operator()(double t) const;

    /// delta(t) m(t), handy because (1 + delta m) shows up everywhere.
    double delta_m(double t) const;

    double horizon() const noexcept { return horizon_; }

private:
    double cum_k(double t) const { return delta_.integral(0.0, t) - alpha_.integral(0.0, t); }
    double tail_from(double t) const;  // int_t^T e^K

    TimeFunction delta_;
    TimeFunction alpha_;
    double horizon_;
    std::vector<double> nodes_;  // ascending, ends at T
    std::vector<double> tail_;   // int_{nodes_[i]}^T e^K
};

/// Convenience one-shot evaluation.
double m_of_t(double t, const ModelParams& params);

}  // namespace habitctl
