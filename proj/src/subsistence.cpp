#include "habitctl/subsistence.hpp"

#include <algorithm>
#include <cmath>

#include "habitctl/errors.hpp"

namespace habitctl {

SubsistenceCost::SubsistenceCost(const ModelParams& params, int panels_per_horizon)
    : delta_(params.delta_fn), alpha_(params.alpha_fn), horizon_(params.horizon) {
    if (panels_per_horizon < 1) throw ConfigError("SubsistenceCost: need at least one panel");
    if (!delta_.covers(0.0, horizon_) || !alpha_.covers(0.0, horizon_)) {
        throw ConfigError("SubsistenceCost: rate grids must cover [0, horizon]");
    }

    // breakpoints: 0, rate knots, T; then subdivide each piece to h <= T / panels
    std::vector<double> brk{0.0};
    for (double k : delta_.knots_between(0.0, horizon_)) brk.push_back(k);
    for (double k : alpha_.knots_between(0.0, horizon_)) brk.push_back(k);
    brk.push_back(horizon_);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    const double hmax = horizon_ / panels_per_horizon;
    nodes_.push_back(0.0);
    for (std::size_t i = 1; i < brk.size(); ++i) {
        const double a = brk[i - 1];
        const double b = brk[i];
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / hmax - 1e-9)));
        for (int j = 1; j < n; ++j) nodes_.push_back(a + (b - a) * j / n);
        nodes_.push_back(b);
    }

    tail_.assign(nodes_.size(), 0.0);
    for (std::size_t i = nodes_.size() - 1; i-- > 0;) {
        const double a = nodes_[i];
        const double b = nodes_[i + 1];
        const double mid = 0.5 * (a + b);
        const double panel = (b - a) / 6.0 *
                             (std::exp(cum_k(a)) + 4.0 * std::exp(cum_k(mid)) + std::exp(cum_k(b)));
        tail_[i] = tail_[i + 1] + panel;
    }
    for (double v : tail_) {
        if (!std::isfinite(v)) throw ConfigError("SubsistenceCost: m(t) is not finite");
    }
}

double SubsistenceCost::tail_from(double t) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    const double b = nodes_[j];
    if (b == t) return tail_[j];
    const double mid = 0.5 * (t + b);
    return tail_[j] +
           (b - t) / 6.0 * (std::exp(cum_k(t)) + 4.0 * std::exp(cum_k(mid)) + std::exp(cum_k(b)));
}

double SubsistenceCost::operator()(double t) const {
    if (t < 0.0 || t > horizon_) throw DomainError("m(t): t outside [0, horizon]");
    if (t == horizon_) return 0.0;
    return tail_from(t) * std::exp(-cum_k(t));
}

double SubsistenceCost::delta_m(double t) const { return delta_(t) * (*this)(t); }

double m_of_t(double t, const ModelParams& params) { return SubsistenceCost(params)(t); }

}  // namespace habitctl
