#include "habitctl/n_surface.hpp"

#include <algorithm>
#include <cmath>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl {

NSurface::NSurface(const Model& model, std::vector<double> times, double eta_lo, double eta_hi,
                   double spacing)
    : model_(&model), times_(std::move(times)), lo_(eta_lo), hi_(eta_hi) {
    if (!(eta_hi > eta_lo) || !(spacing > 0.0)) throw DomainError("NSurface: bad eta range");
    n_ = std::max(2, static_cast<int>(std::ceil((hi_ - lo_) / spacing)));
    h_ = (hi_ - lo_) / n_;
    const auto rows = static_cast<Eigen::Index>(times_.size());
    val_.resize(rows, n_ + 1);
    d1_.resize(rows, n_ + 1);
    d2_.resize(rows, n_ + 1);
    slices_.reserve(times_.size());
    for (Eigen::Index k = 0; k < rows; ++k) {
        slices_.emplace_back(times_[k], model);
        for (int j = 0; j <= n_; ++j) {
            const NValue v = slices_.back()(lo_ + j * h_);
            val_(k, j) = v.n;
            d1_(k, j) = v.n_eta;
            d2_(k, j) = v.n_etaeta;
        }
    }
}

NSurface NSurface::for_simulation(const Model& model, int n_steps, double spacing) {
    const ModelParams& p = model.params;
    std::vector<double> t(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) t[k] = (k == n_steps) ? p.horizon : p.horizon * k / n_steps;
    const double spread = std::max(p.theta0, steady_state_theta(p)) + p.sigma_mu * p.sigma_mu * p.horizon;
    const double half = 10.0 * std::sqrt(spread) + std::abs(p.mu_bar - p.eta0) + 0.1;
    return NSurface(model, std::move(t), p.eta0 - half, p.eta0 + half, spacing);
}

NValue NSurface::at(std::size_t k, double eta) const {
    if (!(eta >= lo_ && eta <= hi_)) return slices_[k](eta);
    const double x = (eta - lo_) / h_;
    const int j = std::min(static_cast<int>(x), n_ - 1);
    const double u = x - j;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const Eigen::Index r = static_cast<Eigen::Index>(k);
    const double f0 = val_(r, j), f1 = val_(r, j + 1);
    const double g0 = h_ * d1_(r, j), g1 = h_ * d1_(r, j + 1);
    const double c0 = h_ * h_ * d2_(r, j), c1 = h_ * h_ * d2_(r, j + 1);

    NValue v;
    v.n = f0 * (1 - 10 * u3 + 15 * u4 - 6 * u5) + g0 * (u - 6 * u3 + 8 * u4 - 3 * u5) +
          c0 * 0.5 * (u2 - 3 * u3 + 3 * u4 - u5) + f1 * (10 * u3 - 15 * u4 + 6 * u5) +
          g1 * (-4 * u3 + 7 * u4 - 3 * u5) + c1 * 0.5 * (u3 - 2 * u4 + u5);
    v.n_eta = (f0 * (-30 * u2 + 60 * u3 - 30 * u4) + g0 * (1 - 18 * u2 + 32 * u3 - 15 * u4) +
               c0 * 0.5 * (2 * u - 9 * u2 + 12 * u3 - 5 * u4) + f1 * (30 * u2 - 60 * u3 + 30 * u4) +
               g1 * (-12 * u2 + 28 * u3 - 15 * u4) + c1 * 0.5 * (3 * u2 - 8 * u3 + 5 * u4)) /
              h_;
    v.n_etaeta = (f0 * (-60 * u + 180 * u2 - 120 * u3) + g0 * (-36 * u + 96 * u2 - 60 * u3) +
                  c0 * 0.5 * (2 - 18 * u + 36 * u2 - 20 * u3) + f1 * (60 * u - 180 * u2 + 120 * u3) +
                  g1 * (-24 * u + 84 * u2 - 60 * u3) + c1 * 0.5 * (6 * u - 24 * u2 + 20 * u3)) /
                 (h_ * h_);
    return v;
}

NValue NSurface::operator()(double t, double eta) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it != times_.end() && std::abs(*it - t) <= 1e-13 * std::max(1.0, std::abs(t))) {
        return at(static_cast<std::size_t>(it - times_.begin()), eta);
    }
    if (it != times_.begin() && std::abs(*(it - 1) - t) <= 1e-13 * std::max(1.0, std::abs(t))) {
        return at(static_cast<std::size_t>(it - times_.begin() - 1), eta);
    }
    return NSlice(t, *model_)(eta);
}

}  // namespace habitctl
