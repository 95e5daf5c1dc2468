#include "habitctl/policy.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl {

PolicyInputs policy_inputs(double t, double eta, const Model& model) {
    const ModelParams& p = model.params;
    PolicyInputs in;
    in.m = model.m(t);
    in.delta_m = p.delta_fn(t) * in.m;
    in.g = omega_hat_closed(t, p) + p.sigma_s * p.sigma_mu * p.rho;
    in.n = NSlice(t, model)(eta);
    return in;
}

namespace {

double excess_wealth(const StateVector& s, double m) {
    const double e = s.x - m * s.z;
    if (e < 0.0) throw DomainError("state below the subsistence boundary x >= m(t) z");
    return e;
}

}  // namespace

double value_from(const StateVector& s, const ModelParams& params, const PolicyInputs& in) {
    const double e = excess_wealth(s, in.m);
    const double p = params.p;
    if (e == 0.0) return p > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return std::pow(in.n.n, 1.0 - p) * std::pow(e, p) / p;
}

double value_v(const StateVector& s, const Model& model) {
    return value_from(s, model.params, policy_inputs(s.t, s.eta, model));
}

PolicyPair optimal_policy(const StateVector& s, const ModelParams& params, const PolicyInputs& in) {
    const double e = excess_wealth(s, in.m);
    const double p = params.p;
    const double s2 = params.sigma_s * params.sigma_s;
    PolicyPair out;
    out.pi = (s.eta / ((1.0 - p) * s2) + in.g / s2 * in.n.n_eta / in.n.n) * e;
    out.c = s.z + e / (std::pow(1.0 + in.delta_m, 1.0 / (1.0 - p)) * in.n.n);
    return out;
}

PolicyPair policy_ratios(const StateVector& s, const ModelParams& params, const PolicyInputs& in) {
    const double p = params.p;
    const double s2 = params.sigma_s * params.sigma_s;
    const double zx = s.z / s.x;
    const double frac = 1.0 - in.m * zx;
    PolicyPair r;
    r.pi = (s.eta / ((1.0 - p) * s2) + in.g / s2 * in.n.n_eta / in.n.n) * frac;
    r.c = zx + frac / (std::pow(1.0 + in.delta_m, 1.0 / (1.0 - p)) * in.n.n);
    return r;
}

double policy_pi(const StateVector& s, const Model& model) {
    return optimal_policy(s, model.params, policy_inputs(s.t, s.eta, model)).pi;
}

double policy_c(const StateVector& s, const Model& model) {
    return optimal_policy(s, model.params, policy_inputs(s.t, s.eta, model)).c;
}

Eigen::VectorXd log_gamma_increments(const FilteredPath& path, const ModelParams& params) {
    const double p = params.p;
    const double s = params.sigma_s;
    const Eigen::Index n = path.dw_hat.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double dt = path.t[k + 1] - path.t[k];
        const double mh = path.mu_hat[k];
        out[k] = -mh * mh * dt / (2.0 * (1.0 - p) * s * s) - mh * path.dw_hat[k] / ((1.0 - p) * s);
    }
    return out;
}

Eigen::VectorXd wealth_explicit(const FilteredPath& path, const Model& model,
                                const NLookup& lookup) {
    const ModelParams& pr = model.params;
    const Eigen::Index n = path.dw_hat.size();
    if (path.t.size() != n + 1 || path.mu_hat.size() != n + 1 || path.z.size() != n + 1) {
        throw DomainError("wealth_explicit: inconsistent path lengths");
    }
    auto nval = [&](Eigen::Index k) {
        const double t = path.t[k];
        if (lookup) return lookup(static_cast<std::size_t>(k), t, path.mu_hat[k]).n;
        return NSlice(t, model)(path.mu_hat[k]).n;
    };
    const double e0 = pr.x0 - model.m(path.t[0]) * path.z[0];
    const double n0 = nval(0);
    const Eigen::VectorXd dlg = log_gamma_increments(path, pr);
    Eigen::VectorXd x(n + 1);
    double acc = 0.0;
    for (Eigen::Index k = 0; k <= n; ++k) {
        if (k > 0) acc -= dlg[k - 1];
        x[k] = e0 * nval(k) / n0 * std::exp(acc) + model.m(path.t[k]) * path.z[k];
    }
    return x;
}

HjbResidual hjb_residual(const HjbGrid& grid, double h, const Model& model,
                         const VEvaluator& v_override) {
    const ModelParams& pr = model.params;
    const double T = pr.horizon;
    const double s2 = pr.sigma_s * pr.sigma_s;
    const double p = pr.p;

    std::map<double, NSlice> slices;
    auto V = [&](double t, double x, double z, double eta) {
        const StateVector st{t, x, z, eta};
        if (v_override) return v_override(st);
        auto it = slices.find(t);
        if (it == slices.end()) it = slices.emplace(t, NSlice(t, model)).first;
        PolicyInputs in;
        in.m = model.m(t);
        in.n = it->second(eta);
        return value_from(st, pr, in);
    };

    HjbResidual out;
    double sumsq = 0.0;
    for (double t : grid.t) {
        const double g = omega_hat_closed(t, pr) + pr.sigma_s * pr.sigma_mu * pr.rho;
        const double alpha = pr.alpha_fn(t);
        const double delta = pr.delta_fn(t);
        for (double x : grid.x) {
            for (double z : grid.z) {
                for (double eta : grid.eta) {
                    const double v0 = V(t, x, z, eta);
                    double vt;
                    if (t - h >= 0.0 && t + h <= T) {
                        vt = (V(t + h, x, z, eta) - V(t - h, x, z, eta)) / (2.0 * h);
                    } else if (t + h > T) {
                        vt = (3.0 * v0 - 4.0 * V(t - h, x, z, eta) + V(t - 2.0 * h, x, z, eta)) / (2.0 * h);
                    } else {
                        vt = (-3.0 * v0 + 4.0 * V(t + h, x, z, eta) - V(t + 2.0 * h, x, z, eta)) / (2.0 * h);
                    }
                    const double vxp = V(t, x + h, z, eta), vxm = V(t, x - h, z, eta);
                    const double vx = (vxp - vxm) / (2.0 * h);
                    const double vxx = (vxp - 2.0 * v0 + vxm) / (h * h);
                    const double vz = (V(t, x, z + h, eta) - V(t, x, z - h, eta)) / (2.0 * h);
                    const double vep = V(t, x, z, eta + h), vem = V(t, x, z, eta - h);
                    const double ve = (vep - vem) / (2.0 * h);
                    const double vee = (vep - 2.0 * v0 + vem) / (h * h);
                    const double vxe = (V(t, x + h, z, eta + h) - V(t, x + h, z, eta - h) -
                                        V(t, x - h, z, eta + h) + V(t, x - h, z, eta - h)) /
                                       (4.0 * h * h);
                    const double q = vx - delta * vz;
                    const double r = vt - alpha * z * vz - pr.lambda * (eta - pr.mu_bar) * ve +
                                     g * g / (2.0 * s2) * vee -
                                     eta * g * vx * vxe / (s2 * vxx) -
                                     eta * eta * vx * vx / (2.0 * s2 * vxx) -
                                     g * g * vxe * vxe / (2.0 * s2 * vxx) - z * q -
                                     (p - 1.0) / p * std::pow(q, p / (p - 1.0));
                    out.values.push_back(r);
                    out.max_abs = std::max(out.max_abs, std::abs(r));
                    sumsq += r * r;
                }
            }
        }
    }
    out.rms = out.values.empty() ? 0.0 : std::sqrt(sumsq / static_cast<double>(out.values.size()));
    return out;
}

}  // namespace habitctl
