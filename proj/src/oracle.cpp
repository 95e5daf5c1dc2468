#include "habitctl/oracle.hpp"

#include <array>
#include <cmath>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl::oracle {

namespace {

template <std::size_t N, class F>
std::array<double, N> rk4_step(const F& rhs, double t, const std::array<double, N>& y, double h) {
    auto axpy = [](const std::array<double, N>& a, double c, const std::array<double, N>& b) {
        std::array<double, N> r;
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + c * b[i];
        return r;
    };
    const auto k1 = rhs(t, y);
    const auto k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const auto k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const auto k4 = rhs(t + h, axpy(y, h, k3));
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// March from `from` to each target in turn with steps no longer than `step`;
// targets must be monotone in the direction of travel.
template <std::size_t N, class F>
std::vector<std::array<double, N>> march(const F& rhs, double from, std::array<double, N> y,
                                         const std::vector<double>& targets, double step) {
    std::vector<std::array<double, N>> out;
    out.reserve(targets.size());
    double t = from;
    for (double target : targets) {
        const double span = target - t;
        const long n = static_cast<long>(std::ceil(std::abs(span) / step - 1e-9));
        if (n > 0) {
            const double h = span / static_cast<double>(n);
            for (long k = 0; k < n; ++k) {
                y = rk4_step<N>(rhs, t + k * h, y, h);
            }
        }
        t = target;
        out.push_back(y);
    }
    return out;
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::vector<double> rk4_omega(const std::vector<double>& times, const ModelParams& pr, double step) {
    const double s = pr.sigma_s;
    const double lin = -2.0 * pr.sigma_mu * pr.rho / s - 2.0 * pr.lambda;
    const double cst = (1.0 - pr.rho * pr.rho) * pr.sigma_mu * pr.sigma_mu;
    auto rhs = [&](double, const std::array<double, 1>& y) {
        return std::array<double, 1>{-y[0] * y[0] / (s * s) + lin * y[0] + cst};
    };
    const auto path = march<1>(rhs, 0.0, {pr.theta0}, times, step);
    std::vector<double> out;
    for (const auto& y : path) out.push_back(y[0]);
    return out;
}

std::vector<AuxQuintuple> rk4_aux(const std::vector<double>& taus, const ModelParams& pr,
                                  double step) {
    const double p = pr.p;
    const double sS = pr.sigma_s;
    const double sM = pr.sigma_mu;
    const double lam = pr.lambda;
    const double rho = pr.rho;
    const double g1 = (1.0 - p + p * rho * rho) / (1.0 - p) * sM * sM;
    const double tilt = p * rho * sM / ((1.0 - p) * sS);
    // d/dtau = -d/dt
    auto rhs = [&](double, const std::array<double, 5>& y) {
        const double a = y[0], b = y[1], f = y[3];
        std::array<double, 5> d;
        d[0] = -(-2.0 * g1 * a * a + (2.0 * lam - 2.0 * tilt) * a - p / (2.0 * (1.0 - p) * sS * sS));
        d[1] = -(-2.0 * g1 * a * b - 2.0 * lam * pr.mu_bar * a + (lam - tilt) * b);
        d[2] = -(-sM * sM * a - 0.5 * g1 * b * b - lam * pr.mu_bar * b);
        d[3] = -(-2.0 * (1.0 - rho * rho) * sM * sM * f * f + 2.0 * (lam * sS + rho * sM) / sS * f +
                 1.0 / (2.0 * sS * sS));
        d[4] = -(sM * sM * (1.0 - rho * rho) * (f - a));
        return d;
    };
    const auto path = march<5>(rhs, 0.0, {0, 0, 0, 0, 0}, taus, step);
    std::vector<AuxQuintuple> out;
    for (const auto& y : path) out.push_back({y[0], y[1], y[2], y[3], y[4]});
    return out;
}

std::vector<AbcTriple> rk4_abc(double s, const std::vector<double>& times, const ModelParams& pr,
                               double step) {
    const double p = pr.p;
    const double s2 = pr.sigma_s * pr.sigma_s;
    const double corr = pr.sigma_s * pr.sigma_mu * pr.rho;
    auto rhs = [&](double t, const std::array<double, 3>& y) {
        const double g = omega_hat_closed(std::max(t, 0.0), pr) + corr;
        const double A = y[0], B = y[1];
        const double lin = -pr.lambda + p * g / (s2 * (1.0 - p));
        std::array<double, 3> d;
        d[0] = -(p / (2.0 * (1.0 - p) * (1.0 - p) * s2) + 2.0 * lin * A + 2.0 * g * g / s2 * A * A);
        d[1] = -(lin * B + 2.0 * pr.lambda * pr.mu_bar * A + 2.0 * g * g / s2 * A * B);
        d[2] = -(pr.lambda * pr.mu_bar * B + g * g / (2.0 * s2) * (B * B + 2.0 * A));
        return d;
    };
    const auto path = march<3>(rhs, s, {0, 0, 0}, times, step);
    std::vector<AbcTriple> out;
    for (const auto& y : path) out.push_back({y[0], y[1], y[2]});
    return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double m_adaptive(double t, const ModelParams& pr, double tol) {
    const double T = pr.horizon;
    auto rate = [&](double v) { return pr.delta_fn(v) - pr.alpha_fn(v); };
    auto outer = [&](double s) { return std::exp(adaptive_simpson(rate, t, s, tol)); };
    return adaptive_simpson(outer, t, T, tol);
}

Eigen::VectorXd crank_nicolson_n(const ModelParams& pr, double t_target,
                                 const Eigen::VectorXd& eta_query, int n_eta, int n_t,
                                 double half_width) {
    if (n_eta < 5 || n_t < 1) throw DomainError("crank_nicolson_n: grid too small");
    const SubsistenceCost m(pr);
    const double p = pr.p;
    const double s2 = pr.sigma_s * pr.sigma_s;
    const double corr = pr.sigma_s * pr.sigma_mu * pr.rho;
    const double T = pr.horizon;
    const int J = n_eta - 1;
    const double de = 2.0 * half_width / J;
    const double dt = (T - t_target) / n_t;
    Eigen::VectorXd eta = Eigen::VectorXd::LinSpaced(n_eta, -half_width, half_width);

    // L N = diff N'' + adv N' + pot N, tridiagonal rows (lo, di, up)
    struct Op {
        Eigen::VectorXd lo, di, up;
        double src;
    };
    auto build = [&](double t) {
        const double g = omega_hat_closed(t, pr) + corr;
        const double diff = g * g / (2.0 * s2);
        Op op{Eigen::VectorXd::Zero(n_eta), Eigen::VectorXd::Zero(n_eta), Eigen::VectorXd::Zero(n_eta),
              std::pow(1.0 + m.delta_m(t), p / (p - 1.0))};
        for (int j = 0; j <= J; ++j) {
            const double e = eta[j];
            const double adv = -pr.lambda * (e - pr.mu_bar) + e * g * p / ((1.0 - p) * s2);
            const double pot = p * e * e / (2.0 * (1.0 - p) * (1.0 - p) * s2);
            op.di[j] = pot;
            if (j == 0 || j == J) {
                // edges: drop diffusion, upwind advection toward the interior
                if (j == 0 && adv > 0.0) {
                    op.di[j] -= adv / de;
                    op.up[j] += adv / de;
                } else if (j == J && adv < 0.0) {
                    op.di[j] += adv / de;
                    op.lo[j] -= adv / de;
                }
                continue;
            }
            op.lo[j] = diff / (de * de) - adv / (2.0 * de);
            op.di[j] += -2.0 * diff / (de * de);
            op.up[j] = diff / (de * de) + adv / (2.0 * de);
        }
        return op;
    };

    Eigen::VectorXd n = Eigen::VectorXd::Ones(n_eta);
    Op cur = build(T);
    for (int k = 0; k < n_t; ++k) {
        const double t1 = T - (k + 1) * dt;
        const Op nxt = build(std::max(t1, 0.0));
        // (I - dt/2 L1) n1 = (I + dt/2 L0) n0 + dt/2 (h0 + h1)
        Eigen::VectorXd rhs(n_eta);
        for (int j = 0; j <= J; ++j) {
            double ln = cur.di[j] * n[j];
            if (j > 0) ln += cur.lo[j] * n[j - 1];
            if (j < J) ln += cur.up[j] * n[j + 1];
            rhs[j] = n[j] + 0.5 * dt * ln + 0.5 * dt * (cur.src + nxt.src);
        }
        Eigen::VectorXd a = -0.5 * dt * nxt.lo;
        Eigen::VectorXd b = Eigen::VectorXd::Ones(n_eta) - 0.5 * dt * nxt.di;
        Eigen::VectorXd c = -0.5 * dt * nxt.up;
        // Thomas algorithm
        for (int j = 1; j <= J; ++j) {
            const double w = a[j] / b[j - 1];
            b[j] -= w * c[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        n[J] = rhs[J] / b[J];
        for (int j = J - 1; j >= 0; --j) n[j] = (rhs[j] - c[j] * n[j + 1]) / b[j];
        cur = nxt;
    }

    Eigen::VectorXd out(eta_query.size());
    for (Eigen::Index q = 0; q < eta_query.size(); ++q) {
        const double x = (eta_query[q] + half_width) / de;
        const int j = std::clamp(static_cast<int>(std::floor(x)), 0, J - 1);
        const double w = x - j;
        out[q] = (1.0 - w) * n[j] + w * n[j + 1];
    }
    return out;
}

}  // namespace habitctl::oracle
