#include "habitctl/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl {

RiccatiBasis riccati_basis(double disc, double tau) noexcept {
    RiccatiBasis r;
    if (tau == 0.0) return r;
    const double x = disc * tau * tau;
    if (std::abs(x) <= 1.0) {
        // power series in x = D tau^2; terms fall at least like 1/(2k)!
        double c = 0.0, s = 0.0, e = 0.0, j1 = 0.0, j2 = 0.0;
        double xk = 1.0;     // x^k
        double f2k = 1.0;    // (2k)!
        for (int k = 0; k < 30; ++k) {
            const double f2k1 = f2k * (2 * k + 1);
            const double f2k2 = f2k1 * (2 * k + 2);
            c += xk / f2k;
            s += xk / f2k1;
            e += xk / f2k2;
            const double xk1 = xk * x;  // x^{k+1}, coefficient index k+1 of the J series
            const double f2k3 = f2k2 * (2 * k + 3);
            const double f2k4 = f2k3 * (2 * k + 4);
            j1 += xk * (2.0 * (k + 1)) / f2k3;
            j2 += xk * (2.0 / f2k4 - 1.0 / f2k3);
            if (std::abs(xk1 / f2k2) < 1e-18) break;
            xk = xk1;
            f2k = f2k2;
        }
        const double t2 = tau * tau;
        r.C = c;
        r.S = tau * s;
        r.E = t2 * e;
        r.J1 = t2 * tau * j1;
        r.J2 = t2 * t2 * j2;
        return r;
    }
    if (disc > 0.0) {
        const double w = std::sqrt(disc);
        r.C = std::cosh(w * tau);
        r.S = std::sinh(w * tau) / w;
    } else {
        const double w = std::sqrt(-disc);
        r.C = std::cos(w * tau);
        r.S = std::sin(w * tau) / w;
    }
    r.E = (r.C - 1.0) / disc;
    r.J1 = (tau * r.C - r.S) / disc;
    r.J2 = (2.0 * r.E - tau * r.S) / disc;
    return r;
}

AuxQuintuple aux_quintuple(double t, double s, const RegimeClassification& regime,
                           const ModelParams& params) {
    const double tau = s - t;
    if (tau < 0.0) throw DomainError("aux_quintuple: requires t <= s");
    if (regime.critical_horizon && tau >= *regime.critical_horizon) {
        std::ostringstream os;
        os << "aux_quintuple: s - t = " << tau << " reaches the critical horizon "
           << *regime.critical_horizon;
        throw ExplosionError(os.str(), t, s);
    }
    if (tau == 0.0) return {};

    const double p = params.p;
    const double sS = params.sigma_s;
    const double lam = params.lambda;
    const double mub = params.mu_bar;
    const double rho = params.rho;
    const double g2 = regime.gamma2;
    const double g3 = regime.gamma3;

    const double D = regime.effective_disc();
    const RiccatiBasis q = riccati_basis(D, tau);
    const double arg = D * q.E - g2 * q.S;  // u - 1
    if (!(arg > -1.0)) {
        throw NumericError("aux_quintuple: u(tau) left (0, inf); regime misclassified?");
    }
    const double u = 1.0 + arg;
    const double log_u = std::log1p(arg);
    const double k1 = (1.0 - p) / (1.0 - p + p * rho * rho);

    AuxQuintuple out;
    out.a = 0.5 * g3 * q.S / u;
    out.b = lam * mub * g3 * q.E / u;
    out.c = -0.5 * k1 * (g2 * tau + log_u) + g3 * lam * lam * mub * mub * (q.J1 + g2 * q.J2) / (2.0 * u);

    const double kappa = lam + rho * params.sigma_mu / sS;
    const double d1 = regime.xi1 * regime.xi1;
    const RiccatiBasis qf = riccati_basis(d1, tau);
    const double arg_f = d1 * qf.E + kappa * qf.S;
    const double uf = 1.0 + arg_f;
    out.f = -qf.S / (2.0 * sS * sS * uf);
    out.g = -0.5 * (1.0 - rho * rho) * k1 * (g2 * tau + log_u) - 0.5 * (kappa * tau - std::log1p(arg_f));

    if (!std::isfinite(out.a) || !std::isfinite(out.b) || !std::isfinite(out.c) ||
        !std::isfinite(out.f) || !std::isfinite(out.g)) {
        throw NumericError("aux_quintuple: non-finite value");
    }
    return out;
}

AbcTriple abc_from_aux(double t, double s, const AuxQuintuple& q, double omega,
                       const ModelParams& params) {
    const double p = params.p;
    const double d = 1.0 - 2.0 * q.a * omega;
    if (d < 1e-12) {
        // |d| < 1e-12 is the singular set itself; d < 0 means the s-interval crossed it
        std::ostringstream os;
        os << "1 - 2 a Omega = " << d << (d > -1e-12 ? " vanishes" : " is past the singularity")
           << " at (t, s) = (" << t << ", " << s << ")";
        throw SingularityError(os.str(), t, s);
    }
    const double df = 1.0 - 2.0 * q.f * omega;
    if (!(df > 0.0)) throw DomainError("1 - 2 f Omega <= 0");

    AbcTriple r;
    r.A = q.a / ((1.0 - p) * d);
    r.B = q.b / ((1.0 - p) * d);
    r.C = (q.c + omega * q.b * q.b / (2.0 * d) - 0.5 * (1.0 - p) * std::log(d) -
           0.5 * p * std::log(df) - p * q.g) /
          (1.0 - p);
    return r;
}

AbcTriple abc(double t, double s, const Model& model) {
    const AuxQuintuple q = aux_quintuple(t, s, model.regime, model.params);
    return abc_from_aux(t, s, q, omega_hat_closed(t, model.params), model.params);
}

NSlice::NSlice(double t, const Model& model) : t_(t) {
    const ModelParams& pr = model.params;
    const double T = pr.horizon;
    if (t < 0.0 || t > T) throw DomainError("N(t, eta): t outside [0, horizon]");
    if (t == T) return;

    const int n = model.simpson_panels;
    const double h = (T - t) / n;
    const double omega = omega_hat_closed(t, pr);
    const double expo = pr.p / (pr.p - 1.0);
    A_.resize(n + 1);
    B_.resize(n + 1);
    C_.resize(n + 1);
    w_.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double s = (k == n) ? T : t + k * h;
        const AbcTriple c = abc_from_aux(t, s, aux_quintuple(t, s, model.regime, pr), omega, pr);
        A_[k] = c.A;
        B_[k] = c.B;
        C_[k] = c.C;
        const double simpson = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        w_[k] = simpson * h / 3.0 * std::pow(1.0 + model.m.delta_m(s), expo);
    }
    terminal_ = {A_[n], B_[n], C_[n]};
}

NValue NSlice::operator()(double eta) const {
    if (A_.size() == 0) return {};
    const Eigen::ArrayXd q = 2.0 * A_ * eta + B_;
    const Eigen::ArrayXd e = w_ * ((A_ * eta + B_) * eta + C_).exp();
    const double et = std::exp((terminal_.A * eta + terminal_.B) * eta + terminal_.C);
    const double qt = 2.0 * terminal_.A * eta + terminal_.B;
    NValue v;
    v.n = e.sum() + et;
    v.n_eta = (e * q).sum() + et * qt;
    v.n_etaeta = (e * (q.square() + 2.0 * A_)).sum() + et * (qt * qt + 2.0 * terminal_.A);
    return v;
}

double n_function(double t, double eta, const Model& model) { return NSlice(t, model)(eta).n; }

double n_eta(double t, double eta, const Model& model) { return NSlice(t, model)(eta).n_eta; }

double sup_A_on_grid(const Model& model, int n) {
    const double T = model.params.horizon;
    double sup = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double t = T * i / n;
        for (int j = i; j <= n; ++j) {
            const double s = (j == n) ? T : T * j / n;
            sup = std::max(sup, abc(t, s, model).A);
        }
    }
    return sup;
}

Mesh2D Mesh2D::uniform(double t0, double t1, int nt, double eta0, double eta1, int neta) {
    Mesh2D m;
    m.t = Eigen::VectorXd::LinSpaced(nt, t0, t1);
    m.eta = Eigen::VectorXd::LinSpaced(neta, eta0, eta1);
    return m;
}

ResidualField pde_residual_n(const Mesh2D& mesh, double h, const Model& model,
                             const NEvaluator& n_override) {
    const ModelParams& pr = model.params;
    const double T = pr.horizon;
    const double s2 = pr.sigma_s * pr.sigma_s;
    const double p = pr.p;

    std::map<double, NSlice> cache;
    auto eval = [&](double t, double eta) {
        if (n_override) return n_override(t, eta);
        auto it = cache.find(t);
        if (it == cache.end()) it = cache.emplace(t, NSlice(t, model)).first;
        return it->second(eta).n;
    };

    ResidualField out;
    out.values.resize(mesh.t.size(), mesh.eta.size());
    double sumsq = 0.0;
    for (Eigen::Index i = 0; i < mesh.t.size(); ++i) {
        const double t = mesh.t[i];
        const double g = omega_hat_closed(t, pr) + pr.sigma_s * pr.sigma_mu * pr.rho;
        const double src = std::pow(1.0 + model.m.delta_m(t), p / (p - 1.0));
        for (Eigen::Index j = 0; j < mesh.eta.size(); ++j) {
            const double eta = mesh.eta[j];
            const double n0 = eval(t, eta);
            double nt;
            if (t + h <= T && t - h >= 0.0) {
                nt = (eval(t + h, eta) - eval(t - h, eta)) / (2.0 * h);
            } else if (t + h > T) {
                nt = (3.0 * n0 - 4.0 * eval(t - h, eta) + eval(t - 2.0 * h, eta)) / (2.0 * h);
            } else {
                nt = (-3.0 * n0 + 4.0 * eval(t + h, eta) - eval(t + 2.0 * h, eta)) / (2.0 * h);
            }
            const double np = eval(t, eta + h);
            const double nm = eval(t, eta - h);
            const double ne = (np - nm) / (2.0 * h);
            const double nee = (np - 2.0 * n0 + nm) / (h * h);
            const double r = nt + p * eta * eta / (2.0 * (1.0 - p) * (1.0 - p) * s2) * n0 +
                             g * g / (2.0 * s2) * nee + src +
                             (-pr.lambda * (eta - pr.mu_bar) + eta * g * p / ((1.0 - p) * s2)) * ne;
            out.values(i, j) = r;
            out.max_abs = std::max(out.max_abs, std::abs(r));
            sumsq += r * r;
        }
    }
    out.rms = std::sqrt(sumsq / static_cast<double>(out.values.size()));
    return out;
}

}  // namespace habitctl
