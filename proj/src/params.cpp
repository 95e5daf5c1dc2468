#include "habitctl/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "habitctl/errors.hpp"

namespace habitctl {

TimeFunction TimeFunction::constant(double value) {
    TimeFunction f;
    f.kind_ = Kind::Constant;
    f.a_ = value;
    return f;
}

TimeFunction TimeFunction::affine(double intercept, double slope) {
    TimeFunction f;
    f.kind_ = Kind::Affine;
    f.a_ = intercept;
    f.b_ = slope;
    return f;
}

TimeFunction TimeFunction::grid(std::vector<double> times, std::vector<double> values) {
    if (times.size() < 2 || times.size() != values.size()) {
        throw ConfigError("grid function needs at least two (t, v) points of equal count");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ConfigError("grid function times must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("grid function values must be finite");
    }
    TimeFunction f;
    f.kind_ = Kind::Grid;
    f.t_ = std::move(times);
    f.v_ = std::move(values);
    return f;
}

double TimeFunction::operator()(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return a_;
    case Kind::Affine:
        return a_ + b_ * t;
    case Kind::Grid: {
        if (t <= t_.front()) return v_.front();
        if (t >= t_.back()) return v_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const auto i = static_cast<std::size_t>(it - t_.begin());
        const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
        return v_[i - 1] + w * (v_[i] - v_[i - 1]);
    }
    }
    return 0.0;
}

double TimeFunction::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    switch (kind_) {
    case Kind::Constant:
        return a_ * (b - a);
    case Kind::Affine:
        return a_ * (b - a) + 0.5 * b_ * (b * b - a * a);
    case Kind::Grid: {
        // trapezoid over each linear piece is exact
        std::vector<double> pts{a};
        for (double k : knots_between(a, b)) pts.push_back(k);
        pts.push_back(b);
        double sum = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            sum += 0.5 * ((*this)(pts[i - 1]) + (*this)(pts[i])) * (pts[i] - pts[i - 1]);
        }
        return sum;
    }
    }
    return 0.0;
}

std::vector<double> TimeFunction::knots_between(double a, double b) const {
    std::vector<double> out;
    if (kind_ != Kind::Grid) return out;
    for (double t : t_) {
        if (t > a && t < b) out.push_back(t);
    }
    return out;
}

double TimeFunction::min_on(double a, double b) const {
    double m = std::min((*this)(a), (*this)(b));
    for (double k : knots_between(a, b)) m = std::min(m, (*this)(k));
    return m;
}

bool TimeFunction::covers(double a, double b) const {
    if (kind_ != Kind::Grid) return true;
    return t_.front() <= a && t_.back() >= b;
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

void ModelParams::validate() const {
    const double fields[] = {sigma_s, sigma_mu, lambda, mu_bar, rho, p, horizon, eta0, theta0, x0, z0};
    for (double v : fields) require(std::isfinite(v), "all model constants must be finite");
    require(sigma_s > 0.0, "sigma_s must be > 0");
    require(sigma_mu >= 0.0, "sigma_mu must be >= 0");
    require(lambda >= 0.0, "lambda must be >= 0");
    require(std::abs(rho) <= 1.0, "rho must lie in [-1, 1]");
    require(p < 1.0 && p != 0.0, "p must satisfy p < 1 and p != 0");
    require(horizon > 0.0, "horizon must be > 0");
    require(theta0 >= 0.0, "theta0 must be >= 0");
    require(x0 > 0.0, "x0 must be > 0");
    require(z0 >= 0.0, "z0 must be >= 0");
    require(delta_fn.covers(0.0, horizon), "delta_fn grid must cover [0, horizon]");
    require(alpha_fn.covers(0.0, horizon), "alpha_fn grid must cover [0, horizon]");
    require(delta_fn.min_on(0.0, horizon) >= 0.0, "delta_fn must be nonnegative on [0, horizon]");
    require(alpha_fn.min_on(0.0, horizon) >= 0.0, "alpha_fn must be nonnegative on [0, horizon]");
}

ModelParams default_params() { return ModelParams{}; }

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
    case Regime::Normal: return "Normal";
    case Regime::Hyperbolic: return "Hyperbolic";
    case Regime::Polynomial: return "Polynomial";
    case Regime::Tangent: return "Tangent";
    }
    return "?";
}

double RegimeClassification::effective_disc() const noexcept {
    switch (regime) {
    case Regime::Normal: return delta_disc;
    case Regime::Tangent: return delta_disc;
    default: return 0.0;
    }
}

double disc_zero_tolerance(const ModelParams& params) noexcept {
    return 1e-12 * std::max(1.0, params.lambda * params.lambda);
}

RegimeClassification classify_regime(const ModelParams& params) {
    const double p = params.p;
    const double sS = params.sigma_s;
    const double sM = params.sigma_mu;
    const double lam = params.lambda;
    const double rho = params.rho;

    RegimeClassification rc;
    rc.gamma1 = (1.0 - p + p * rho * rho) / (1.0 - p) * sM * sM;
    rc.gamma2 = -lam + p * rho * sM / ((1.0 - p) * sS);
    rc.gamma3 = p / ((1.0 - p) * sS * sS);
    rc.delta_disc = rc.gamma2 * rc.gamma2 - rc.gamma1 * rc.gamma3;

    const double kappa = lam + rho * sM / sS;
    rc.xi1 = std::sqrt(kappa * kappa + (1.0 - rho * rho) * sM * sM / (sS * sS));

    if (std::abs(rc.delta_disc) <= disc_zero_tolerance(params)) {
        if (std::abs(rc.gamma2) <= 1e-12 * std::max(1.0, lam)) {
            rc.regime = Regime::Polynomial;
        } else {
            rc.regime = Regime::Hyperbolic;
            if (rc.gamma2 > 0.0) rc.critical_horizon = 1.0 / rc.gamma2;
        }
    } else if (rc.delta_disc > 0.0) {
        rc.regime = Regime::Normal;
        rc.xi = std::sqrt(rc.delta_disc);
        // u(tau) = cosh(xi tau) - gamma2 sinh(xi tau)/xi has a root iff gamma2 > xi
        if (rc.gamma2 > rc.xi) {
            rc.critical_horizon =
                std::log((rc.gamma2 + rc.xi) / (rc.gamma2 - rc.xi)) / (2.0 * rc.xi);
        }
    } else {
        rc.regime = Regime::Tangent;
        rc.zeta = std::sqrt(-rc.delta_disc);
        rc.varpi = std::atan(rc.gamma2 / rc.zeta);
        rc.critical_horizon = std::numbers::pi / (2.0 * rc.zeta) - rc.varpi / rc.zeta;
    }
    return rc;
}

void require_finite_horizon(const RegimeClassification& regime, const ModelParams& params) {
    if (regime.critical_horizon && params.horizon >= *regime.critical_horizon) {
        std::ostringstream os;
        os << "horizon " << params.horizon << " reaches the critical horizon "
           << *regime.critical_horizon << " of the " << to_string(regime.regime) << " regime";
        throw ExplosionError(os.str(), 0.0, params.horizon);
    }
}

}  // namespace habitctl
