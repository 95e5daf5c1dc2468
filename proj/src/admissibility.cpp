#include "habitctl/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "habitctl/closed_form.hpp"
#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl {

bool AdmissibilityReport::admissible() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::string> AdmissibilityReport::violations() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.passed) out.push_back(c.name);
    }
    return out;
}

const AdmissibilityCheck* AdmissibilityReport::find(const std::string& name) const noexcept {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

AdmissibilityReport check_admissibility(const ModelParams& params, double k1_bar, int grid_n) {
    params.validate();
    AdmissibilityReport rep;
    rep.m0 = SubsistenceCost(params)(0.0);
    rep.theta_star = steady_state_theta(params);
    rep.k1_bar = k1_bar;

    const double need = rep.m0 * params.z0;
    rep.checks.push_back({"budget_nonempty", params.x0 >= need,
                          "x0 = " + fmt(params.x0) + ", m(0) z0 = " + fmt(need)});
    rep.checks.push_back({"budget_strict", params.x0 > need,
                          "x0 = " + fmt(params.x0) + ", m(0) z0 = " + fmt(need)});

    const RegimeClassification rc = classify_regime(params);
    const bool below = !rc.critical_horizon || params.horizon < *rc.critical_horizon;
    rep.checks.push_back({"horizon_below_explosion", below,
                          rc.critical_horizon ? "critical horizon " + fmt(*rc.critical_horizon)
                                              : std::string("no critical horizon")});
    if (!below) return rep;

    const double T = params.horizon;
    bool bounded = true;
    bool nonsingular = true;
    double min_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid_n && bounded; ++i) {
        const double t = T * i / grid_n;
        const double omega = omega_hat_closed(t, params);
        for (int j = i; j <= grid_n; ++j) {
            const double s = (j == grid_n) ? T : T * j / grid_n;
            try {
                const AuxQuintuple q = aux_quintuple(t, s, rc, params);
                const double d = 1.0 - 2.0 * q.a * omega;
                min_d = std::min(min_d, d);
                if (!(d > 1e-12)) nonsingular = false;
            } catch (const Error&) {
                bounded = false;
                break;
            }
        }
    }
    rep.checks.push_back({"aux_bounded", bounded, "a, b, c, f, g finite on the (t, s) grid"});

    if (params.p > 0.0) {
        rep.checks.push_back({"singularity_free", nonsingular,
                              "min 1 - 2 a Omega = " + fmt(min_d)});
        const double s = params.sigma_s;
        const double theta = std::max(params.theta0, rep.theta_star);
        const double q = theta + s * params.sigma_mu * params.rho;
        const double p = params.p;
        const double lhs = p * (1.0 + p) / ((1.0 - p) * (1.0 - p));
        const double rhs = params.lambda * params.lambda * std::pow(s, 4) / (4.0 * q * q);
        rep.checks.push_back({"risk_aversion_bound", lhs < rhs,
                              "p(1+p)/(1-p)^2 = " + fmt(lhs) + " vs " + fmt(rhs)});
        const double rhs2 = params.lambda * s * s / (q * q);
        rep.checks.push_back({"tail_growth_bound", 4.0 * k1_bar < rhs2,
                              "4 K1 = " + fmt(4.0 * k1_bar) + " vs " + fmt(rhs2)});
    }
    return rep;
}

AdmissibilityReport check_admissibility(const ModelParams& params, int grid_n) {
    params.validate();
    double k1 = std::numeric_limits<double>::quiet_NaN();
    const RegimeClassification rc = classify_regime(params);
    if (params.p > 0.0 && (!rc.critical_horizon || params.horizon < *rc.critical_horizon)) {
        try {
            k1 = sup_A_on_grid(Model(params), grid_n);
        } catch (const Error&) {
            // leave NaN: tail_growth_bound then fails, and the grid checks name the cause
        }
    }
    return check_admissibility(params, k1, grid_n);
}

}  // namespace habitctl
