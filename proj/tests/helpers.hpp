#pragma once

#include <cmath>
#include <functional>

#include "habitctl/params.hpp"

namespace testing_tuples {

inline double rel_err(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-10); }

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline habitctl::ModelParams tangent_tuple() {
    habitctl::ModelParams p;
    p.p = 0.3;
    p.rho = 0.0;
    p.sigma_mu = 0.2;
    p.theta0 = 0.01;
    return p;
}

// Delta = 0 with gamma2 != 0: root in lambda of gamma2^2 - gamma1 gamma3.
inline habitctl::ModelParams hyperbolic_tuple() {
    habitctl::ModelParams p;
    p.p = 0.3;
    p.sigma_s = 0.3;
    p.sigma_mu = 0.05;
    p.rho = 0.3;
    p.theta0 = 0.01;
    auto disc = [p](double lam) mutable {
        p.lambda = lam;
        return habitctl::classify_regime(p).delta_disc;
    };
    // disc(0) < 0 and disc grows like lambda^2
    p.lambda = bisect(disc, 0.0, 5.0);
    return p;
}

// Delta = 0 and gamma2 = 0 forces sigma_mu = 0 and lambda = 0.
inline habitctl::ModelParams polynomial_tuple() {
    habitctl::ModelParams p;
    p.p = 0.5;
    p.sigma_s = 1.0;
    p.sigma_mu = 0.0;
    p.lambda = 0.0;
    p.theta0 = 0.05;
    return p;
}

}  // namespace testing_tuples
