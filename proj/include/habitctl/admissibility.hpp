#pragma once

#include <string>
#include <vector>

#include "habitctl/params.hpp"

namespace habitctl {

struct AdmissibilityCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCheck> checks;
    double m0 = 0.0;
    double theta_star = 0.0;
    double k1_bar = 0.0;

    bool admissible() const noexcept;
    /// Names of the failed checks, in order.
    std::vector<std::string> violations() const;
    const AdmissibilityCheck* find(const std::string& name) const noexcept;
};

/// Conditions under which the explicit solution is the value function.
/// k1_bar is the supremum of A(t; s) over the triangular grid (only used for 0 < p < 1).
/// Throws ConfigError if m(0) cannot be computed.
AdmissibilityReport check_admissibility(const ModelParams& params, double k1_bar,
                                        int grid_n = 20);

/// Same, computing k1_bar itself when the horizon is below any critical horizon.
AdmissibilityReport check_admissibility(const ModelParams& params, int grid_n = 20);

}  // namespace habitctl
