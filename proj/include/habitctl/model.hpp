#pragma once

#include "habitctl/params.hpp"
#include "habitctl/subsistence.hpp"

namespace habitctl {

/// Validated parameters plus the derived objects every evaluation needs.
/// Construction rejects horizons at or past the critical horizon.
struct Model {
    explicit Model(const ModelParams& p, int simpson_panels = 400);

    ModelParams params;
    RegimeClassification regime;
    SubsistenceCost m;
    int simpson_panels;
};

}  // namespace habitctl
