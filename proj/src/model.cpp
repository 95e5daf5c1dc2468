#include "habitctl/model.hpp"

#include "habitctl/errors.hpp"

namespace habitctl {

Model::Model(const ModelParams& p, int panels)
    : params(p), regime((p.validate(), classify_regime(p))), m(p), simpson_panels(panels) {
    if (panels < 2 || panels % 2 != 0) throw ConfigError("Simpson panel count must be even and >= 2");
    require_finite_horizon(regime, params);
}

}  // namespace habitctl
