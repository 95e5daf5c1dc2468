#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "habitctl/admissibility.hpp"
#include "habitctl/simulation.hpp"
#include "habitctl/verification.hpp"

namespace habitctl {

using Json = nlohmann::ordered_json;

/// Strict: unknown keys, wrong types and out-of-range values raise ConfigError.
/// Missing keys keep the defaults of ModelParams.
ModelParams params_from_json(const Json& j);
ModelParams parse_config(const std::string& text);
Json params_to_json(const ModelParams& p);

/// Serialise with every double printed as %.17g so values round-trip exactly.
/// Non-finite doubles become null.
std::string dump_json(const Json& j, int indent = 2);

/// %.17g, or "inf"/"-inf"/"nan".
std::string format_double(double v);

Json to_json(const RegimeClassification& rc);
Json to_json(const AdmissibilityReport& rep);
Json to_json(const VerificationReport& rep);
VerificationReport report_from_json(const Json& j);

/// Per-path dump: path, t, S, mu, mu_hat, omega_hat, X, Z, c, pi.
void write_paths_csv(std::ostream& os, const std::vector<SimPath>& paths);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace habitctl
