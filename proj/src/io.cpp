#include "habitctl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "habitctl/errors.hpp"

namespace habitctl {

namespace {

double number(const Json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.get<double>();
}

std::vector<double> number_array(const Json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, key));
    return out;
}

TimeFunction time_function(const Json& j, const std::string& key) {
    if (j.is_number()) return TimeFunction::constant(j.get<double>());
    if (!j.is_object() || j.size() != 1) {
        throw ConfigError("'" + key + "' must be a number, {\"affine\": [a, b]} or {\"grid\": {...}}");
    }
    if (j.contains("affine")) {
        const auto ab = number_array(j.at("affine"), key + ".affine");
        if (ab.size() != 2) throw ConfigError("'" + key + ".affine' needs exactly two numbers");
        return TimeFunction::affine(ab[0], ab[1]);
    }
    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        if (!g.is_object()) throw ConfigError("'" + key + ".grid' must be an object");
        for (const auto& [k, v] : g.items()) {
            if (k != "t" && k != "v") throw ConfigError("unknown key '" + key + ".grid." + k + "'");
        }
        if (!g.contains("t") || !g.contains("v")) throw ConfigError("'" + key + ".grid' needs 't' and 'v'");
        return TimeFunction::grid(number_array(g.at("t"), key + ".grid.t"),
                                  number_array(g.at("v"), key + ".grid.v"));
    }
    throw ConfigError("'" + key + "' has an unknown form");
}

Json time_function_json(const TimeFunction& f) {
    switch (f.kind()) {
    case TimeFunction::Kind::Constant: return f.intercept();
    case TimeFunction::Kind::Affine: return Json{{"affine", {f.intercept(), f.slope()}}};
    case TimeFunction::Kind::Grid: return Json{{"grid", {{"t", f.grid_times()}, {"v", f.grid_values()}}}};
    }
    return nullptr;
}

void dump(const Json& j, std::string& out, int indent, int level) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
    const std::string pad_end = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        out += nl;
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad + Json(k).dump() + (indent > 0 ? ": " : ":");
            dump(v, out, indent, level + 1);
        }
        out += nl + pad_end + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[";
        out += nl;
        bool first = true;
        for (const auto& v : j) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad;
            dump(v, out, indent, level + 1);
        }
        out += nl + pad_end + "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_double(v) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

}  // namespace

ModelParams params_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ModelParams p;
    for (const auto& [key, v] : j.items()) {
        if (key == "sigma_s") p.sigma_s = number(v, key);
        else if (key == "sigma_mu") p.sigma_mu = number(v, key);
        else if (key == "lambda") p.lambda = number(v, key);
        else if (key == "mu_bar") p.mu_bar = number(v, key);
        else if (key == "rho") p.rho = number(v, key);
        else if (key == "p") p.p = number(v, key);
        else if (key == "horizon") p.horizon = number(v, key);
        else if (key == "eta0") p.eta0 = number(v, key);
        else if (key == "theta0") p.theta0 = number(v, key);
        else if (key == "x0") p.x0 = number(v, key);
        else if (key == "z0") p.z0 = number(v, key);
        else if (key == "delta_fn") p.delta_fn = time_function(v, key);
        else if (key == "alpha_fn") p.alpha_fn = time_function(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    p.validate();
    return p;
}

ModelParams parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return params_from_json(j);
}

Json params_to_json(const ModelParams& p) {
    Json j;
    j["sigma_s"] = p.sigma_s;
    j["sigma_mu"] = p.sigma_mu;
    j["lambda"] = p.lambda;
    j["mu_bar"] = p.mu_bar;
    j["rho"] = p.rho;
    j["p"] = p.p;
    j["horizon"] = p.horizon;
    j["eta0"] = p.eta0;
    j["theta0"] = p.theta0;
    j["x0"] = p.x0;
    j["z0"] = p.z0;
    j["delta_fn"] = time_function_json(p.delta_fn);
    j["alpha_fn"] = time_function_json(p.alpha_fn);
    return j;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    // keep it a JSON float
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump(j, out, indent, 0);
    out += "\n";
    return out;
}

Json to_json(const RegimeClassification& rc) {
    Json j;
    j["case"] = std::string(to_string(rc.regime));
    j["delta_disc"] = rc.delta_disc;
    j["gamma1"] = rc.gamma1;
    j["gamma2"] = rc.gamma2;
    j["gamma3"] = rc.gamma3;
    j["xi"] = rc.xi;
    j["xi1"] = rc.xi1;
    j["zeta"] = rc.zeta;
    j["varpi"] = rc.varpi;
    j["critical_horizon"] = rc.critical_horizon ? Json(*rc.critical_horizon) : Json(nullptr);
    return j;
}

Json to_json(const AdmissibilityReport& rep) {
    Json j;
    j["admissible"] = rep.admissible();
    j["m0"] = rep.m0;
    j["theta_star"] = rep.theta_star;
    j["k1_bar"] = rep.k1_bar;
    Json checks = Json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    return j;
}

Json to_json(const VerificationReport& r) {
    Json j;
    j["passed"] = r.passed();
    j["n_paths"] = r.n_paths;
    j["n_steps"] = r.n_steps;
    j["seed"] = r.seed;
    j["v0"] = r.v0;
    j["mc_mean"] = r.mc_mean;
    j["mc_se"] = r.mc_se;
    j["z_score"] = r.z_score;
    Json pert = Json::array();
    for (const auto& p : r.perturbations) {
        pert.push_back({{"policy", p.policy}, {"mean", p.mean}, {"se", p.se}, {"gap", p.gap},
                        {"gap_se", p.gap_se}, {"passed", p.passed}});
    }
    j["perturbations"] = pert;
    j["constraints"] = {{"clamp_events", r.clamp_events}, {"hard_violations", r.hard_violations},
                        {"price_guard_events", r.price_guard_events}, {"min_slack", r.min_slack}};
    Json cps = Json::array();
    for (const auto& c : r.checkpoints) {
        cps.push_back({{"policy", c.policy}, {"times", c.times}, {"mean", c.mean}, {"se", c.se},
                       {"step_mean", c.step_mean}, {"step_se", c.step_se}, {"flat", c.flat},
                       {"nonincreasing", c.nonincreasing}, {"significant_drop", c.significant_drop}});
    }
    j["checkpoints"] = cps;
    Json res = Json::array();
    for (const auto& s : r.residuals) {
        res.push_back({{"name", s.name}, {"h", s.h}, {"max_abs", s.max_abs}, {"ratio", s.ratio},
                       {"negative_control", s.negative_control}, {"passed", s.passed}});
    }
    j["residuals"] = res;
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    return j;
}

VerificationReport report_from_json(const Json& j) {
    VerificationReport r;
    try {
        r.n_paths = j.at("n_paths").get<std::size_t>();
        r.n_steps = j.at("n_steps").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.v0 = j.at("v0").get<double>();
        r.mc_mean = j.at("mc_mean").get<double>();
        r.mc_se = j.at("mc_se").get<double>();
        r.z_score = j.at("z_score").get<double>();
        for (const auto& p : j.at("perturbations")) {
            r.perturbations.push_back({p.at("policy").get<std::string>(), p.at("mean").get<double>(),
                                       p.at("se").get<double>(), p.at("gap").get<double>(),
                                       p.at("gap_se").get<double>(), p.at("passed").get<bool>()});
        }
        const Json& c = j.at("constraints");
        r.clamp_events = c.at("clamp_events").get<std::size_t>();
        r.hard_violations = c.at("hard_violations").get<std::size_t>();
        r.price_guard_events = c.at("price_guard_events").get<std::size_t>();
        r.min_slack = c.at("min_slack").get<double>();
        for (const auto& s : j.at("checkpoints")) {
            CheckpointSeries cs;
            cs.policy = s.at("policy").get<std::string>();
            cs.times = s.at("times").get<std::vector<double>>();
            cs.mean = s.at("mean").get<std::vector<double>>();
            cs.se = s.at("se").get<std::vector<double>>();
            cs.step_mean = s.at("step_mean").get<std::vector<double>>();
            cs.step_se = s.at("step_se").get<std::vector<double>>();
            cs.flat = s.at("flat").get<bool>();
            cs.nonincreasing = s.at("nonincreasing").get<bool>();
            cs.significant_drop = s.at("significant_drop").get<bool>();
            r.checkpoints.push_back(cs);
        }
        for (const auto& s : j.at("residuals")) {
            ConvergenceStudy st;
            st.name = s.at("name").get<std::string>();
            st.h = s.at("h").get<std::vector<double>>();
            st.max_abs = s.at("max_abs").get<std::vector<double>>();
            st.ratio = s.at("ratio").get<double>();
            st.negative_control = s.at("negative_control").get<double>();
            st.passed = s.at("passed").get<bool>();
            r.residuals.push_back(st);
        }
        for (const auto& ch : j.at("checks")) {
            r.checks.push_back({ch.at("name").get<std::string>(), ch.at("passed").get<bool>(),
                                ch.at("detail").get<std::string>()});
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed verification report: ") + e.what());
    }
    return r;
}

void write_paths_csv(std::ostream& os, const std::vector<SimPath>& paths) {
    os << "path,t,S,mu,mu_hat,omega_hat,X,Z,c,pi\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const SimPath& p = paths[i];
        for (Eigen::Index k = 0; k < p.t.size(); ++k) {
            os << i;
            for (double v : {p.t[k], p.S[k], p.mu[k], p.mu_hat[k], p.omega_hat[k], p.X[k], p.Z[k], p.c[k], p.pi[k]}) {
                os << ',' << format_double(v);
            }
            os << '\n';
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace habitctl
