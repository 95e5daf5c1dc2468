#include "habitctl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"

namespace habitctl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Neumaier compensated sum
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
        else comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
    if (n_steps < 2) throw ConfigError("n_steps must be >= 2");
    if (antithetic && n_paths % 2 != 0) throw ConfigError("antithetic sampling needs an even path count");
    if (checkpoints < 0 || checkpoints > n_steps) throw ConfigError("bad checkpoint count");
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                      static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed ^ splitmix64(index)) >> 32),
                      static_cast<std::uint32_t>(splitmix64(seed ^ splitmix64(index)))};
    return std::mt19937_64(seq);
}

PathNoise draw_noise(std::mt19937_64& rng, int n_steps, double h, double lambda) {
    std::normal_distribution<double> nd(0.0, 1.0);
    const double lh = lambda * h;
    const double var_i = lh > 0.0 ? -std::expm1(-2.0 * lh) / (2.0 * lambda) : h;
    const double cov = lh > 0.0 ? -std::expm1(-lh) / lambda : h;
    const double resid = std::sqrt(std::max(var_i - cov * cov / h, 0.0));
    const double sh = std::sqrt(h);

    PathNoise n;
    n.h = h;
    n.mu0 = nd(rng);
    n.dB.resize(n_steps);
    n.ou.resize(n_steps);
    n.dWp.resize(n_steps);
    for (int k = 0; k < n_steps; ++k) {
        const double z1 = nd(rng);
        const double z2 = nd(rng);
        const double z3 = nd(rng);
        n.dB[k] = sh * z1;
        n.ou[k] = cov / h * n.dB[k] + resid * z2;
        n.dWp[k] = sh * z3;
    }
    return n;
}

PathNoise PathNoise::coarsen(double lambda) const {
    if (steps() % 2 != 0) throw DomainError("coarsen: odd step count");
    PathNoise c;
    c.h = 2.0 * h;
    c.mu0 = mu0;
    const double decay = std::exp(-lambda * h);
    for (std::size_t k = 0; k < steps(); k += 2) {
        c.dB.push_back(dB[k] + dB[k + 1]);
        c.ou.push_back(decay * ou[k] + ou[k + 1]);
        c.dWp.push_back(dWp[k] + dWp[k + 1]);
    }
    return c;
}

PathNoise PathNoise::negated() const {
    PathNoise c = *this;
    c.mu0 = -mu0;
    for (auto* v : {&c.dB, &c.ou, &c.dWp}) {
        for (double& x : *v) x = -x;
    }
    return c;
}

SimEngine::SimEngine(const Model& model, int n_steps)
    : model_(&model), n_steps_(n_steps), dt_(model.params.horizon / n_steps),
      surface_(NSurface::for_simulation(model, n_steps)) {
    const ModelParams& p = model.params;
    t_ = surface_.times();
    for (double t : t_) {
        const double m = model.m(t);
        const double om = omega_hat_closed(t, p);
        m_.push_back(m);
        dm_.push_back(p.delta_fn(t) * m);
        omega_.push_back(om);
        g_.push_back(om + p.sigma_s * p.sigma_mu * p.rho);
        delta_.push_back(p.delta_fn(t));
        alpha_.push_back(p.alpha_fn(t));
    }
}

PolicyInputs SimEngine::inputs(std::size_t k, double eta) const {
    PolicyInputs in;
    in.m = m_[k];
    in.delta_m = dm_[k];
    in.g = g_[k];
    in.n = surface_.at(k, eta);
    return in;
}

double SimEngine::value(std::size_t k, double x, double z, double eta) const {
    PolicyInputs in;
    in.m = m_[k];
    in.n = surface_.at(k, eta);
    return value_from({t_[k], x, z, eta}, model_->params, in);
}

PolicySpec PolicySpec::parse(const std::string& text) {
    PolicySpec s;
    if (text == "optimal") return s;
    if (text == "subsistence") {
        s.kind = Kind::Subsistence;
        return s;
    }
    const std::string prefix = "perturbation:";
    if (text.rfind(prefix, 0) != 0) throw ConfigError("unknown policy '" + text + "'");
    std::string body = text.substr(prefix.size());
    std::string name = body;
    std::optional<double> value;
    if (const auto eq = body.find('='); eq != std::string::npos) {
        name = body.substr(0, eq);
        try {
            std::size_t used = 0;
            value = std::stod(body.substr(eq + 1), &used);
            if (used != body.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("bad perturbation value in '" + text + "'");
        }
    }
    if (name == "scale_pi") {
        s.kind = Kind::ScalePi;
        s.param = value.value_or(1.5);
    } else if (name == "scale_excess_c") {
        s.kind = Kind::ScaleExcessConsumption;
        s.param = value.value_or(1.1);
    } else if (name == "shift_m") {
        s.kind = Kind::ShiftM;
        s.param = value.value_or(0.25);
    } else if (name == "zero_n_eta") {
        s.kind = Kind::ZeroNEta;
    } else if (name == "blend") {
        s.kind = Kind::Blend;
        s.param = value.value_or(0.8);
    } else {
        throw ConfigError("unknown perturbation '" + name + "'");
    }
    if (!std::isfinite(s.param)) throw ConfigError("perturbation value must be finite");
    if ((s.kind == Kind::ScaleExcessConsumption || s.kind == Kind::Blend) && s.param < 0.0) {
        throw ConfigError("perturbation value must be >= 0");
    }
    return s;
}

std::string PolicySpec::label() const {
    std::ostringstream os;
    os.precision(6);
    switch (kind) {
    case Kind::Optimal: return "optimal";
    case Kind::Subsistence: return "subsistence";
    case Kind::ScalePi: os << "perturbation:scale_pi=" << param; break;
    case Kind::ScaleExcessConsumption: os << "perturbation:scale_excess_c=" << param; break;
    case Kind::ShiftM: os << "perturbation:shift_m=" << param; break;
    case Kind::ZeroNEta: return "perturbation:zero_n_eta";
    case Kind::Blend: os << "perturbation:blend=" << param; break;
    }
    return os.str();
}

FeedbackPolicy make_policy(const PolicySpec& spec, const SimEngine& engine) {
    const SimEngine* e = &engine;
    const ModelParams* pr = &engine.model().params;
    auto optimal = [e, pr](std::size_t k, const StateVector& s) {
        return optimal_policy(s, *pr, e->inputs(k, s.eta));
    };
    const double f = spec.param;
    switch (spec.kind) {
    case PolicySpec::Kind::Optimal:
        return optimal;
    case PolicySpec::Kind::Subsistence:
        return [](std::size_t, const StateVector& s) { return PolicyPair{0.0, s.z}; };
    case PolicySpec::Kind::ScalePi:
        return [optimal, f](std::size_t k, const StateVector& s) {
            PolicyPair u = optimal(k, s);
            u.pi *= f;
            return u;
        };
    case PolicySpec::Kind::ScaleExcessConsumption:
        return [optimal, f](std::size_t k, const StateVector& s) {
            PolicyPair u = optimal(k, s);
            u.c = s.z + f * (u.c - s.z);
            return u;
        };
    case PolicySpec::Kind::Blend:
        return [optimal, f](std::size_t k, const StateVector& s) {
            PolicyPair u = optimal(k, s);
            u.pi *= f;
            u.c = s.z + f * (u.c - s.z);
            return u;
        };
    case PolicySpec::Kind::ZeroNEta:
        return [optimal, e, pr](std::size_t k, const StateVector& s) {
            PolicyPair u = optimal(k, s);
            const double s2 = pr->sigma_s * pr->sigma_s;
            u.pi = s.eta / ((1.0 - pr->p) * s2) * (s.x - e->m(k) * s.z);
            return u;
        };
    case PolicySpec::Kind::ShiftM:
        return [e, pr, f](std::size_t k, const StateVector& s) {
            PolicyInputs in = e->inputs(k, s.eta);
            in.m = e->model().m(std::max(s.t - f, 0.0));
            in.delta_m = pr->delta_fn(s.t) * in.m;
            // below the shifted reserve: invest nothing, consume the habit
            if (s.x < in.m * s.z) return PolicyPair{0.0, s.z};
            return optimal_policy(s, *pr, in);
        };
    }
    throw ConfigError("unhandled policy kind");
}

void simulate_path(const PathNoise& noise, const FeedbackPolicy& policy, const SimEngine& engine,
                   SimPath& out, bool record, Ensemble* counters, double* checkpoint_row,
                   int checkpoints) {
    const ModelParams& pr = engine.model().params;
    const int n = engine.n_steps();
    if (static_cast<int>(noise.steps()) != n || std::abs(noise.h - engine.dt()) > 1e-12 * engine.dt()) {
        throw DomainError("simulate_path: noise grid does not match the engine grid");
    }
    const double h = engine.dt();
    const double p = pr.p;
    const double sS = pr.sigma_s;
    const double decay = std::exp(-pr.lambda * h);
    const double rho_c = std::sqrt(std::max(1.0 - pr.rho * pr.rho, 0.0));
    const double tol = 1e-10 * pr.x0;

    double S = 1.0;
    double mu = pr.eta0 + std::sqrt(pr.theta0) * noise.mu0;
    double mu_hat = pr.eta0;
    double X = pr.x0;
    double Z = pr.z0;
    KahanSum util;

    if (record) {
        for (auto* v : {&out.t, &out.S, &out.mu, &out.mu_hat, &out.omega_hat, &out.X, &out.Z, &out.c, &out.pi}) {
            v->resize(n + 1);
        }
        out.dw_hat.resize(n);
    }
    int next_cp = 1;
    auto cp_index = [&](int j) {
        return static_cast<int>(std::lround(static_cast<double>(n) * j / checkpoints));
    };

    for (int k = 0;; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double t = engine.time(ku);
        if (checkpoint_row && next_cp <= checkpoints && cp_index(next_cp) == k) {
            const double v = (k == n) ? std::pow(X, p) / p : engine.value(ku, X, Z, mu_hat);
            checkpoint_row[next_cp - 1] = util.value() + v;
            ++next_cp;
        }
        PolicyPair u{0.0, Z};
        const bool last = (k == n);
        if (!last || record) {
            u = policy(ku, {t, X, Z, mu_hat});
            if (!std::isfinite(u.pi) || !std::isfinite(u.c)) throw PolicyError("policy returned a non-finite control");
            if (u.c < Z) throw PolicyError("policy returned c < Z");
        }
        if (record) {
            out.t[k] = t;
            out.S[k] = S;
            out.mu[k] = mu;
            out.mu_hat[k] = mu_hat;
            out.omega_hat[k] = engine.omega(ku);
            out.X[k] = X;
            out.Z[k] = Z;
            out.c[k] = u.c;
            out.pi[k] = u.pi;
        }
        if (last) break;

        if (counters) counters->min_slack = std::min(counters->min_slack, u.c - Z);
        util.add(std::pow(u.c - Z, p) / p * h);

        const double dW = pr.rho * noise.dB[ku] + rho_c * noise.dWp[ku];
        double r = mu * h + sS * dW;
        if (1.0 + r <= 0.0) {
            if (counters) ++counters->price_guard_events;
            r = -1.0 + 1e-12;
        }
        if (record) out.dw_hat[k] = (r - mu_hat * h) / sS;
        S *= 1.0 + r;

        const double gain = (engine.omega(ku) + sS * pr.sigma_mu * pr.rho) / (sS * sS);
        mu_hat += (-(pr.lambda + gain) * mu_hat + pr.lambda * pr.mu_bar) * h + gain * r;
        mu = pr.mu_bar + (mu - pr.mu_bar) * decay + pr.sigma_mu * noise.ou[ku];

        X += u.pi * r - u.c * h;
        Z += (engine.delta(ku) * u.c - engine.alpha(ku) * Z) * h;

        const double floor = engine.m(ku + 1) * Z;
        const double slack = X - floor;
        if (counters) counters->min_slack = std::min(counters->min_slack, slack);
        if (slack < 0.0) {
            if (counters) {
                ++counters->clamp_events;
                if (slack < -tol) ++counters->hard_violations;
            }
            X = floor;
        }
    }
    util.add(std::pow(X, p) / p);
    out.utility = util.value();
}

Ensemble simulate_paths(const FeedbackPolicy& policy, const SimEngine& engine, const SimConfig& sim) {
    sim.validate();
    if (sim.n_steps != engine.n_steps()) throw ConfigError("SimConfig steps differ from the engine grid");
    const ModelParams& pr = engine.model().params;
    const std::size_t np = sim.n_paths;
    const int K = sim.checkpoints;

    Ensemble ens;
    ens.utility.assign(np, 0.0);
    ens.checkpoint_value = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np), K);
    for (int j = 1; j <= K; ++j) {
        ens.checkpoint_times.push_back(
            engine.time(static_cast<std::size_t>(std::lround(static_cast<double>(sim.n_steps) * j / K))));
    }
    if (sim.keep_paths) ens.paths.resize(np);

    const unsigned nt = std::max(1u, std::min<unsigned>(sim.threads, static_cast<unsigned>(np)));
    std::vector<Ensemble> partial(nt);
    std::vector<std::exception_ptr> errors(nt);

    auto work = [&](unsigned w) {
        try {
            Eigen::VectorXd row(K);
            const std::size_t lo = np * w / nt;
            const std::size_t hi = np * (w + 1) / nt;
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint64_t stream = sim.antithetic ? i / 2 : i;
                std::mt19937_64 rng = path_rng(sim.seed, stream);
                PathNoise noise = draw_noise(rng, sim.n_steps, engine.dt(), pr.lambda);
                if (sim.antithetic && i % 2 == 1) noise = noise.negated();
                SimPath tmp;
                SimPath& path = sim.keep_paths ? ens.paths[i] : tmp;
                simulate_path(noise, policy, engine, path, sim.keep_paths, &partial[w],
                              K > 0 ? row.data() : nullptr, K);
                ens.utility[i] = path.utility;
                if (K > 0) ens.checkpoint_value.row(static_cast<Eigen::Index>(i)) = row.transpose();
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nt; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (const auto& part : partial) {
        ens.clamp_events += part.clamp_events;
        ens.hard_violations += part.hard_violations;
        ens.price_guard_events += part.price_guard_events;
        ens.min_slack = std::min(ens.min_slack, part.min_slack);
    }
    ens.degenerate = std::any_of(ens.utility.begin(), ens.utility.end(),
                                 [](double u) { return !std::isfinite(u); });
    return ens;
}

McEstimate mc_estimate(const std::vector<double>& samples, bool antithetic) {
    std::vector<double> x;
    if (antithetic) {
        for (std::size_t i = 0; i + 1 < samples.size(); i += 2) x.push_back(0.5 * (samples[i] + samples[i + 1]));
    } else {
        x = samples;
    }
    McEstimate est;
    est.n = x.size();
    if (x.empty()) return est;
    for (double v : x) {
        if (!std::isfinite(v)) {
            est.degenerate = true;
            est.mean = -std::numeric_limits<double>::infinity();
            est.se = std::numeric_limits<double>::quiet_NaN();
            return est;
        }
    }
    KahanSum s;
    for (double v : x) s.add(v);
    est.mean = s.value() / static_cast<double>(x.size());
    KahanSum ss;
    for (double v : x) ss.add((v - est.mean) * (v - est.mean));
    est.se = x.size() > 1 ? std::sqrt(ss.value() / static_cast<double>(x.size() - 1) / static_cast<double>(x.size())) : 0.0;
    return est;
}

McEstimate mc_value(const FeedbackPolicy& policy, const SimEngine& engine, const SimConfig& sim) {
    SimConfig s = sim;
    s.checkpoints = 0;
    s.keep_paths = false;
    return mc_estimate(simulate_paths(policy, engine, s).utility, sim.antithetic);
}

McEstimate mc_value(const PolicySpec& spec, const ModelParams& params, const SimConfig& sim) {
    const Model model(params);
    const SimEngine engine(model, sim.n_steps);
    return mc_value(make_policy(spec, engine), engine, sim);
}

}  // namespace habitctl
