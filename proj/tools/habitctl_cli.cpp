// habitctl: classify / solve / simulate / verify from a JSON model config.
#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "habitctl/admissibility.hpp"
#include "habitctl/closed_form.hpp"
#include "habitctl/errors.hpp"
#include "habitctl/filtering.hpp"
#include "habitctl/io.hpp"
#include "habitctl/oracle.hpp"
#include "habitctl/simulation.hpp"
#include "habitctl/verification.hpp"

namespace fs = std::filesystem;
using namespace habitctl;

namespace {

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kSchema = 2,
    kInadmissible = 3,
    kExplosion = 4,
    kPolicy = 5,
    kFailedCheck = 6,
};

struct Options {
    std::string config;
    std::string out;
    std::uint64_t seed = 20240611;
    std::size_t paths = 10000;
    int steps = 1000;
    unsigned threads = 0;
    bool oracle = false;
    bool quick = false;
    std::string policy = "optimal";
    std::size_t dump_paths = 0;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) {
        os << "0123456789abcdef"[md[i] >> 4] << "0123456789abcdef"[md[i] & 15];
    }
    return os.str();
}

class Run {
public:
    Run(std::string sub, const Options& o) : sub_(std::move(sub)), opt_(o), start_(std::chrono::steady_clock::now()) {
        raw_ = read_file(o.config);
        params_ = parse_config(raw_);
        if (!o.out.empty()) fs::create_directories(o.out);
    }

    const ModelParams& params() const { return params_; }

    // Writes into --out when given; returns the path written (or empty).
    void artifact(const std::string& name, const std::string& content) {
        if (opt_.out.empty()) return;
        const fs::path p = fs::path(opt_.out) / name;
        write_file(p.string(), content);
        artifacts_.push_back(p.string());
    }

    void finish(bool with_seed) {
        if (opt_.out.empty()) return;
        Json m;
        m["subcommand"] = sub_;
        m["config_path"] = opt_.config;
        m["config_sha256"] = sha256_hex(raw_);
        m["seed"] = with_seed ? Json(opt_.seed) : Json(nullptr);
        m["artifacts"] = artifacts_;
        m["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        m["version"] = HABITCTL_VERSION;
        write_file((fs::path(opt_.out) / "manifest.json").string(), dump_json(m));
    }

private:
    std::string sub_;
    Options opt_;
    std::chrono::steady_clock::time_point start_;
    std::string raw_;
    ModelParams params_;
    std::vector<std::string> artifacts_;
};

void print_admissibility(const AdmissibilityReport& rep) {
    std::cout << "m(0)         " << format_double(rep.m0) << "\n";
    std::cout << "theta*       " << format_double(rep.theta_star) << "\n";
    for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "  ok    " : "  FAIL  ") << c.name << "  (" << c.detail << ")\n";
    }
}

int cmd_classify(const Options& o) {
    Run run("classify", o);
    const ModelParams& p = run.params();
    const RegimeClassification rc = classify_regime(p);
    const AdmissibilityReport rep = check_admissibility(p);

    std::cout << "regime       " << to_string(rc.regime) << "\n";
    std::cout << "delta        " << format_double(rc.delta_disc) << "\n";
    std::cout << "gamma1..3    " << format_double(rc.gamma1) << " " << format_double(rc.gamma2) << " "
              << format_double(rc.gamma3) << "\n";
    std::cout << "critical     " << (rc.critical_horizon ? format_double(*rc.critical_horizon) : "none") << "\n";
    print_admissibility(rep);
    if (!rep.admissible()) {
        std::cout << "inadmissible:";
        for (const auto& v : rep.violations()) std::cout << " " << v;
        std::cout << "\n";
    }

    Json j;
    j["regime"] = to_json(rc);
    j["admissibility"] = to_json(rep);
    run.artifact("classify.json", dump_json(j));
    run.finish(false);
    return rep.admissible() ? kOk : kInadmissible;
}

double rel_err(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-10); }

int cmd_solve(const Options& o) {
    Run run("solve", o);
    const Model model(run.params());
    const ModelParams& p = model.params;
    const double T = p.horizon;
    const int nt = o.quick ? 6 : 21;
    const int ne = o.quick ? 5 : 11;

    std::ostringstream grid;
    grid << "t,s,eta,quantity,value\n";
    auto row = [&](double t, double s, double eta, const char* q, double v) {
        grid << format_double(t) << ',' << format_double(s) << ',' << format_double(eta) << ',' << q << ','
             << format_double(v) << '\n';
    };
    auto tnode = [&](int i, int n) { return i == n - 1 ? T : T * i / (n - 1); };
    for (int i = 0; i < nt; ++i) {
        const double t = tnode(i, nt);
        row(t, t, 0.0, "m", model.m(t));
        row(t, t, 0.0, "omega_hat", omega_hat_closed(t, p));
    }
    for (int i = 0; i < nt; ++i) {
        for (int j = i; j < nt; ++j) {
            const double t = tnode(i, nt), s = tnode(j, nt);
            const AbcTriple c = abc(t, s, model);
            row(t, s, 0.0, "A", c.A);
            row(t, s, 0.0, "B", c.B);
            row(t, s, 0.0, "C", c.C);
        }
    }
    double n_at_T = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double t = tnode(i, nt);
        const NSlice slice(t, model);
        for (int k = 0; k < ne; ++k) {
            const double eta = p.eta0 - 0.5 + 1.0 * k / (ne - 1);
            const NValue v = slice(eta);
            row(t, t, eta, "N", v.n);
            row(t, t, eta, "N_eta", v.n_eta);
            if (i == nt - 1) n_at_T = std::max(n_at_T, std::abs(v.n - 1.0));
        }
    }
    run.artifact("solve_grid.csv", grid.str());

    Json summary;
    summary["regime"] = std::string(to_string(model.regime.regime));
    summary["m0"] = model.m(0.0);
    summary["m_T"] = model.m(T);
    summary["max_abs_N_T_minus_1"] = n_at_T;

    if (o.oracle) {
        std::ostringstream csv;
        csv << "t,s,quantity,closed_form,oracle,rel_err\n";
        Json worst = Json::object();
        auto cmp = [&](double t, double s, const std::string& q, double cf, double orc) {
            const double e = rel_err(cf, orc);
            csv << format_double(t) << ',' << format_double(s) << ',' << q << ',' << format_double(cf) << ','
                << format_double(orc) << ',' << format_double(e) << '\n';
            worst[q] = std::max(worst.value(q, 0.0), e);
        };
        const int n = o.quick ? 6 : 20;
        std::vector<double> ts(n);
        for (int i = 0; i < n; ++i) ts[i] = tnode(i, n);
        const auto om = oracle::rk4_omega(ts, p);
        for (int i = 0; i < n; ++i) {
            cmp(ts[i], ts[i], "omega_hat", omega_hat_closed(ts[i], p), om[i]);
            cmp(ts[i], T, "m", model.m(ts[i]), oracle::m_adaptive(ts[i], p));
        }
        const auto aux = oracle::rk4_aux(ts, p);
        for (int i = 0; i < n; ++i) {
            const AuxQuintuple q = aux_quintuple(0.0, ts[i], model.regime, p);
            cmp(0.0, ts[i], "a", q.a, aux[i].a);
            cmp(0.0, ts[i], "b", q.b, aux[i].b);
            cmp(0.0, ts[i], "c", q.c, aux[i].c);
            cmp(0.0, ts[i], "f", q.f, aux[i].f);
            cmp(0.0, ts[i], "g", q.g, aux[i].g);
        }
        for (int j = 0; j < n; ++j) {
            std::vector<double> back;
            for (int i = j; i >= 0; --i) back.push_back(ts[i]);
            const auto r = oracle::rk4_abc(ts[j], back, p);
            for (std::size_t k = 0; k < back.size(); ++k) {
                const AbcTriple c = abc(back[k], ts[j], model);
                cmp(back[k], ts[j], "A", c.A, r[k].A);
                cmp(back[k], ts[j], "B", c.B, r[k].B);
                cmp(back[k], ts[j], "C", c.C, r[k].C);
            }
        }
        run.artifact("oracle.csv", csv.str());
        double mx = 0.0;
        for (const auto& [k, v] : worst.items()) mx = std::max(mx, v.get<double>());
        summary["oracle_max_rel_err"] = worst;
        summary["oracle_max_rel_err_all"] = mx;
    }
    const std::string js = dump_json(summary);
    std::cout << js;
    run.artifact("solve_summary.json", js);
    run.finish(false);
    return kOk;
}

SimConfig sim_config(const Options& o) {
    SimConfig s;
    s.n_paths = o.paths;
    s.n_steps = o.steps;
    s.seed = o.seed;
    s.threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    s.keep_paths = o.dump_paths > 0;
    s.checkpoints = 0;
    s.validate();
    return s;
}

int gate(const ModelParams& p) {
    const AdmissibilityReport rep = check_admissibility(p);
    if (rep.admissible()) return kOk;
    print_admissibility(rep);
    const auto* ex = rep.find("horizon_below_explosion");
    std::cerr << "habitctl: inadmissible parameters\n";
    return (ex && !ex->passed) ? kExplosion : kInadmissible;
}

int cmd_simulate(const Options& o) {
    Run run("simulate", o);
    const PolicySpec spec = PolicySpec::parse(o.policy);
    const ModelParams& p = run.params();
    if (int g = gate(p); g != kOk) return g;
    const Model model(p);
    SimConfig sim = sim_config(o);
    const SimEngine engine(model, sim.n_steps);
    if (o.dump_paths > 0) sim.keep_paths = true;

    const Ensemble ens = simulate_paths(make_policy(spec, engine), engine, sim);
    const McEstimate est = mc_estimate(ens.utility, sim.antithetic);
    const double v0 = engine.value(0, p.x0, p.z0, p.eta0);

    Json j;
    j["policy"] = spec.label();
    j["n_paths"] = sim.n_paths;
    j["n_steps"] = sim.n_steps;
    j["seed"] = sim.seed;
    if (est.degenerate) {
        j["mean_utility"] = "-inf (degenerate)";
        j["se"] = nullptr;
        j["z_score"] = nullptr;
    } else {
        j["mean_utility"] = est.mean;
        j["se"] = est.se;
        j["z_score"] = (est.mean - v0) / est.se;
    }
    j["v0"] = v0;
    j["clamp_events"] = ens.clamp_events;
    j["hard_violations"] = ens.hard_violations;
    j["price_guard_events"] = ens.price_guard_events;
    j["min_slack"] = ens.min_slack;
    const std::string js = dump_json(j);
    std::cout << js;
    run.artifact("simulate_summary.json", js);
    if (o.dump_paths > 0) {
        std::ostringstream csv;
        const std::vector<SimPath> head(ens.paths.begin(),
                                        ens.paths.begin() + static_cast<std::ptrdiff_t>(std::min(o.dump_paths, ens.paths.size())));
        write_paths_csv(csv, head);
        run.artifact("paths.csv", csv.str());
    }
    run.finish(true);
    return kOk;
}

int cmd_verify(const Options& o) {
    Run run("verify", o);
    const ModelParams& p = run.params();
    if (int g = gate(p); g != kOk) return g;
    const Model model(p);
    VerifyOptions vo;
    vo.sim = sim_config(o);
    vo.sim.checkpoints = 5;
    vo.quick = o.quick;
    const VerificationReport rep = verification_suite(model, vo);
    const std::string js = dump_json(to_json(rep));
    std::cout << js;
    run.artifact("verification_report.json", js);
    run.finish(true);
    for (const auto& c : rep.checks) {
        std::cerr << (c.passed ? "ok    " : "FAIL  ") << c.name << "  " << c.detail << "\n";
    }
    return rep.passed() ? kOk : kFailedCheck;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal consumption and investment with addictive habits under a hidden drift"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HABITCTL_VERSION);
    Options o;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--config", o.config, "model config (JSON)")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", o.out, "directory for output files and the run manifest");
    };
    auto add_sim = [&](CLI::App* sc) {
        sc->add_option("--seed", o.seed, "master seed");
        sc->add_option("--paths", o.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
        sc->add_option("--steps", o.steps, "time steps per path")->check(CLI::Range(2, 100000000));
        sc->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    };

    auto* classify = app.add_subcommand("classify", "regime, critical horizon and admissibility");
    add_common(classify);
    auto* solve = app.add_subcommand("solve", "m, Omega, A/B/C and N on grids");
    add_common(solve);
    solve->add_flag("--oracle", o.oracle, "compare against RK4 / adaptive quadrature oracles");
    solve->add_flag("--quick", o.quick, "coarser grids");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo expected utility of a policy");
    add_common(simulate);
    add_sim(simulate);
    simulate->add_option("--policy", o.policy, "optimal | subsistence | perturbation:<name>[=<value>]");
    simulate->add_option("--dump-paths", o.dump_paths, "write the first N paths to paths.csv");
    auto* verify = app.add_subcommand("verify", "full verification report");
    add_common(verify);
    add_sim(verify);
    verify->add_flag("--quick", o.quick, "fewer paths and smaller residual meshes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kSchema;
    }

    try {
        if (*classify) return cmd_classify(o);
        if (*solve) return cmd_solve(o);
        if (*simulate) return cmd_simulate(o);
        if (*verify) return cmd_verify(o);
    } catch (const ConfigError& e) {
        std::cerr << "habitctl: config error: " << e.what() << "\n";
        return kSchema;
    } catch (const ExplosionError& e) {
        std::cerr << "habitctl: " << e.what() << " (t = " << e.t() << ", s = " << e.s() << ")\n";
        return kExplosion;
    } catch (const SingularityError& e) {
        std::cerr << "habitctl: " << e.what() << " (t = " << e.t() << ", s = " << e.s() << ")\n";
        return kExplosion;
    } catch (const PolicyError& e) {
        std::cerr << "habitctl: policy error: " << e.what() << "\n";
        return kPolicy;
    } catch (const std::exception& e) {
        std::cerr << "habitctl: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
