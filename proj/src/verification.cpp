#include "habitctl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "habitctl/closed_form.hpp"
#include "habitctl/errors.hpp"

namespace habitctl {

bool VerificationReport::passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<PolicySpec> VerifyOptions::default_perturbations() {
    std::vector<PolicySpec> out;
    for (const char* s : {"perturbation:scale_pi=1.5", "perturbation:scale_excess_c=1.1",
                          "perturbation:shift_m=0.25", "perturbation:zero_n_eta",
                          "perturbation:blend=0.8"}) {
        out.push_back(PolicySpec::parse(s));
    }
    return out;
}

std::vector<double> default_n_steps_h() { return {0.02, 0.01}; }
std::vector<double> default_hjb_steps_h() { return {0.0025, 0.00125, 0.000625}; }

CheckpointSeries checkpoint_series(const std::string& label, const Ensemble& ens, double v0) {
    CheckpointSeries cs;
    cs.policy = label;
    cs.times = ens.checkpoint_times;
    const auto np = static_cast<std::size_t>(ens.checkpoint_value.rows());
    const auto K = static_cast<std::size_t>(ens.checkpoint_value.cols());
    cs.flat = true;
    cs.nonincreasing = true;
    for (std::size_t j = 0; j < K; ++j) {
        std::vector<double> lvl(np), step(np);
        for (std::size_t i = 0; i < np; ++i) {
            const double y = ens.checkpoint_value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double prev = j == 0 ? v0
                                       : ens.checkpoint_value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1));
            lvl[i] = y - v0;
            step[i] = y - prev;
        }
        const McEstimate a = mc_estimate(lvl);
        const McEstimate b = mc_estimate(step);
        cs.mean.push_back(a.mean);
        cs.se.push_back(a.se);
        cs.step_mean.push_back(b.mean);
        cs.step_se.push_back(b.se);
        if (!(std::abs(a.mean) < 2.0 * a.se)) cs.flat = false;
        if (!(b.mean < 2.0 * b.se)) cs.nonincreasing = false;
        if (a.mean < -2.0 * a.se) cs.significant_drop = true;
    }
    return cs;
}

namespace {

double ratio_of(const std::vector<double>& v) {
    if (v.size() < 2 || v.back() == 0.0) return 0.0;
    return v[v.size() - 2] / v.back();
}

bool ratio_ok(double r) { return r >= 3.2 && r <= 4.8; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

ConvergenceStudy n_residual_study(const Model& model, const std::vector<double>& hs, bool quick) {
    const ModelParams& p = model.params;
    const Mesh2D mesh = Mesh2D::uniform(0.0, p.horizon, quick ? 5 : 11, p.eta0 - 0.3, p.eta0 + 0.3,
                                        quick ? 3 : 7);
    ConvergenceStudy st;
    st.name = "n_pde_residual";
    st.h = hs;
    for (double h : hs) st.max_abs.push_back(pde_residual_n(mesh, h, model).max_abs);
    st.ratio = ratio_of(st.max_abs);
    st.negative_control =
        pde_residual_n(mesh, hs.back(), model, [&](double t, double eta) { return n_function(t, eta, model) + 1.0; })
            .max_abs;
    st.passed = ratio_ok(st.ratio) && st.max_abs.back() <= 1e-4 && st.negative_control > 1e-2;
    return st;
}

static HjbGrid default_hjb_grid(const Model& model, bool quick) {
    const ModelParams& p = model.params;
    HjbGrid g;
    const int nt = quick ? 3 : 5;
    for (int i = 0; i < nt; ++i) g.t.push_back(p.horizon * i / (nt - 1));
    double mmax = 0.0;
    for (double t : g.t) mmax = std::max(mmax, model.m(t));
    const double zbase = p.z0 > 0.0 ? p.z0 : 1.0;
    g.z = quick ? std::vector<double>{zbase} : std::vector<double>{0.5 * zbase, zbase};
    const double e0 = std::max(p.x0 - model.m(0.0) * p.z0, 0.1 * p.x0);
    const double ztop = g.z.back();
    for (double k : quick ? std::vector<double>{1.0} : std::vector<double>{0.5, 1.0, 2.0}) {
        g.x.push_back(mmax * ztop + k * e0);
    }
    g.eta = quick ? std::vector<double>{p.eta0} : std::vector<double>{p.eta0 - 0.2, p.eta0, p.eta0 + 0.2};
    return g;
}

ConvergenceStudy hjb_residual_study(const Model& model, const std::vector<double>& hs, bool quick) {
    const HjbGrid grid = default_hjb_grid(model, quick);
    ConvergenceStudy st;
    st.name = "hjb_residual";
    st.h = hs;
    for (double h : hs) st.max_abs.push_back(hjb_residual(grid, h, model).max_abs);
    st.ratio = ratio_of(st.max_abs);
    st.negative_control =
        hjb_residual(grid, hs.back(), model, [&](const StateVector& s) { return 1.01 * value_v(s, model); })
            .max_abs;
    st.passed = ratio_ok(st.ratio) && st.max_abs.back() <= 1e-4 && st.negative_control > 1e-2;
    return st;
}

VerificationReport verification_suite(const Model& model, const VerifyOptions& options) {
    const ModelParams& p = model.params;
    SimConfig sim = options.sim;
    if (options.quick) {
        sim.n_paths = std::min<std::size_t>(sim.n_paths, 2000);
        sim.n_steps = std::min(sim.n_steps, 250);
    }
    sim.keep_paths = false;
    sim.validate();

    VerificationReport rep;
    rep.n_paths = sim.n_paths;
    rep.n_steps = sim.n_steps;
    rep.seed = sim.seed;

    const SimEngine engine(model, sim.n_steps);
    rep.v0 = engine.value(0, p.x0, p.z0, p.eta0);

    const Ensemble opt = simulate_paths(make_policy(PolicySpec{}, engine), engine, sim);
    const McEstimate est = mc_estimate(opt.utility, sim.antithetic);
    rep.mc_mean = est.mean;
    rep.mc_se = est.se;
    rep.z_score = (est.mean - rep.v0) / est.se;
    rep.checks.push_back({"mc_matches_value", std::abs(rep.z_score) <= 3.0,
                          "z = " + fmt(rep.z_score)});

    rep.clamp_events = opt.clamp_events;
    rep.hard_violations = opt.hard_violations;
    rep.price_guard_events = opt.price_guard_events;
    rep.min_slack = opt.min_slack;
    rep.checks.push_back({"constraints_hold", opt.hard_violations == 0 && opt.min_slack >= -1e-10 * p.x0,
                          "hard violations " + std::to_string(opt.hard_violations) + ", min slack " +
                              fmt(opt.min_slack)});

    rep.checkpoints.push_back(checkpoint_series("optimal", opt, rep.v0));
    rep.checks.push_back({"optimal_value_process_flat", rep.checkpoints.back().flat,
                          "all checkpoint means within 2 SE of V0"});

    bool all_lower = !options.perturbations.empty();
    bool any_drop = false;
    bool all_nonincreasing = true;
    for (const PolicySpec& spec : options.perturbations) {
        const Ensemble ens = simulate_paths(make_policy(spec, engine), engine, sim);
        PolicyComparison pc;
        pc.policy = spec.label();
        const McEstimate m = mc_estimate(ens.utility, sim.antithetic);
        pc.mean = m.mean;
        pc.se = m.se;
        std::vector<double> diff(sim.n_paths);
        for (std::size_t i = 0; i < sim.n_paths; ++i) diff[i] = opt.utility[i] - ens.utility[i];
        const McEstimate g = mc_estimate(diff, sim.antithetic);
        pc.gap = g.mean;
        pc.gap_se = g.se;
        pc.passed = g.mean > 2.0 * g.se;
        all_lower = all_lower && pc.passed;
        rep.perturbations.push_back(pc);
        rep.checkpoints.push_back(checkpoint_series(pc.policy, ens, rep.v0));
        any_drop = any_drop || rep.checkpoints.back().significant_drop;
        all_nonincreasing = all_nonincreasing && rep.checkpoints.back().nonincreasing;
    }
    rep.checks.push_back({"optimal_beats_perturbations", all_lower,
                          std::to_string(options.perturbations.size()) + " perturbation families, paired gap > 2 SE"});
    rep.checks.push_back({"perturbed_value_process_drops", any_drop && all_nonincreasing,
                          "some perturbation falls below V0 by more than 2 SE; none rises"});

    if (options.residuals) {
        rep.residuals.push_back(n_residual_study(model, default_n_steps_h(), options.quick));
        rep.residuals.push_back(hjb_residual_study(model, default_hjb_steps_h(), options.quick));
        for (const auto& r : rep.residuals) {
            rep.checks.push_back({r.name, r.passed,
                                  "max " + fmt(r.max_abs.back()) + ", ratio " + fmt(r.ratio) +
                                      ", control " + fmt(r.negative_control)});
        }
    }
    return rep;
}

}  // namespace habitctl
