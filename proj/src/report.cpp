#include "bowenlab/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bowenlab/bowen.hpp"
#include "bowenlab/csv.hpp"
#include "bowenlab/errors.hpp"
#include "bowenlab/linearization.hpp"
#include "bowenlab/parallel.hpp"
#include "bowenlab/splitting.hpp"

namespace bowenlab {

namespace {

using nlohmann::json;

const std::set<std::string> kSuites = {"linearize", "distortion", "spectrum", "splitting",
                                       "full"};

// Pinching constant each shipped system is checked against.
double default_alpha(const SystemModel& system) {
    const std::string& n = system.name();
    if (n.rfind("pcat", 0) == 0) return 0.5;
    if (n.rfind("solenoid", 0) == 0) return 0.6;
    return 0.9;
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

struct SuiteFiles {
    std::map<std::string, std::string> csv; // filename -> contents
};

// ---------------------------------------------------------------------------

void suite_linearize(const RunConfig& cfg, const SystemPtr& system,
                     const LambdaSample& sample, RunReport& rep, SuiteFiles& files) {
    const ChartOptions opts;
    const PinchConstants pc =
        calibrate_pinch(system, sample, std::min(cfg.centers, 8), cfg.horizon, opts);
    const SystemPtr blocked = make_blocked(system, pc.t0_blocks);
    const bool linear = pc.D <= 1e-8;

    const auto cix = draw_centers(sample, cfg.centers, cfg.seed ^ 0x4c696eULL);
    const int m = system->unstable_dim();
    std::vector<Vec> dirs;
    {
        Vec d = Vec::Zero(m);
        d[0] = 1.0;
        dirs.push_back(d);
        if (m > 1) {
            Vec e = Vec::Zero(m);
            e[1] = 1.0;
            dirs.push_back(e);
            dirs.push_back(Vec((d + e) / std::sqrt(2.0)));
        }
    }
    std::vector<Vec> probes;
    for (double frac : {0.125, 0.25, 0.5})
        for (const Vec& d : dirs) probes.push_back(Vec(d * (frac * pc.eps2)));

    struct CenterOut {
        LinearizationState st;
        double max_conj = 0.0;
        double max_identity_gap = 0.0;
        double max_l_norm = 0.0;
        double max_l_excess = 0.0; // ||L - I|| - C1_hat ||xi||
    };
    std::vector<CenterOut> outs(cix.size());
    parallel_for(cix.size(), [&](std::size_t c) {
        ChartOrbit orbit(blocked, sample.point(cix[c]), cfg.p_max + 2, 1, opts);
        CenterOut& co = outs[c];
        co.st = run_linearization(orbit, probes, cfg.p_max, pc);
        for (const Vec& u : probes) {
            co.max_conj = std::max(co.max_conj,
                                   conjugacy_residual(orbit, u, cfg.p_max, 1, pc));
            if (linear) {
                const Vec f = F_p(orbit, u, cfg.p_max, pc);
                co.max_identity_gap = std::max(co.max_identity_gap, (f - u).norm());
            }
            const Mat l = L_operator(orbit, Vec(u / 2.0), cfg.p_max, pc);
            co.max_l_norm = std::max(co.max_l_norm, operator_norm(l));
            const Mat li = l - Mat::Identity(m, m);
            co.max_l_excess = std::max(co.max_l_excess, operator_norm(li));
        }
    });

    CsvWriter csv({"system", "center_ix", "probe_ix", "p", "u_norm", "f_norm", "increment"});
    for (std::size_t c = 0; c < cix.size(); ++c) {
        const LinearizationState& st = outs[c].st;
        for (std::size_t i = 0; i < st.probes.size(); ++i)
            for (int p = 1; p <= st.order; ++p) {
                const double inc =
                    p < st.order ? st.increments[i][static_cast<std::size_t>(p - 1)] : 0.0;
                csv.row({cfg.system_name, std::to_string(cix[c]), std::to_string(i),
                         std::to_string(p), format_double(st.probes[i].norm()),
                         format_double(st.values[i][static_cast<std::size_t>(p - 1)].norm()),
                         format_double(inc)});
            }
    }
    files.csv["linearize.csv"] = csv.text();

    double max_conj = 0.0, max_id = 0.0, max_l = 0.0, max_lex = 0.0, gmax = 0.0;
    for (const CenterOut& co : outs) {
        max_conj = std::max(max_conj, co.max_conj);
        max_id = std::max(max_id, co.max_identity_gap);
        max_l = std::max(max_l, co.max_l_norm);
        max_lex = std::max(max_lex, co.max_l_excess);
        gmax = std::max(gmax, co.st.gamma_hat);
    }
    const double c1_hat = 10.0 * pc.D / (1.0 - (gmax < 1.0 ? gmax : 0.0));
    rep.metrics["gamma"] = pc.gamma;
    rep.metrics["gamma_hat"] = gmax;
    rep.metrics["eps2"] = pc.eps2;
    rep.metrics["taylor_D"] = pc.D;
    rep.metrics["block_exponent"] = pc.t0_blocks;
    rep.metrics["conjugacy_residual_max"] = max_conj;
    rep.metrics["L_norm_max"] = max_l;
    rep.verdicts["conjugacy_limit"] = pass_fail(max_conj <= (linear ? 1e-10 : 1e-6));
    rep.verdicts["L_norm_bound"] = pass_fail(max_l <= 2.1);
    if (linear) {
        rep.verdicts["identity_degeneracy"] = pass_fail(max_id <= 1e-10);
        rep.verdicts["L_identity"] = pass_fail(max_lex <= 1e-10);
    } else {
        rep.verdicts["gamma_fit"] = pass_fail(gmax > 0.0 && gmax <= 0.95);
        const double bound = c1_hat * pc.eps2 / 2.0 + 1e-9;
        rep.verdicts["L_minus_I"] = pass_fail(max_lex <= bound);
    }
}

// ---------------------------------------------------------------------------

void suite_distortion(const RunConfig& cfg, const SystemPtr& system,
                      const LambdaSample& sample, RunReport& rep, SuiteFiles& files) {
    const ChartOptions opts;
    const DistortionResult res = distortion_R(system, sample, cfg.delta, cfg.eps, cfg.p_max,
                                              cfg.centers, cfg.seed, opts);
    CsvWriter csv({"system", "center_ix", "p", "eps", "delta", "diam_eps", "diam_delta",
                   "ratio", "ell_eps", "ell_delta", "defined"});
    for (const DistortionRow& r : res.rows)
        csv.row({cfg.system_name, std::to_string(r.center_ix), std::to_string(r.p),
                 format_double(r.eps), format_double(r.delta), format_double(r.diam_eps),
                 format_double(r.diam_delta), format_double(r.ratio),
                 format_double(r.ell_eps), format_double(r.ell_delta),
                 r.defined ? "1" : "0"});
    files.csv["distortion.csv"] = csv.text();

    double early = 0.0, late = 0.0;
    const int mid = cfg.p_max / 2;
    for (const DistortionRow& r : res.rows) {
        if (!r.defined || r.p < 1) continue;
        if (r.p <= mid)
            early = std::max(early, r.ratio);
        else
            late = std::max(late, r.ratio);
    }
    rep.metrics["R_hat"] = res.R_hat;
    rep.metrics["coverage"] = res.coverage;
    rep.metrics["ratio_early_max"] = early;
    rep.metrics["ratio_late_max"] = late;
    rep.verdicts["coverage"] = pass_fail(res.coverage >= 0.8);
    rep.verdicts["ratio_stability"] = pass_fail(early > 0.0 && late <= 1.5 * early);
    if (system->known_rates() && system->unstable_dim() == 1) {
        const double oracle = cfg.eps / cfg.delta;
        rep.verdicts["ratio_matches_linear_oracle"] =
            pass_fail(std::fabs(res.R_hat - oracle) <= 0.03 * oracle);
    }

    std::vector<double> grid;
    for (int j = 1; j <= 16; ++j) grid.push_back(cfg.eps * std::pow(0.8, j));
    const ShrinkResult sh = shrink_delta(system, sample, cfg.eps, cfg.rho, grid, cfg.p_max,
                                         cfg.centers, cfg.seed, opts);
    rep.metrics["shrink_delta"] = sh.delta;
    rep.verdicts["shrink_delta_found"] = sh.warned ? "warn" : "pass";
}

// ---------------------------------------------------------------------------

void suite_spectrum(const RunConfig& cfg, const SystemPtr& system,
                    const LambdaSample& sample, RunReport& rep, SuiteFiles& files) {
    const double alpha_cfg = default_alpha(*system);
    const auto rows = pinching_report(system, sample, cfg.horizon, cfg.centers, alpha_cfg);
    CsvWriter csv({"system", "center_ix", "alpha_hat", "beta_hat", "pinch_margin", "verdict"});
    bool all = true;
    double amin = std::numeric_limits<double>::infinity(), bmax = 0.0;
    for (const PinchRow& r : rows) {
        csv.row({cfg.system_name, std::to_string(r.center_ix), format_double(r.alpha_hat),
                 format_double(r.beta_hat), format_double(r.pinch_margin),
                 pass_fail(r.pass)});
        all = all && r.pass;
        amin = std::min(amin, r.alpha_hat);
        bmax = std::max(bmax, r.beta_hat);
    }
    files.csv["spectrum.csv"] = csv.text();
    rep.metrics["alpha_hat_min"] = amin;
    rep.metrics["beta_hat_max"] = bmax;
    rep.metrics["alpha_config"] = alpha_cfg;
    rep.verdicts["pinching"] = pass_fail(all);
}

// ---------------------------------------------------------------------------

void suite_splitting(const RunConfig& cfg, const SystemPtr& system,
                     const LambdaSample& sample, RunReport& rep, SuiteFiles& files) {
    const ChartOptions opts;
    const auto cix = draw_centers(sample, cfg.centers, cfg.seed ^ 0x53706cULL);

    struct CenterOut {
        std::vector<B1Set> b1;
        bool dominated = true;
        double margin = std::numeric_limits<double>::infinity();
        double beta1 = 0.0, alpha2 = 0.0;
    };
    std::vector<CenterOut> outs(cix.size());
    parallel_for(cix.size(), [&](std::size_t c) {
        ChartOrbit orbit(system, sample.point(cix[c]),
                         std::max(cfg.horizon, cfg.p_max), cfg.horizon, opts);
        const SplittingEstimate se = estimate_splitting(orbit, cfg.horizon);
        const PrimeNormContext ctx = PrimeNormContext::from(se);
        CenterOut& co = outs[c];
        co.dominated = se.dominated;
        if (se.E2) {
            co.margin = se.rates2.lo - se.rates1.hi;
            co.beta1 = se.rates1.hi;
            co.alpha2 = se.rates2.lo;
        }
        const LocalTrace trace = local_trace(orbit.chart(0), sample, cfg.eps);
        for (int p = 0; p <= cfg.p_max; ++p)
            co.b1.push_back(check_b1_set(orbit, 0, trace, p, cfg.eps, ctx));
    });

    // Omega and p_eps from the measured quantities.
    const OmegaReport om =
        omega_eps(system, sample, std::max(10, cfg.centers), cfg.eps, cfg.horizon, opts);
    int peps = 1;
    const bool lupc = system->unstable_dim() > system->u1_dim();
    if (lupc && om.omega > 0.0) {
        double beta1 = 0.0, alpha2 = std::numeric_limits<double>::infinity();
        for (const CenterOut& co : outs) {
            beta1 = std::max(beta1, co.beta1);
            alpha2 = std::min(alpha2, co.alpha2);
        }
        const double gap = alpha2 - beta1;
        if (gap > 0.0) {
            const double lambda1 = std::exp(beta1 + 0.05 * gap);
            const double mu2 = std::exp(alpha2 - 0.05 * gap);
            peps = p_eps(cfg.eps, om.omega, mu2, lambda1);
            rep.metrics["mu2_over_lambda1"] = mu2 / lambda1;
        }
    }

    CsvWriter csv({"system", "center_ix", "p", "eps", "diam_prime_b1", "diam_prime_full",
                   "ineq52_ok", "ineq53_ok"});
    bool all52 = true, all53 = true, alldom = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cix.size(); ++c) {
        const CenterOut& co = outs[c];
        alldom = alldom && co.dominated;
        min_margin = std::min(min_margin, co.margin);
        for (int p = 0; p <= cfg.p_max; ++p) {
            const B1Set& b = co.b1[static_cast<std::size_t>(p)];
            const bool ok52 = b.diam_prime <= b.diam_prime_full + 1e-12;
            const bool ok53 = p < peps || b.count < 2 ||
                              b.diam_prime_full <= b.diam_prime + 1e-12;
            all52 = all52 && ok52;
            all53 = all53 && ok53;
            csv.row({cfg.system_name, std::to_string(cix[c]), std::to_string(p),
                     format_double(cfg.eps), format_double(b.diam_prime),
                     format_double(b.diam_prime_full), ok52 ? "1" : "0", ok53 ? "1" : "0"});
        }
    }
    files.csv["b1sets.csv"] = csv.text();
    rep.metrics["omega"] = om.omega;
    rep.metrics["p_eps"] = peps;
    if (lupc) rep.metrics["domination_margin_min"] = min_margin;
    rep.verdicts["ineq52"] = pass_fail(all52);
    rep.verdicts["ineq53"] = pass_fail(all53);
    rep.verdicts["omega_positive"] = pass_fail(!om.violation);
    if (lupc) rep.verdicts["domination"] = pass_fail(alldom);
}

} // namespace

// ---------------------------------------------------------------------------

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    const std::set<std::string> top = {"system", "seed",    "suite",   "eps",
                                      "delta",  "rho",     "p_max",   "horizon",
                                      "centers", "budget", "out_dir"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!top.count(it.key())) throw usage_error("unknown config key: " + it.key());
    if (j.contains("system")) {
        const json& s = j["system"];
        for (auto it = s.begin(); it != s.end(); ++it)
            if (it.key() != "name" && it.key() != "params")
                throw usage_error("unknown system key: " + it.key());
        cfg.system_name = s.value("name", cfg.system_name);
        if (s.contains("params"))
            for (auto it = s["params"].begin(); it != s["params"].end(); ++it)
                cfg.system_params[it.key()] = it.value().get<double>();
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.suite = j.value("suite", cfg.suite);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.p_max = j.value("p_max", cfg.p_max);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.centers = j.value("centers", cfg.centers);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

void RunConfig::validate() const {
    if (!kSuites.count(suite)) throw usage_error("unknown suite: " + suite);
    if (!(delta > 0.0 && delta <= eps)) throw usage_error("need 0 < delta <= eps");
    if (!(eps <= 0.1 + 1e-12)) throw usage_error("eps exceeds the chart-map radius (0.1)");
    if (!(rho > 0.0 && rho < 1.0)) throw usage_error("rho must lie in (0,1)");
    if (p_max < 1 || horizon < 1 || centers < 1 || budget < 1)
        throw usage_error("p_max, horizon, centers, budget must all be >= 1");
    make_system(system_name, system_params); // validates name and parameters
}

bool RunReport::any_fail() const {
    for (const auto& [k, v] : verdicts)
        if (v == "fail") return true;
    return false;
}

RunReport run_suite(const RunConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    SuiteFiles files;
    const SystemPtr system = make_system(cfg.system_name, cfg.system_params);
    const LambdaSample sample = sample_lambda(system, cfg.budget, cfg.seed);
    rep.metrics["sample_hausdorff_tol"] = sample.hausdorff_tol;

    if (cfg.suite == "linearize" || cfg.suite == "full")
        suite_linearize(cfg, system, sample, rep, files);
    if (cfg.suite == "distortion" || cfg.suite == "full")
        suite_distortion(cfg, system, sample, rep, files);
    if (cfg.suite == "spectrum" || cfg.suite == "full")
        suite_spectrum(cfg, system, sample, rep, files);
    if (cfg.suite == "splitting" || cfg.suite == "full")
        suite_splitting(cfg, system, sample, rep, files);

    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& [name, contents] : files.csv)
        write_file_atomic(cfg.out_dir + "/" + name, contents);

    json out;
    out["config"]["system"]["name"] = cfg.system_name;
    out["config"]["system"]["params"] = cfg.system_params;
    out["config"]["seed"] = cfg.seed;
    out["config"]["suite"] = cfg.suite;
    out["config"]["eps"] = cfg.eps;
    out["config"]["delta"] = cfg.delta;
    out["config"]["rho"] = cfg.rho;
    out["config"]["p_max"] = cfg.p_max;
    out["config"]["horizon"] = cfg.horizon;
    out["config"]["centers"] = cfg.centers;
    out["config"]["budget"] = cfg.budget;
    out["verdicts"] = rep.verdicts;
    out["metrics"] = rep.metrics;
    out["wall_time"] = rep.wall_time;
    write_file_atomic(cfg.out_dir + "/report.json", out.dump(2) + "\n");
    return rep;
}

} // namespace bowenlab
