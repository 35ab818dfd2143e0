#include "bowenlab/linearization.hpp"

#include <cmath>
#include <limits>

#include "bowenlab/errors.hpp"
#include "bowenlab/rng.hpp"

namespace bowenlab {

double PinchConstants::gamma_of(double C, double alpha, int k) {
    return 8.0 * C * C * C * std::exp(-alpha * k / 2.0);
}

void PinchConstants::validate() const {
    if (!(alpha <= beta)) throw pinch_violation("PinchConstants: alpha > beta");
    if (D < 0.0) throw pinch_violation("PinchConstants: negative D");
    if (!(gamma < 1.0))
        throw pinch_violation("PinchConstants: gamma >= 1 for the configured block exponent");
}

RateEstimate finite_time_rates(const SystemPtr& base_system, const LambdaSample& sample,
                               int centers, int horizon, const ChartOptions& opts,
                               int window) {
    if (centers < 1 || horizon < 2 * window)
        throw domain_error("finite_time_rates: need centers >= 1 and horizon >= 2*window");
    CounterRng rng{sample.seed, 0x5261746573ULL};
    const int m1 = base_system->u1_dim();
    double amin = std::numeric_limits<double>::infinity();
    double bmax = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < centers; ++c) {
        const Vec x = sample.point(rng.index(static_cast<std::uint64_t>(c), sample.size()));
        ChartOrbit orbit(base_system, x, 0, horizon, opts);
        // Windowed products on the second half of the horizon.
        for (int start = horizon / 2; start + window <= horizon; ++start) {
            Mat w = Mat::Identity(m1, m1);
            for (int j = 0; j < window; ++j)
                w = orbit.dhat0(start + j).topLeftCorner(m1, m1) * w;
            amin = std::min(amin, std::log(conorm(w)) / window);
            bmax = std::max(bmax, std::log(operator_norm(w)) / window);
        }
    }
    return {amin, bmax};
}

double estimate_taylor_D(const SystemPtr& system, const std::vector<Vec>& base_points,
                         double eps1, const ChartOptions& opts, int pairs_per_point) {
    if (base_points.empty()) throw domain_error("estimate_taylor_D: no base points");
    CounterRng rng{0x5461796c6f72ULL, 0};
    const double h = 1e-6;
    double worst = 0.0;
    std::uint64_t ctr = 0;
    for (const Vec& x : base_points) {
        ChartOrbit orbit(system, x, 0, 1, opts);
        const int m = orbit.chart(0).udim();
        for (int q = 0; q < pairs_per_point; ++q) {
            Vec u(m), v(m);
            for (int d = 0; d < m; ++d) {
                u[d] = 0.9 * eps1 * rng.sym(ctr++);
                v[d] = 0.9 * eps1 * rng.sym(ctr++);
            }
            if (m > 1) { // keep probes inside the ball, not just the box
                if (u.norm() > 0.9 * eps1) u *= 0.9 * eps1 / u.norm();
                if (v.norm() > 0.9 * eps1) v *= 0.9 * eps1 / v.norm();
            }
            const Vec fu = orbit.hat_f(0, u);
            const Vec fv = orbit.hat_f(0, v);
            const Mat dfu = orbit.dhat(0, u, h);
            const double dd = (fv - fu - dfu * (v - u)).norm() / (v - u).squaredNorm();
            worst = std::max(worst, dd);
        }
    }
    return worst;
}

PinchConstants calibrate_pinch(const SystemPtr& base_system, const LambdaSample& sample,
                               int centers, int horizon, const ChartOptions& opts,
                               double gamma_target) {
    PinchConstants pc;
    const RateEstimate rates = finite_time_rates(base_system, sample, centers, horizon, opts);
    // The pinching constant must satisfy alpha <= alpha_x and 2 alpha_x - beta_x >= alpha.
    pc.alpha = std::min(rates.alpha_hat, 2.0 * rates.alpha_hat - rates.beta_hat);
    pc.beta = rates.beta_hat;
    if (pc.alpha <= 0.0)
        throw pinch_violation("calibrate_pinch: measured rates are not pinched (2a-b <= 0)");

    // Chart constant over a few sampled charts.
    CounterRng rng{sample.seed, 0x436f6e7374ULL};
    double cc = 1.0;
    std::vector<Vec> pts;
    for (int c = 0; c < std::min(centers, 10); ++c) {
        const Vec x = sample.point(rng.index(static_cast<std::uint64_t>(c), sample.size()));
        ChartOrbit orbit(base_system, x, 0, 1, opts);
        cc = std::max(cc, orbit.chart(0).chart_C);
        pts.push_back(x);
    }
    pc.C = cc;

    int k = 1;
    while (k <= 60 && PinchConstants::gamma_of(pc.C, pc.alpha, k) >= gamma_target) ++k;
    if (k > 60) throw pinch_violation("calibrate_pinch: no block exponent reaches the gamma target");
    pc.t0_blocks = k;
    pc.gamma = PinchConstants::gamma_of(pc.C, pc.alpha, k);

    pc.D = estimate_taylor_D(make_blocked(base_system, k), pts, opts.eps1, opts);

    // Smallness conditions on eps1 (the blocked map plays f), then eps2 = eps1/2.
    double eps1_eff = opts.eps1;
    if (pc.D > 1e-8) {
        const double at = pc.alpha * k;
        const double cond1 = (pc.C * std::exp(at) / pc.D) *
                             std::min(std::exp(at / 16.0) - 1.0,
                                      (1.0 - std::exp(-at / 8.0)) / (pc.C * pc.C));
        const double cond2 = 1.0 / (4.0 * pc.D * pc.C);
        eps1_eff = std::min({eps1_eff, cond1, cond2});
    }
    pc.eps2 = eps1_eff / 2.0;
    return pc;
}

namespace {

void guard_fp_inputs(const Vec& u, const PinchConstants& pc) {
    pc.validate();
    if (u.norm() > pc.eps2 * (1.0 + 1e-9))
        throw radius_error("F_p: ||u|| exceeds eps2");
}

} // namespace

Vec F_p(const ChartOrbit& orbit, const Vec& u, int p, const PinchConstants& pc, int center) {
    guard_fp_inputs(u, pc);
    const Vec w = orbit.pullback(center, u, p);
    const Vec f = orbit.cocycle0_forward(center - p, p) * w;
    if (f.norm() > 2.0 * pc.eps2 * (1.0 + 1e-9))
        throw pinch_violation("F_p left the guaranteed range E^u(x; 2 eps2)");
    return f;
}

double conjugacy_residual(const ChartOrbit& orbit, const Vec& u, int p, int q,
                          const PinchConstants& pc, int center) {
    if (q < 1) throw domain_error("conjugacy_residual: q must be >= 1");
    const Vec lhs = orbit.cocycle0_forward(center - q, q).inverse() * F_p(orbit, u, p, pc, center);
    const Vec pulled = orbit.pullback(center, u, q);
    const Vec rhs = F_p(orbit, pulled, p, pc, center - q);
    return (lhs - rhs).norm();
}

Mat L_operator(const ChartOrbit& orbit, const Vec& xi, int p, const PinchConstants& pc,
               int center) {
    pc.validate();
    if (xi.norm() > pc.eps2 / 2.0 * (1.0 + 1e-9))
        throw radius_error("L_operator: ||xi|| exceeds eps2/2");
    const int m = static_cast<int>(xi.size());
    const double h = 1e-6 * std::max(pc.eps2, 1e-3);
    Mat b = Mat::Identity(m, m);
    Vec w = xi;
    for (int j = 1; j <= p; ++j) {
        w = orbit.hat_f_inverse(center - (j - 1), w);
        b = b * orbit.dhat(center - j, w, h);
    }
    const Mat a = orbit.cocycle0_forward(center - p, p);
    Mat l = b * a.inverse();
    if (operator_norm(l) > 2.0 + 0.1)
        throw pinch_violation("L_operator norm exceeded 2 + slack");
    return l;
}

Lemma33a lemma33a_check(const ChartOrbit& orbit, const Vec& v, int p, double eps2, int center) {
    const Vec fwd = orbit.hat_f_iter(center, v, p);
    if (fwd.norm() > eps2 * (1.0 + 1e-9))
        throw radius_error("lemma33a_check: ||f̂^p(v)|| exceeds eps2");
    const Vec lin = orbit.cocycle0_forward(center, p) * v;
    return {(lin - fwd).norm(), fwd.squaredNorm(), fwd.norm(), lin.norm()};
}

double equivariance_residual(const ChartOrbit& orbit, const Vec& u, int p,
                             const PinchConstants& pc) {
    const Vec lhs = orbit.dhat0(0) * F_p(orbit, u, p, pc, 0);
    const Vec rhs = F_p(orbit, orbit.hat_f(0, u), p, pc, 1);
    return (lhs - rhs).norm();
}

GeometricFit fit_geometric(const std::vector<std::vector<double>>& increments,
                           const std::vector<double>& probe_norms, int p_min) {
    GeometricFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        const double u2 = probe_norms[i] * probe_norms[i];
        for (std::size_t j = 0; j < increments[i].size(); ++j) {
            const int p = static_cast<int>(j) + 1;
            if (p < p_min) continue;
            const double inc = increments[i][j];
            if (!(inc > 0.0)) continue;
            const double x = p;
            const double y = std::log(inc / u2);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    fit.points = n;
    if (n < 2) return fit;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    fit.gamma_hat = std::exp(slope);
    fit.C1_hat = std::exp(intercept);
    return fit;
}

LinearizationState run_linearization(const ChartOrbit& orbit, const std::vector<Vec>& probes,
                                     int p_max, const PinchConstants& pc) {
    pc.validate();
    LinearizationState st;
    st.order = p_max;
    st.probes = probes;
    st.values.resize(probes.size());
    st.increments.resize(probes.size());
    const int m = orbit.chart(0).udim();
    std::vector<double> norms;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Vec& u = probes[i];
        guard_fp_inputs(u, pc);
        Vec w = u;
        Mat coc = Mat::Identity(m, m);
        Vec prev;
        for (int p = 1; p <= p_max; ++p) {
            w = orbit.hat_f_inverse(-(p - 1), w);
            coc = coc * orbit.dhat0(-p);
            const Vec f = coc * w;
            if (f.norm() > 2.0 * pc.eps2 * (1.0 + 1e-9))
                throw pinch_violation("F_p left the guaranteed range E^u(x; 2 eps2)");
            st.values[i].push_back(f);
            if (p > 1) st.increments[i].push_back((f - prev).norm());
            prev = f;
        }
        norms.push_back(u.norm());
    }
    const GeometricFit fit = fit_geometric(st.increments, norms);
    st.gamma_hat = fit.gamma_hat;
    st.C1_hat = fit.C1_hat;
    return st;
}

} // namespace bowenlab
