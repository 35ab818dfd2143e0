#include "bowenlab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bowenlab/bowen.hpp"
#include "bowenlab/errors.hpp"
#include "bowenlab/parallel.hpp"
#include "bowenlab/rng.hpp"

namespace bowenlab {

namespace {

Mat seeded_frame(int rows, int cols, std::uint64_t seed) {
    CounterRng rng{seed, 0x53706c6974ULL};
    Mat f(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) f(i, j) = rng.sym(static_cast<std::uint64_t>(j * rows + i));
    return gram_schmidt(f);
}

// Window rates of the cocycle restricted to a propagated subbundle.
RateInterval windowed_rates(const ChartOrbit& orbit, const Mat& start_basis, int horizon,
                            int window) {
    const int m = static_cast<int>(start_basis.rows());
    std::vector<Mat> bases;
    bases.reserve(static_cast<std::size_t>(horizon) + 1);
    bases.push_back(start_basis);
    for (int j = 0; j < horizon; ++j)
        bases.push_back(gram_schmidt(orbit.dhat0(j) * bases.back()));
    RateInterval out{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
    for (int start = horizon / 2; start + window <= horizon; ++start) {
        Mat w = Mat::Identity(m, m);
        for (int j = 0; j < window; ++j) w = orbit.dhat0(start + j) * w;
        Mat restricted = bases[static_cast<std::size_t>(start + window)].transpose() * w *
                         bases[static_cast<std::size_t>(start)];
        out.lo = std::min(out.lo, std::log(conorm(restricted)) / window);
        out.hi = std::max(out.hi, std::log(operator_norm(restricted)) / window);
    }
    return out;
}

} // namespace

SplittingEstimate estimate_splitting(const ChartOrbit& orbit, int horizon, int window) {
    if (horizon < std::max(10, 2 * window))
        throw domain_error("estimate_splitting: horizon too short");
    if (orbit.backward() < horizon || orbit.forward() < horizon)
        throw domain_error("estimate_splitting: orbit does not span the horizon");
    SplittingEstimate se;
    se.base = orbit.chart(0).base;
    se.horizon = horizon;
    const int m = orbit.chart(0).udim();
    const int m1 = orbit.system()->u1_dim();
    const int m2 = m - m1;

    // Slow part: dominant subspace of the inverse cocycle, pulled from +horizon.
    Mat e1 = seeded_frame(m, m1, 0x4531ULL);
    for (int j = horizon; j > 0; --j) {
        e1 = orbit.dhat0(j - 1).inverse() * e1;
        e1 = gram_schmidt(e1);
    }
    se.E1 = Subspace(m, e1);

    if (m2 >= 1) {
        // Fast part: forward power iteration from -horizon.
        Mat e2 = seeded_frame(m, m2, 0x4532ULL);
        for (int j = -horizon; j < 0; ++j) e2 = gram_schmidt(orbit.dhat0(j) * e2);
        se.E2 = Subspace(m, e2);
        Mat cross = se.E1.basis().transpose() * se.E2->basis();
        Eigen::JacobiSVD<Mat> svd(cross);
        se.angle_floor = std::acos(std::clamp(svd.singularValues().maxCoeff(), -1.0, 1.0));
        se.rates2 = windowed_rates(orbit, se.E2->basis(), horizon, window);
    }
    se.rates1 = windowed_rates(orbit, se.E1.basis(), horizon, window);
    se.dominated = !se.E2 || se.rates1.hi < se.rates2.lo;
    return se;
}

SplittingEstimate estimate_splitting(const SystemPtr& system, const Vec& x, int horizon,
                                     const ChartOptions& opts, int window) {
    ChartOrbit orbit(system, x, horizon, horizon, opts);
    return estimate_splitting(orbit, horizon, window);
}

PrimeNormContext PrimeNormContext::from(const SplittingEstimate& split) {
    PrimeNormContext ctx;
    ctx.m1 = split.E1.rank();
    const int m = split.E1.ambient_dim();
    const int m2 = split.E2 ? split.E2->rank() : 0;
    if (ctx.m1 + m2 != m)
        throw dimension_error("PrimeNormContext: splitting does not span the unstable frame");
    ctx.S = Mat(m, m);
    ctx.S.leftCols(ctx.m1) = split.E1.basis();
    if (split.E2) ctx.S.rightCols(m2) = split.E2->basis();
    ctx.Sinv = ctx.S.inverse();
    Mat d1 = Mat::Zero(m, m), d2 = Mat::Zero(m, m);
    for (int i = 0; i < ctx.m1; ++i) d1(i, i) = 1.0;
    for (int i = ctx.m1; i < m; ++i) d2(i, i) = 1.0;
    ctx.P1 = ctx.S * d1 * ctx.Sinv;
    ctx.P2 = ctx.S * d2 * ctx.Sinv;
    return ctx;
}

double PrimeNormContext::prime_norm(const Vec& u) const {
    const Vec c = Sinv * u;
    const double n1 = c.head(m1).norm();
    const double n2 = c.tail(S.cols() - m1).norm();
    return std::max(n1, n2);
}

std::vector<PinchRow> pinching_report(const SystemPtr& system, const LambdaSample& sample,
                                      int horizon, int centers, double alpha_config,
                                      const ChartOptions& opts) {
    if (centers < 1) throw domain_error("pinching_report: centers must be >= 1");
    const auto cix = draw_centers(sample, centers, sample.seed ^ 0x50696e6368ULL);
    std::vector<PinchRow> rows(cix.size());
    parallel_for(cix.size(), [&](std::size_t c) {
        const Vec x = sample.point(cix[c]);
        ChartOrbit orbit(system, x, horizon, horizon, opts);
        const SplittingEstimate se = estimate_splitting(orbit, horizon);
        PinchRow row;
        row.center_ix = static_cast<int>(cix[c]);
        row.alpha_hat = se.rates1.lo;
        row.beta_hat = se.rates1.hi;
        row.pinch_margin = 2.0 * row.alpha_hat - row.beta_hat;
        row.pass = row.pinch_margin >= alpha_config;
        rows[c] = row;
    });
    return rows;
}

Vec project_u1(const ChartOrbit& orbit, int center, const SplittingEstimate& split,
               const Vec& u) {
    const UnstableChart& chart = orbit.chart(center);
    if (u.norm() > chart.eps1 * (1.0 + 1e-9))
        throw radius_error("project_u1: ||u|| exceeds eps1");
    if (chart.leaf->has_u1_leaf()) {
        const Vec delta = chart.leaf->point(u);
        const double t = chart.leaf->u1_param(delta);
        if (std::fabs(t) > chart.eps1 * (1.0 + 1e-9))
            throw bracket_error("project_u1: bracket parameter outside eps1");
        const Vec bracket = chart.leaf->u1_offset(t);
        const PrimeNormContext ctx = PrimeNormContext::from(split);
        return ctx.P1 * chart.leaf->coords(bracket);
    }
    const PrimeNormContext ctx = PrimeNormContext::from(split);
    return ctx.P1 * u;
}

B1Set check_b1_set(const ChartOrbit& orbit, int center, const LocalTrace& trace, int p,
                   double eps, const PrimeNormContext& ctx) {
    if (p < 0) throw domain_error("check_b1_set: p must be >= 0");
    B1Set out;
    out.p = p;
    out.eps = eps;
    const int m1 = ctx.m1;
    out.e1_coeffs.assign(static_cast<std::size_t>(m1), {});

    std::vector<Vec> kept;
    std::vector<std::size_t> alive;
    std::vector<Vec> cur;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Vec u = trace.member(i);
        if (ctx.prime_norm(u) <= eps) {
            alive.push_back(i);
            cur.push_back(u);
        }
    }
    for (int j = 1; j <= p && !alive.empty(); ++j) {
        std::vector<std::size_t> nalive;
        std::vector<Vec> ncur;
        for (std::size_t t = 0; t < alive.size(); ++t) {
            const Vec v = orbit.hat_f(center + j - 1, cur[t]);
            if (ctx.prime_norm(v) <= eps) {
                nalive.push_back(alive[t]);
                ncur.push_back(v);
            }
        }
        alive.swap(nalive);
        cur.swap(ncur);
    }
    std::vector<std::vector<double>> full_c1(static_cast<std::size_t>(m1));
    std::vector<std::vector<double>> full_c2(
        static_cast<std::size_t>(ctx.S.cols() - m1));
    for (std::size_t t = 0; t < alive.size(); ++t) {
        const Vec u = trace.member(alive[t]);
        const Vec a = ctx.c1(u);
        const Vec b = ctx.c2(u);
        for (int d = 0; d < m1; ++d) {
            out.e1_coeffs[static_cast<std::size_t>(d)].push_back(a[d]);
            full_c1[static_cast<std::size_t>(d)].push_back(a[d]);
        }
        for (Eigen::Index d = 0; d < b.size(); ++d)
            full_c2[static_cast<std::size_t>(d)].push_back(b[d]);
    }
    out.count = alive.size();
    out.diam_prime = set_diameter(out.e1_coeffs);
    const double d1 = set_diameter(full_c1);
    const double d2 = full_c2.empty() ? 0.0 : set_diameter(full_c2);
    out.diam_prime_full = std::max(d1, d2);
    return out;
}

OmegaReport omega_eps_from(const std::vector<const LocalTrace*>& traces,
                           const std::vector<const PrimeNormContext*>& contexts, double eps) {
    if (traces.size() != contexts.size() || traces.empty())
        throw domain_error("omega_eps: mismatched or empty inputs");
    OmegaReport rep;
    double omega = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < traces.size(); ++c) {
        const LocalTrace& tr = *traces[c];
        const PrimeNormContext& ctx = *contexts[c];
        double best = 0.0;
        std::size_t considered = 0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const Vec u = tr.member(i);
            if (u.norm() > eps) continue;
            ++considered;
            best = std::max(best, ctx.c1(u).norm());
        }
        if (considered <= 1) {
            ++rep.centers_excluded;
            continue;
        }
        ++rep.centers_used;
        omega = std::min(omega, best);
    }
    rep.omega = rep.centers_used ? omega : 0.0;
    rep.violation = !(rep.omega > 1e-12);
    return rep;
}

OmegaReport omega_eps(const SystemPtr& system, const LambdaSample& sample, int centers,
                      double eps, int horizon, const ChartOptions& opts) {
    if (centers < 10) throw domain_error("omega_eps: need at least 10 centers");
    const auto cix = draw_centers(sample, centers, sample.seed ^ 0x4f6d656761ULL);
    std::vector<LocalTrace> traces(cix.size());
    std::vector<PrimeNormContext> ctxs(cix.size());
    parallel_for(cix.size(), [&](std::size_t c) {
        ChartOrbit orbit(system, sample.point(cix[c]), horizon, horizon, opts);
        const SplittingEstimate se = estimate_splitting(orbit, horizon);
        ctxs[c] = PrimeNormContext::from(se);
        traces[c] = local_trace(orbit.chart(0), sample, eps);
        traces[c].chart = nullptr; // the orbit (and its charts) end with this task
    });
    std::vector<const LocalTrace*> tp;
    std::vector<const PrimeNormContext*> cp;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        tp.push_back(&traces[i]);
        cp.push_back(&ctxs[i]);
    }
    return omega_eps_from(tp, cp, eps);
}

int p_eps(double eps, double omega, double mu2, double lambda1) {
    if (!(mu2 > lambda1) || !(lambda1 > 0.0))
        throw domination_error("p_eps: need mu2 > lambda1 > 0");
    if (!(omega > 0.0)) throw domain_error("p_eps: omega must be positive");
    const double target = eps / omega;
    const double r = mu2 / lambda1;
    int p = 1;
    double val = r;
    while (val < target) {
        val *= r;
        if (++p > 1000000) throw domain_error("p_eps: target unreachable");
    }
    return p;
}

namespace {

double u1_coeff_to_param(const UnstableChart& chart, double c1) {
    // Solve E1^T u1_offset(t) = c1; the map is a near-identity in t.
    const Vec e1 = chart.frame.basis().col(0);
    double t = c1;
    for (int it = 0; it < 30; ++it) {
        const double f = e1.dot(chart.leaf->u1_offset(t)) - c1;
        if (std::fabs(f) < 1e-15 * (1.0 + std::fabs(c1))) break;
        const double h = 1e-7;
        const double df = (e1.dot(chart.leaf->u1_offset(t + h)) -
                           e1.dot(chart.leaf->u1_offset(t - h))) /
                          (2.0 * h);
        t -= f / df;
    }
    return t;
}

} // namespace

double hat_f_u1(const ChartOrbit& orbit, int i, double c1) {
    const UnstableChart& src = orbit.chart(i);
    const UnstableChart& dst = orbit.chart(i + 1);
    if (src.udim() == 1) return orbit.hat_f(i, vec1(c1))[0];
    if (!src.leaf->has_u1_leaf())
        throw domain_error("hat_f_u1: no explicit slow sub-leaf on this system");
    if (std::fabs(c1) > src.eps1 * (1.0 + 1e-9))
        throw radius_error("hat_f_u1: |c1| exceeds eps1");
    const double t = u1_coeff_to_param(src, c1);
    // Reuse the chart-map push by expressing the slow-leaf point in full chart
    // coordinates; the W^{u,1} family is f-invariant, so the image lands on
    // the target's slow leaf.
    const Vec u_full = src.leaf->coords(src.leaf->u1_offset(t));
    const Vec v_full = orbit.hat_f(i, u_full);
    const Vec image_off = dst.leaf->point(v_full);
    const double tp = dst.leaf->u1_param(image_off);
    const Vec expected = dst.leaf->u1_offset(tp);
    if ((image_off - expected).norm() > 1e-6 * std::max(std::fabs(c1), 1e-6))
        throw domain_error("hat_f_u1: image left the slow sub-leaf");
    return dst.frame.basis().col(0).dot(expected);
}

Vec linearize_E1(const ChartOrbit& orbit, const Vec& u1, int p, const PinchConstants& pc,
                 int center) {
    pc.validate();
    const int m = orbit.chart(center).udim();
    if (m == 1) return F_p(orbit, u1, p, pc, center);
    if (u1.size() != 1)
        throw dimension_error("linearize_E1: expected a scalar E1 coordinate");
    if (std::fabs(u1[0]) > pc.eps2 * (1.0 + 1e-9))
        throw radius_error("linearize_E1: ||u1|| exceeds eps2");
    // Pullback along the slow sub-leaf by Newton on the restricted map.
    double w = u1[0];
    double coc = 1.0;
    for (int j = 1; j <= p; ++j) {
        const double target = w;
        double c = target / orbit.dhat0(center - j)(0, 0);
        for (int it = 0; it < 40; ++it) {
            const double f = hat_f_u1(orbit, center - j, c) - target;
            if (std::fabs(f) < 1e-13 * std::max(std::fabs(target), 1e-9)) break;
            const double h = 1e-9;
            const double df = (hat_f_u1(orbit, center - j, c + h) -
                               hat_f_u1(orbit, center - j, c - h)) /
                              (2.0 * h);
            c -= f / df;
        }
        w = c;
        coc *= orbit.dhat0(center - j)(0, 0);
    }
    Vec out(1);
    out[0] = coc * w;
    if (std::fabs(out[0]) > 2.0 * pc.eps2 * (1.0 + 1e-9))
        throw pinch_violation("linearize_E1 left the guaranteed range");
    return out;
}

double w2_leaf_deviation(const ChartOrbit& orbit, int iters, double brange, int grid) {
    const int m = orbit.chart(-iters).udim();
    if (m < 2) throw domain_error("w2_leaf_deviation: needs a 2-D unstable bundle");
    // Calibrate the seed so the pushed segment covers +-brange in the fast
    // coordinate at the center chart.
    double seed = brange;
    for (int j = 0; j < iters; ++j) seed /= operator_norm(orbit.dhat0(-iters + j));
    {
        Vec probe = Vec::Zero(m);
        probe[m - 1] = seed;
        const Vec out = orbit.hat_f_iter(-iters, probe, iters);
        seed *= brange / std::fabs(out[m - 1]);
    }
    double dev = 0.0;
    for (int g = 0; g < grid; ++g) {
        Vec u = Vec::Zero(m);
        u[m - 1] = seed * (2.0 * g / (grid - 1) - 1.0);
        const Vec out = orbit.hat_f_iter(-iters, u, iters);
        dev = std::max(dev, std::fabs(out[0]));
    }
    return dev;
}

} // namespace bowenlab
