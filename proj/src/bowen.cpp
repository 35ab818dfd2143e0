#include "bowenlab/bowen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bowenlab/errors.hpp"
#include "bowenlab/holonomy.hpp"
#include "bowenlab/kernels.hpp"
#include "bowenlab/parallel.hpp"
#include "bowenlab/rng.hpp"

namespace bowenlab {

namespace {

// Andrew monotone chain; returns hull vertices (indices unused by callers).
std::vector<std::pair<double, double>> convex_hull(const std::vector<double>& xs,
                                                   const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> ix(n);
    std::iota(ix.begin(), ix.end(), 0);
    std::sort(ix.begin(), ix.end(), [&](std::size_t a, std::size_t b) {
        return xs[a] < xs[b] || (xs[a] == xs[b] && ys[a] < ys[b]);
    });
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o]);
    };
    std::vector<std::size_t> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], ix[i]) <= 0) --k;
        h[k++] = ix[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], ix[i]) <= 0) --k;
        h[k++] = ix[i];
    }
    h.resize(k > 0 ? k - 1 : 0);
    std::vector<std::pair<double, double>> out;
    out.reserve(h.size());
    for (std::size_t i : h) out.emplace_back(xs[i], ys[i]);
    return out;
}

} // namespace

double set_diameter(const std::vector<std::vector<double>>& soa) {
    if (soa.empty() || soa[0].size() < 2) return 0.0;
    const auto& k = kernels::active_ops();
    if (soa.size() == 1) {
        const auto mm = k.minmax(soa[0].data(), soa[0].size());
        return mm.hi - mm.lo;
    }
    const auto hull = convex_hull(soa[0], soa[1]);
    if (hull.size() < 2) return 0.0;
    std::vector<double> hx, hy;
    hx.reserve(hull.size());
    hy.reserve(hull.size());
    for (auto& p : hull) {
        hx.push_back(p.first);
        hy.push_back(p.second);
    }
    return std::sqrt(k.max_pairwise_dist2_2d(hx.data(), hy.data(), hx.size()));
}

double set_ell(const std::vector<std::vector<double>>& soa) {
    if (soa.empty() || soa[0].empty()) return 0.0;
    const auto& k = kernels::active_ops();
    if (soa.size() == 1) return k.max_abs(soa[0].data(), soa[0].size());
    double best = 0.0;
    for (std::size_t i = 0; i < soa[0].size(); ++i) {
        const double d2 = soa[0][i] * soa[0][i] + soa[1][i] * soa[1][i];
        if (d2 > best) best = d2;
    }
    return std::sqrt(best);
}

Vec BowenSample::member(std::size_t i) const {
    Vec u(static_cast<Eigen::Index>(members.size()));
    for (std::size_t d = 0; d < members.size(); ++d) u[static_cast<Eigen::Index>(d)] = members[d][i];
    return u;
}

BowenSample bowen_ball(const ChartOrbit& orbit, int center, const LocalTrace& trace,
                       int p, double eps) {
    if (p < 0) throw domain_error("bowen_ball: p must be >= 0");
    BowenSample b;
    b.center = orbit.chart(center).base;
    b.p = p;
    b.eps = eps;
    const std::size_t m = trace.coords.size();
    b.members.assign(m, {});

    const std::size_t n = trace.size();
    std::vector<std::size_t> alive;
    alive.reserve(n);
    std::vector<Vec> cur;
    cur.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec u = trace.member(i);
        if (u.norm() <= eps) {
            alive.push_back(i);
            cur.push_back(u);
        }
    }
    for (int j = 1; j <= p && !alive.empty(); ++j) {
        std::vector<std::size_t> nalive;
        std::vector<Vec> ncur;
        nalive.reserve(alive.size());
        ncur.reserve(alive.size());
        for (std::size_t t = 0; t < alive.size(); ++t) {
            const Vec v = orbit.hat_f(center + j - 1, cur[t]);
            if (v.norm() <= eps) {
                nalive.push_back(alive[t]);
                ncur.push_back(v);
            }
        }
        alive.swap(nalive);
        cur.swap(ncur);
    }
    for (std::size_t i : alive)
        for (std::size_t d = 0; d < m; ++d) b.members[d].push_back(trace.coords[d][i]);
    b.diam = set_diameter(b.members);
    b.ell = set_ell(b.members);
    return b;
}

std::vector<std::size_t> draw_centers(const LambdaSample& sample, int centers,
                                      std::uint64_t seed) {
    const std::size_t n = sample.size();
    std::vector<std::size_t> ix(n);
    std::iota(ix.begin(), ix.end(), 0);
    CounterRng rng{seed, 0x43656e74657273ULL};
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(centers), n);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.index(i, n - i);
        std::swap(ix[i], ix[j]);
    }
    ix.resize(take);
    return ix;
}

namespace {

// One pass per center: the running max of ||f̂^j(u)|| per trace member gives
// membership in every Bowen ball at once (the forward condition is monotone).
struct CenterPass {
    std::vector<std::vector<double>> coords0; // SoA original coordinates
    std::vector<std::vector<double>> runmax;  // runmax[p][i]
};

CenterPass center_pass(const ChartOrbit& orbit, const LocalTrace& trace, int p_max,
                       double eps_cap) {
    CenterPass cp;
    const std::size_t m = trace.coords.size();
    const std::size_t n = trace.size();
    cp.coords0.assign(m, {});
    std::vector<Vec> cur;
    std::vector<double> rm;
    cur.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec u = trace.member(i);
        const double nu = u.norm();
        if (nu <= eps_cap) {
            for (std::size_t d = 0; d < m; ++d) cp.coords0[d].push_back(trace.coords[d][i]);
            cur.push_back(u);
            rm.push_back(nu);
        }
    }
    cp.runmax.push_back(rm);
    std::vector<std::size_t> alive(cur.size());
    std::iota(alive.begin(), alive.end(), 0);
    for (int p = 1; p <= p_max; ++p) {
        std::vector<std::size_t> nalive;
        std::vector<Vec> ncur;
        rm = cp.runmax.back();
        for (std::size_t t = 0; t < alive.size(); ++t) {
            const std::size_t i = alive[t];
            const Vec v = orbit.hat_f(p - 1, cur[t]);
            const double nv = v.norm();
            rm[i] = std::max(rm[i], nv);
            if (rm[i] <= eps_cap) {
                nalive.push_back(i);
                ncur.push_back(v);
            }
        }
        // Dead members keep a sentinel so they never re-qualify.
        for (std::size_t i = 0; i < rm.size(); ++i)
            if (rm[i] > eps_cap) rm[i] = std::numeric_limits<double>::infinity();
        cp.runmax.push_back(rm);
        alive.swap(nalive);
        cur.swap(ncur);
        if (alive.empty() && p < p_max) {
            for (int q = p + 1; q <= p_max; ++q) cp.runmax.push_back(cp.runmax.back());
            break;
        }
    }
    return cp;
}

struct BallStats {
    double diam, ell;
    std::size_t count;
};

BallStats ball_stats(const CenterPass& cp, int p, double radius) {
    const std::size_t m = cp.coords0.size();
    std::vector<std::vector<double>> mem(m);
    const auto& rm = cp.runmax[static_cast<std::size_t>(p)];
    for (std::size_t i = 0; i < rm.size(); ++i)
        if (rm[i] <= radius)
            for (std::size_t d = 0; d < m; ++d) mem[d].push_back(cp.coords0[d][i]);
    return {set_diameter(mem), set_ell(mem), mem.empty() ? 0 : mem[0].size()};
}

} // namespace

DistortionResult distortion_R(const SystemPtr& system, const LambdaSample& sample,
                              double delta, double eps, int p_max, int centers,
                              std::uint64_t seed, const ChartOptions& opts) {
    if (!(0.0 < delta && delta <= eps))
        throw domain_error("distortion_R: need 0 < delta <= eps");
    if (centers < 1) throw domain_error("distortion_R: centers must be >= 1");
    DistortionResult res;
    const auto cix = draw_centers(sample, centers, seed);
    std::vector<std::vector<DistortionRow>> slot_rows(cix.size());
    std::vector<double> slot_max(cix.size(), 0.0);
    parallel_for(cix.size(), [&](std::size_t c) {
        const Vec z = sample.point(cix[c]);
        ChartOrbit orbit(system, z, 0, p_max, opts);
        const LocalTrace trace = local_trace(orbit.chart(0), sample, opts.eps0);
        const CenterPass cp = center_pass(orbit, trace, p_max, eps);
        for (int p = 0; p <= p_max; ++p) {
            const BallStats be = ball_stats(cp, p, eps);
            const BallStats bd = ball_stats(cp, p, delta);
            DistortionRow row{static_cast<int>(cix[c]), p, eps, delta,
                              be.diam, bd.diam, 0.0, be.ell, bd.ell, false};
            if (bd.count >= 2 && bd.diam > 0.0) {
                row.ratio = be.diam / bd.diam;
                row.defined = true;
                slot_max[c] = std::max(slot_max[c], row.ratio);
            }
            slot_rows[c].push_back(row);
        }
    });
    std::size_t defined = 0, cells = 0;
    for (std::size_t c = 0; c < cix.size(); ++c) {
        for (const DistortionRow& row : slot_rows[c]) {
            ++cells;
            if (row.defined) {
                ++defined;
                res.R_hat = std::max(res.R_hat, row.ratio);
            }
            res.rows.push_back(row);
        }
        res.per_center_max.push_back(slot_max[c]);
    }
    res.coverage = cells == 0 ? 0.0 : static_cast<double>(defined) / static_cast<double>(cells);
    return res;
}

ShrinkResult shrink_delta(const SystemPtr& system, const LambdaSample& sample, double eps,
                          double rho, const std::vector<double>& search_grid, int p_max,
                          int centers, std::uint64_t seed, const ChartOptions& opts) {
    if (!(rho > 0.0 && rho < 1.0)) throw domain_error("shrink_delta: rho must lie in (0,1)");
    if (search_grid.empty()) throw domain_error("shrink_delta: empty search grid");
    const auto cix = draw_centers(sample, centers, seed);
    std::vector<CenterPass> passes(cix.size());
    parallel_for(cix.size(), [&](std::size_t c) {
        const Vec z = sample.point(cix[c]);
        ChartOrbit orbit(system, z, 0, p_max, opts);
        const LocalTrace trace = local_trace(orbit.chart(0), sample, opts.eps0);
        passes[c] = center_pass(orbit, trace, p_max, eps);
    });
    std::vector<double> grid = search_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    ShrinkResult out;
    for (double delta : grid) {
        double worst = 0.0;
        for (const CenterPass& cp : passes)
            for (int p = 0; p <= p_max; ++p) {
                const BallStats be = ball_stats(cp, p, eps);
                const BallStats bd = ball_stats(cp, p, delta);
                if (bd.count >= 2 && bd.diam > 0.0 && be.diam > 0.0)
                    worst = std::max(worst, bd.diam / be.diam);
            }
        if (worst <= rho) {
            out.delta = delta;
            out.achieved_ratio = worst;
            return out;
        }
        out.delta = delta;
        out.achieved_ratio = worst;
    }
    out.warned = true; // smallest grid value, target not met
    return out;
}

Vec F_p_inverse(const ChartOrbit& orbit, const Vec& target, int p, const PinchConstants& pc,
                int center) {
    // F is a near-identity on its radius; plain Newton with finite differences.
    Vec u = target;
    const double h = 1e-7;
    const int m = static_cast<int>(target.size());
    for (int it = 0; it < 50; ++it) {
        const Vec r = target - F_p(orbit, u, p, pc, center);
        if (r.norm() < 1e-13 * std::max(1e-6, target.norm())) return u;
        Mat j(m, m);
        for (int c = 0; c < m; ++c) {
            Vec up = u, dn = u;
            up[c] += h;
            dn[c] -= h;
            j.col(c) = (F_p(orbit, up, p, pc, center) - F_p(orbit, dn, p, pc, center)) / (2.0 * h);
        }
        u += j.inverse() * r;
    }
    throw orbit_error("F_p_inverse: Newton did not converge");
}

SpanEstimate span_estimate(const ChartOrbit& orbit, const LocalTrace& trace, double delta,
                           const PinchConstants& pc, int p_cap, int center,
                           std::size_t max_members) {
    SpanEstimate se;
    se.delta = delta;
    std::vector<Vec> in;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Vec u = trace.member(i);
        const double nu = u.norm();
        if (nu > 0.0 && nu <= delta) in.push_back(u);
    }
    if (in.empty()) throw domain_error("span_estimate: empty trace at this radius");
    if (in.size() > max_members) {
        std::vector<Vec> sub;
        const double stride = static_cast<double>(in.size()) / static_cast<double>(max_members);
        for (std::size_t j = 0; j < max_members; ++j)
            sub.push_back(in[static_cast<std::size_t>(j * stride)]);
        in.swap(sub);
    }
    std::vector<Vec> images;
    images.reserve(in.size());
    for (const Vec& u : in) images.push_back(F_p(orbit, u, p_cap, pc, center));

    const int m = static_cast<int>(images.front().size());
    Eigen::MatrixXd g(m, static_cast<Eigen::Index>(images.size()));
    for (std::size_t j = 0; j < images.size(); ++j) g.col(static_cast<Eigen::Index>(j)) = images[j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * smax) ++rank;
    se.dim = rank;

    // Greedy maximal-volume basis among the images.
    std::vector<bool> used(images.size(), false);
    for (int pick = 0; pick < rank; ++pick) {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < images.size(); ++j) {
            if (used[j]) continue;
            std::vector<Vec> cand = se.basis;
            cand.push_back(images[j]);
            const double vol = gram_volume(cand);
            if (vol > best) {
                best = vol;
                arg = j;
            }
        }
        used[arg] = true;
        se.basis.push_back(images[arg]);
        se.volume = best;
    }
    return se;
}

Sublemma45Result sublemma45_bound(const SystemPtr& system, const Vec& x,
                                  const std::vector<Vec>& stable_neighbors,
                                  const LambdaSample& sample, double delta, double eps,
                                  int p_max, const PinchConstants& pc, int p_cap,
                                  int holonomy_horizon, const ChartOptions& opts) {
    Sublemma45Result r;
    ChartOrbit ox(system, x, p_cap, 0, opts);
    const LocalTrace tx = local_trace(ox.chart(0), sample, opts.eps0);
    const SpanEstimate se = span_estimate(ox, tx, delta / 2.0, pc, p_cap);
    r.m = se.dim;
    r.basis_volume = se.volume;
    if (!(se.volume > 0.0)) throw domain_error("sublemma45_bound: degenerate basis volume");

    // Pre-images of the basis under F at x (the transported objects live in
    // the linearized traces, so transport goes F_y ∘ H ∘ F_x^{-1}).
    std::vector<Vec> basis_pre;
    for (const Vec& v : se.basis) basis_pre.push_back(F_p_inverse(ox, v, p_cap, pc));

    const int m = r.m;
    double bmax = 0.0;
    std::size_t defined = 0, cells = 0;
    for (const Vec& y : stable_neighbors) {
        ChartOrbit oy(system, y, p_max + p_cap, 0, opts);
        HolonomyMap hol(system, ox.chart(0), oy.chart(0), holonomy_horizon);
        std::vector<Vec> uy;
        Eigen::MatrixXd uymat(m, m);
        for (int j = 0; j < m; ++j) {
            const Vec w = hol.apply(basis_pre[static_cast<std::size_t>(j)]).w;
            const Vec v = F_p(oy, w, p_cap, pc, 0);
            uy.push_back(v);
            uymat.col(j) = v;
        }
        const double voly = gram_volume(uy);
        if (voly < se.volume / 2.0) r.transport_ok = false;
        for (int j = 0; j < m; ++j) {
            const double n0 = se.basis[static_cast<std::size_t>(j)].norm();
            const double n1 = uy[static_cast<std::size_t>(j)].norm();
            if (n1 < 0.5 * n0 || n1 > 2.0 * n0) r.transport_ok = false;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(uymat);
        bmax = std::max(bmax, 1.0 / svd.singularValues().minCoeff());

        // ell ratios of linearized balls at the pulled-back centers; each
        // trace member is pulled back incrementally across p.
        const LocalTrace ty = local_trace(oy.chart(0), sample, opts.eps0);
        std::vector<Vec> members;
        {
            const std::size_t cap = 600;
            const double stride = std::max(1.0, static_cast<double>(ty.size()) / cap);
            for (double j = 0; j < static_cast<double>(ty.size()); j += stride) {
                const Vec u0 = ty.member(static_cast<std::size_t>(j));
                if (u0.norm() <= pc.eps2) members.push_back(u0);
            }
        }
        std::vector<Mat> cocs;
        for (int p = 0; p <= p_max; ++p) cocs.push_back(oy.cocycle0_forward(-p, p));
        std::vector<double> ell_eps(static_cast<std::size_t>(p_max) + 1, 0.0);
        std::vector<double> ell_delta(static_cast<std::size_t>(p_max) + 1, 0.0);
        for (Vec w : members) {
            for (int p = 0; p <= p_max; ++p) {
                if (p > 0) w = oy.hat_f_inverse(-(p - 1), w);
                const Vec v = F_p(oy, w, p_cap, pc, -p);
                const double nv = v.norm();
                const double fwd = (cocs[static_cast<std::size_t>(p)] * v).norm();
                auto& le = ell_eps[static_cast<std::size_t>(p)];
                auto& ld = ell_delta[static_cast<std::size_t>(p)];
                if (nv <= eps && fwd <= eps) le = std::max(le, nv);
                if (nv <= delta && fwd <= delta) ld = std::max(ld, nv);
            }
        }
        for (int p = 0; p <= p_max; ++p) {
            ++cells;
            if (ell_delta[static_cast<std::size_t>(p)] > 0.0) {
                ++defined;
                r.empirical_max = std::max(
                    r.empirical_max,
                    ell_eps[static_cast<std::size_t>(p)] / ell_delta[static_cast<std::size_t>(p)]);
            }
        }
    }
    r.b = bmax;
    r.D_bound = static_cast<double>(m) * eps * bmax;
    r.coverage = cells == 0 ? 0.0 : static_cast<double>(defined) / static_cast<double>(cells);
    return r;
}

} // namespace bowenlab
