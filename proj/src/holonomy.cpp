#include "bowenlab/holonomy.hpp"

#include <cmath>

#include "bowenlab/errors.hpp"

namespace bowenlab {

namespace {

SystemPtr unblocked(const SystemPtr& system) {
    auto base = system->base_system();
    return base ? base : system;
}

bool exact_transport(const SystemModel& base) {
    const auto& p = base.params();
    auto eta = p.find("eta");
    if (eta != p.end()) return eta->second == 0.0;
    return true; // cat, solenoid: unstable coordinates transport unchanged
}

} // namespace

HolonomyMap::HolonomyMap(SystemPtr system, const UnstableChart& source,
                         const UnstableChart& target, int horizon, double holonomy_tol)
    : system_(unblocked(std::move(system))), src_(&source), dst_(&target),
      horizon_(horizon), tol_(holonomy_tol), exact_(exact_transport(*system_)) {}

HolonomyResult HolonomyMap::apply(const Vec& u) const {
    if (u.norm() > src_->radius * (1.0 + 1e-9))
        throw radius_error("holonomy: ||u|| exceeds the source chart radius");

    const Vec p = src_->point(u);
    Orbit po(system_, p, 0, horizon_);
    auto forward_gap = [&](const Vec& w) {
        const Vec q = dst_->point(w);
        return push_displacement(system_, po, 0, system_->displacement(p, q), horizon_);
    };

    Vec w = u;
    if (!exact_) {
        const int m = src_->udim();
        const double h = 1e-8;
        for (int it = 0; it < 40; ++it) {
            const Vec gap = forward_gap(w);
            Mat j(system_->ambient_dim(), m);
            for (int c = 0; c < m; ++c) {
                Vec wp = w, wm = w;
                wp[c] += h;
                wm[c] -= h;
                j.col(c) = (forward_gap(wp) - forward_gap(wm)) / (2.0 * h);
            }
            const Mat jtj = j.transpose() * j;
            const Vec stepv = jtj.inverse() * (j.transpose() * gap);
            w -= stepv;
            if (stepv.norm() < 1e-13 * (1.0 + w.norm())) break;
        }
    }
    return {w, forward_gap(w).norm()};
}

HolonomyResult stable_holonomy(const SystemPtr& system, const UnstableChart& chart_x,
                               const UnstableChart& chart_y, const Vec& u, int horizon,
                               double holonomy_tol) {
    HolonomyMap map(system, chart_x, chart_y, horizon, holonomy_tol);
    HolonomyResult r = map.apply(u);
    if (r.residual > holonomy_tol)
        throw holonomy_error("stable holonomy residual exceeds tolerance");
    return r;
}

Vec stable_related_point(const SystemPtr& system, const Vec& x, double s, int n) {
    const SystemPtr base = unblocked(system);

    if (base->topology() == Topology::solid_torus) {
        // Fibers are stable leaves: same angle, displaced in z.
        Vec y = x;
        y[1] += s;
        return y;
    }
    if (base->known_rates()) {
        // Linear system: the stable eigenspace is exact.
        const Subspace sd = stable_direction(base, x, 40);
        Vec dir = sd.basis().col(0);
        if (dir[0] < 0.0) dir = -dir;
        return base->reduce(x + s * dir);
    }

    // General case: seed along the measured stable direction at f^{+n}(x) and
    // pull the displacement back; unstable contamination contracts on the way.
    Orbit orbit(base, x, 0, n);
    const Subspace sd = stable_direction(base, orbit.at(n), 40);
    Vec dir = sd.basis().col(0);
    if (dir[0] < 0.0) dir = -dir;

    double seed = s * std::pow(0.2, n); // coarse contraction guess, refined below
    Vec probe = pull_displacement(base, orbit, n, Vec(dir * seed), n);
    seed *= s / probe.norm();
    Vec d = pull_displacement(base, orbit, n, Vec(dir * seed), n);
    return base->reduce(x + d);
}

} // namespace bowenlab
