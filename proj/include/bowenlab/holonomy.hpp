#pragma once

#include "bowenlab/charts.hpp"

namespace bowenlab {

struct HolonomyResult {
    Vec w;           // target-chart coordinates of the transported point
    double residual; // forward distance at the matching horizon
};

/// Local stable holonomy between the unstable charts of two stable-related
/// centers: source parameter u maps to the target parameter whose forward
/// orbit matches. Linear/product systems transport exactly; otherwise the
/// match is found by Gauss-Newton on the forward displacement at `horizon`.
class HolonomyMap {
public:
    HolonomyMap(SystemPtr system, const UnstableChart& source, const UnstableChart& target,
                int horizon = 25, double holonomy_tol = 1e-6);

    HolonomyResult apply(const Vec& u) const;
    int horizon() const { return horizon_; }
    double tol() const { return tol_; }

private:
    SystemPtr system_;
    const UnstableChart* src_;
    const UnstableChart* dst_;
    int horizon_;
    double tol_;
    bool exact_;
    std::shared_ptr<Orbit> dst_orbit_; // forward orbit of the target base
};

// Convenience form of the map; throws holonomy_error when the residual
// exceeds holonomy_tol.
HolonomyResult stable_holonomy(const SystemPtr& system, const UnstableChart& chart_x,
                               const UnstableChart& chart_y, const Vec& u, int horizon,
                               double holonomy_tol = 1e-6);

// A point at (approximate) stable distance s from x, grown by pulling a
// stable-direction seed back from f^{+n}(x). Exact for linear systems.
Vec stable_related_point(const SystemPtr& system, const Vec& x, double s, int n = 20);

} // namespace bowenlab
