#pragma once

#include <cstdint>
#include <vector>

#include "bowenlab/charts.hpp"
#include "bowenlab/linearization.hpp"

namespace bowenlab {

// Exact diameter (max pairwise distance) of a set of chart vectors in SoA
// layout; uses min/max reductions in 1-D and a convex hull in 2-D.
double set_diameter(const std::vector<std::vector<double>>& soa);
// sup of ||u|| over the set (the ell functional).
double set_ell(const std::vector<std::vector<double>>& soa);

/// A finite sample of the invariant set inside a Bowen ball around a chart
/// center: members u with ||f̂^j(u)|| <= eps for all j = 0..p.
struct BowenSample {
    Vec center;
    int p = 0;
    double eps = 0.0;
    std::vector<std::vector<double>> members; // SoA chart vectors
    double diam = 0.0;
    double ell = 0.0;

    std::size_t size() const { return members.empty() ? 0 : members[0].size(); }
    Vec member(std::size_t i) const;
};

BowenSample bowen_ball(const ChartOrbit& orbit, int center, const LocalTrace& trace,
                       int p, double eps);

// Seeded shuffle draw of center indices from the sample.
std::vector<std::size_t> draw_centers(const LambdaSample& sample, int centers,
                                      std::uint64_t seed);

struct DistortionRow {
    int center_ix;
    int p;
    double eps, delta;
    double diam_eps, diam_delta, ratio;
    double ell_eps, ell_delta;
    bool defined;
};

struct DistortionResult {
    double R_hat = 0.0;
    std::vector<double> per_center_max;
    std::vector<DistortionRow> rows;
    double coverage = 0.0; // fraction of (center, p) cells with a defined ratio
};

// diam(B(p,eps)) / diam(B(p,delta)) over sampled centers and p <= p_max.
// Undefined cells (fewer than two delta-members) are excluded and counted
// against coverage.
DistortionResult distortion_R(const SystemPtr& system, const LambdaSample& sample,
                              double delta, double eps, int p_max, int centers,
                              std::uint64_t seed, const ChartOptions& opts = {});

struct ShrinkResult {
    double delta = 0.0;
    bool warned = false; // no grid value satisfied the target ratio
    double achieved_ratio = 0.0;
};

// Largest grid delta whose worst-case diameter ratio against eps stays <= rho.
ShrinkResult shrink_delta(const SystemPtr& system, const LambdaSample& sample, double eps,
                          double rho, const std::vector<double>& search_grid, int p_max,
                          int centers, std::uint64_t seed, const ChartOptions& opts = {});

// Newton inverse of the order-p approximant (F is a near-identity).
Vec F_p_inverse(const ChartOrbit& orbit, const Vec& target, int p, const PinchConstants& pc,
                int center = 0);

/// Span of the linearized trace at small radius: numerical rank and a greedy
/// maximal-volume basis.
struct SpanEstimate {
    double delta = 0.0;
    int dim = 0;
    std::vector<Vec> basis; // linearized trace members (chart coords)
    double volume = 0.0;
};

SpanEstimate span_estimate(const ChartOrbit& orbit, const LocalTrace& trace, double delta,
                           const PinchConstants& pc, int p_cap, int center = 0,
                           std::size_t max_members = 200);

struct Sublemma45Result {
    int m = 0;
    double basis_volume = 0.0;
    double b = 0.0;       // bound on the basis-to-orthonormal operator norm
    double D_bound = 0.0; // m * eps * b
    double empirical_max = 0.0;
    bool transport_ok = true; // volume >= Delta/2 and norms within factor 2
    double coverage = 0.0;
};

// The basis-volume bound: transports a maximal-volume basis from x to
// stable-related neighbors and compares the linearized-ball ell ratios
// against D = m * eps * b.
Sublemma45Result sublemma45_bound(const SystemPtr& system, const Vec& x,
                                  const std::vector<Vec>& stable_neighbors,
                                  const LambdaSample& sample, double delta, double eps,
                                  int p_max, const PinchConstants& pc, int p_cap,
                                  int holonomy_horizon, const ChartOptions& opts = {});

} // namespace bowenlab
