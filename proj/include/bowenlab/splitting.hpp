#pragma once

#include <optional>
#include <vector>

#include "bowenlab/charts.hpp"
#include "bowenlab/linearization.hpp"

namespace bowenlab {

struct RateInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Estimated dominated splitting of the unstable bundle at a chart center,
/// in chart coordinates: E1 the slow part, E2 the fast part (absent for
/// one-dimensional unstable bundles).
struct SplittingEstimate {
    Vec base;
    Subspace E1;
    std::optional<Subspace> E2;
    RateInterval rates1, rates2;
    int horizon = 0;
    bool dominated = true;    // rates1.hi < rates2.lo when E2 exists
    double angle_floor = 0.0; // min principal angle between E1 and E2
};

// Forward power iteration for the fast part, backward iteration of the
// inverse cocycle for the slow part; rate intervals from windows of length
// `window` on the second half of the horizon. The orbit must span
// [-horizon, +horizon].
SplittingEstimate estimate_splitting(const ChartOrbit& orbit, int horizon, int window = 10);
SplittingEstimate estimate_splitting(const SystemPtr& system, const Vec& x, int horizon,
                                     const ChartOptions& opts = {}, int window = 10);

/// The norm ||u||' = max(||u1||, ||u2||) for the oblique decomposition
/// u = u1 + u2 along an estimated splitting.
struct PrimeNormContext {
    int m1 = 0;
    Mat S, Sinv; // columns: E1 basis then E2 basis
    Mat P1, P2;  // oblique projectors; idempotent, sum to identity

    static PrimeNormContext from(const SplittingEstimate& split);
    Vec c1(const Vec& u) const { return (Sinv * u).head(m1); }
    Vec c2(const Vec& u) const { return (Sinv * u).tail(S.cols() - m1); }
    double prime_norm(const Vec& u) const;
};

struct PinchRow {
    int center_ix;
    double alpha_hat;
    double beta_hat;
    double pinch_margin; // 2 alpha_hat - beta_hat
    bool pass;           // pinch_margin >= alpha_config
};

// Per-center finite-time pinching table on the slow unstable part.
std::vector<PinchRow> pinching_report(const SystemPtr& system, const LambdaSample& sample,
                                      int horizon, int centers, double alpha_config,
                                      const ChartOptions& opts = {});

// Unstable bracket projection pi^{u,1}: the E1-component of the intersection
// of W^{u,2}(Phi(u)) with W^{u,1}(center). Exact oblique projection for
// linear systems; explicit invariant leaves for the perturbed product.
Vec project_u1(const ChartOrbit& orbit, int center, const SplittingEstimate& split,
               const Vec& u);

/// Trace members surviving the ||.||'-Bowen condition, projected to E1.
struct B1Set {
    int p = 0;
    double eps = 0.0;
    std::vector<std::vector<double>> e1_coeffs; // SoA, m1 rows
    double diam_prime = 0.0;      // diameter of the E1 projections
    double diam_prime_full = 0.0; // ||.||' diameter of the surviving full set
    std::size_t count = 0;
};

B1Set check_b1_set(const ChartOrbit& orbit, int center, const LocalTrace& trace, int p,
                   double eps, const PrimeNormContext& ctx);

struct OmegaReport {
    double omega = 0.0;
    bool violation = false; // omega vanished: the (I) surrogate failed
    std::size_t centers_used = 0;
    std::size_t centers_excluded = 0; // empty traces
};

// min over centers of max over trace members of ||u1||.
OmegaReport omega_eps(const SystemPtr& system, const LambdaSample& sample, int centers,
                      double eps, int horizon, const ChartOptions& opts = {});
// Lower-level form for constructed traces (negative controls).
OmegaReport omega_eps_from(const std::vector<const LocalTrace*>& traces,
                           const std::vector<const PrimeNormContext*>& contexts, double eps);

// Least integer p >= 1 with (mu2/lambda1)^p >= eps/omega.
int p_eps(double eps, double omega, double mu2, double lambda1);

// E1-restricted chart map (slow sub-leaf dynamics) and its pullback-based
// linearization; charts must carry splitting-aligned frames with an explicit
// slow sub-leaf (the product family), except that for one-dimensional
// unstable bundles these coincide with hat_f / F_p.
double hat_f_u1(const ChartOrbit& orbit, int i, double c1);
Vec linearize_E1(const ChartOrbit& orbit, const Vec& u1, int p, const PinchConstants& pc,
                 int center = 0);

// Sup deviation of the fast foliation leaf through the center from the E2
// axis, computed by the forward graph transform (pushing a seeded segment
// `iters` steps); cross-checks the closed-form coordinate leaves.
double w2_leaf_deviation(const ChartOrbit& orbit, int iters, double brange, int grid = 33);

} // namespace bowenlab
