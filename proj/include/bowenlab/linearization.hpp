#pragma once

#include <vector>

#include "bowenlab/charts.hpp"

namespace bowenlab {

/// Constants governing the iterative linearization: chart bound C, unstable
/// rate window [alpha, beta] per base step, block exponent k (one step of the
/// blocked map is f^k), contraction factor gamma = 8 C^3 exp(-alpha k / 2),
/// Taylor remainder constant D of the blocked chart maps, and the working
/// radius eps2 derived from the smallness conditions.
struct PinchConstants {
    double C = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    int t0_blocks = 1;
    double gamma = 0.0;
    double D = 0.0;
    double eps2 = 0.0;

    static double gamma_of(double C, double alpha, int k);
    // Throws pinch_violation unless gamma < 1, alpha <= beta, D >= 0.
    void validate() const;
};

// Finite-time per-step rates of the slow unstable sub-bundle, measured over
// windows of length `window` on the second half of the horizon.
struct RateEstimate {
    double alpha_hat; // min over centers and windows of (1/w) ln m(window)
    double beta_hat;  // max over centers and windows of (1/w) ln ||window||
};
RateEstimate finite_time_rates(const SystemPtr& base_system, const LambdaSample& sample,
                               int centers, int horizon, const ChartOptions& opts = {},
                               int window = 10);

// Max over probe pairs of ||f̂(v) - f̂(u) - df̂(u)(v-u)|| / ||v-u||^2 with df̂
// by central differences (step 1e-6). Deterministic probe set.
double estimate_taylor_D(const SystemPtr& system, const std::vector<Vec>& base_points,
                         double eps1, const ChartOptions& opts = {},
                         int pairs_per_point = 10);

// Measures rates and C, picks the smallest block exponent with
// gamma < gamma_target, estimates D for the blocked map, and derives eps2
// from the smallness conditions (the two eps1 bounds), halved.
PinchConstants calibrate_pinch(const SystemPtr& base_system, const LambdaSample& sample,
                               int centers, int horizon, const ChartOptions& opts = {},
                               double gamma_target = 0.9);

// The order-p approximant F^{(p)}_x(u) = df̂^p_{f^{-p}x}(0) · f̂_x^{-p}(u),
// evaluated at the chart with index `center` of the given orbit. Enforces
// ||u|| <= eps2, gamma < 1, and the range bound ||F|| <= 2 eps2.
Vec F_p(const ChartOrbit& orbit, const Vec& u, int p, const PinchConstants& pc,
        int center = 0);

// || df̂_x^{-q}(0) F_p(u) - F_p at f^{-q}(x) applied to f̂_x^{-q}(u) ||.
double conjugacy_residual(const ChartOrbit& orbit, const Vec& u, int p, int q,
                          const PinchConstants& pc, int center = 0);

// L^{(p)}_{x,xi} = df̂^p_{f^{-p}x}(f̂^{-p}(xi)) ∘ df̂_x^{-p}(0); requires
// ||xi|| <= eps2/2. Operator norm must stay within 2 + slack.
Mat L_operator(const ChartOrbit& orbit, const Vec& xi, int p, const PinchConstants& pc,
               int center = 0);

struct Lemma33a {
    double lhs;      // ||df̂^p_z(0) v - f̂^p_z(v)||
    double rhs_base; // ||f̂^p_z(v)||^2
    double fwd_norm; // ||f̂^p_z(v)||
    double lin_norm; // ||df̂^p_z(0) v||
};
// Forward comparison at chart `center`; throws radius_error if the forward
// iterate leaves eps2.
Lemma33a lemma33a_check(const ChartOrbit& orbit, const Vec& v, int p, double eps2,
                        int center = 0);

// Residual of the discrete intertwining d f̂_x(0) · F_p(u) = F_p at f(x) ∘ f̂_x(u).
double equivariance_residual(const ChartOrbit& orbit, const Vec& u, int p,
                             const PinchConstants& pc);

struct GeometricFit {
    double gamma_hat = 0.0;
    double C1_hat = 0.0;
    int points = 0;
};
// Pooled OLS of ln(increment / ||u||^2) against p, discarding p <= 2.
GeometricFit fit_geometric(const std::vector<std::vector<double>>& increments,
                           const std::vector<double>& probe_norms, int p_min = 3);

/// Iterative-limit diagnostics over a probe set.
struct LinearizationState {
    int order = 0; // deepest p computed
    std::vector<Vec> probes;
    std::vector<std::vector<Vec>> values;        // values[i][p-1] = F^{(p)}(u_i)
    std::vector<std::vector<double>> increments; // increments[i][p-1] = ||F^{(p+1)} - F^{(p)}||
    double gamma_hat = 0.0;
    double C1_hat = 0.0;
};

LinearizationState run_linearization(const ChartOrbit& orbit, const std::vector<Vec>& probes,
                                     int p_max, const PinchConstants& pc);

} // namespace bowenlab
