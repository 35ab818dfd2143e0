#pragma once

#include <memory>
#include <vector>

#include "bowenlab/linalg.hpp"
#include "bowenlab/systems.hpp"

namespace bowenlab {

// Default chart radii. eps2 is derived per run from the measured constants
// (see PinchConstants); eps0/eps1 are fixed.
struct ChartOptions {
    double eps0 = 0.2;        // chart radius
    double eps1 = 0.1;        // domain radius of the chart maps
    int frame_warmup = 40;    // power-iteration depth for the deepest frame
    int leaf_backsteps = 30;  // backward depth for numerically grown leaves
    int leaf_samples = 8192;  // polyline resolution for numerically grown leaves
};

/// Parameterization of a local unstable leaf around a base point. `point`
/// evaluates the leaf at a chart parameter; `coords` inverts it for ambient
/// points on (or near) the leaf. Parameters are graph coordinates over the
/// frame, except for the solenoid where the angle plays that role.
class LeafModel {
public:
    virtual ~LeafModel() = default;
    virtual Vec point(const Vec& u) const = 0;
    virtual Vec coords(const Vec& ambient) const = 0;
    // d(point)/du at u = 0 (ambient_dim x m) and d(coords) at the base
    // (m x ambient_dim); both exact so that zero-point Jacobians of chart maps
    // come from the analytic ambient Jacobian.
    virtual Mat param_to_tangent() const = 0;
    virtual Mat ambient_to_param() const = 0;

    // Slow sub-leaf support for systems with an explicit invariant W^{u,1}:
    // ambient offset of the W^{u,1} point at slow parameter t, and the slow
    // parameter of a leaf point given as an ambient offset.
    virtual bool has_u1_leaf() const { return false; }
    virtual Vec u1_offset(double) const;
    virtual double u1_param(const Vec&) const;
};

/// An unstable chart Phi_x: parameters u with ||u|| <= radius to ambient
/// points on the local unstable leaf of the base.
class UnstableChart {
public:
    SystemPtr system;     // the (possibly blocked) system the chart belongs to
    Vec base;
    Subspace frame;       // E^u(x); for split systems ordered slow-then-fast
    double radius = 0.2;  // eps0
    double eps1 = 0.1;
    double chart_C = 1.0; // measured sup of ||dPhi|| and ||dPhi^{-1}||
    std::shared_ptr<const LeafModel> leaf;

    int udim() const { return frame.rank(); }
    Vec point(const Vec& u) const;
    Vec coords(const Vec& ambient) const;
    // Distance from an ambient point to the leaf image of its own chart
    // parameter (the stable-direction offset).
    double transverse_offset(const Vec& ambient) const;
};

/// Charts along a stored orbit of a base point, with frames propagated
/// forward from the deepest point so consecutive charts are consistent.
/// Index i refers to f^i(x) in (block-)steps; i in [-backward, +forward].
class ChartOrbit {
public:
    ChartOrbit(SystemPtr system, const Vec& base, int backward, int forward,
               ChartOptions opts = {});

    const SystemPtr& system() const { return system_; }
    const ChartOptions& options() const { return opts_; }
    int backward() const { return backward_; }
    int forward() const { return forward_; }
    int block() const { return block_; }
    const UnstableChart& chart(int i) const;

    // The chart map f̂_{x_i}: parameters at chart i to parameters at chart i+1.
    // Enforces ||u|| <= eps1 (radius_error) and the projection-error contract
    // (the distance from f(Phi(u)) to the target leaf must be <= 1e-6 ||u||).
    Vec hat_f(int i, const Vec& u, double* projection_error = nullptr) const;
    // Inverse factor: w with f̂_{x_{i-1}}(w) = u, by Newton in chart
    // coordinates (relative tolerance 1e-12, polished to machine precision).
    Vec hat_f_inverse(int i, const Vec& u) const;
    // f̂^p (p >= 0 forward compositions starting at chart i).
    Vec hat_f_iter(int i, Vec u, int p) const;
    // f̂_{x_i}^{-p}: p inverse factors ending at chart i-p. Checks the
    // contraction ||f̂^{-p}(u)|| <= ||u||.
    Vec pullback(int i, const Vec& u, int p) const;

    // Exact Jacobian of the chart map at 0 (maps chart-i to chart-i+1 coords).
    Mat dhat0(int i) const;
    // Jacobian at u by central finite differences with step h (default
    // 1e-6 * eps1 scale).
    Mat dhat(int i, const Vec& u, double h = 0.0) const;
    // d f̂^p at 0 starting from chart i (product of dhat0 along the way).
    Mat cocycle0_forward(int i, int p) const;

private:
    void build_chart(int i) const;

    SystemPtr system_; // possibly blocked
    SystemPtr base_;   // underlying unit-step system
    int block_ = 1;
    int backward_ = 0, forward_ = 0;
    ChartOptions opts_;
    std::shared_ptr<Orbit> orbit_; // base-resolution orbit
    int frame_lo_ = 0;             // lowest base index with a stored frame
    std::vector<Subspace> frames_; // per base index
    mutable std::vector<std::unique_ptr<UnstableChart>> charts_; // per block index
};

// Displacement dynamics along a stored orbit: returns the displacement after
// `steps` forward steps of the base system, computed as local differences
// f(x_j + d) - f(x_j) so the anchor never drifts.
Vec push_displacement(const SystemPtr& base, const Orbit& orbit, int start_index,
                      Vec displacement, int steps);

// Inverse displacement dynamics: given a displacement at orbit index
// `end_index`, solves for the displacement at end_index - steps by Newton on
// the lifted local difference (relative accuracy, so tiny displacements keep
// their full mantissa).
Vec pull_displacement(const SystemPtr& base, const Orbit& orbit, int end_index,
                      Vec displacement, int steps);

/// A local trace: chart parameters u with Phi_x(u) in the invariant-set
/// sample and ||u|| <= eps.
struct LocalTrace {
    const UnstableChart* chart = nullptr;
    double eps = 0.0;
    double resolution = 0.0; // spacing of the uniform part (or sample spacing)
    // SoA: coords[d][i] is component d of member i (d < udim).
    std::vector<std::vector<double>> coords;

    std::size_t size() const { return coords.empty() ? 0 : coords[0].size(); }
    Vec member(std::size_t i) const;
};

// Trace extraction. Toral systems (invariant set = whole torus) sample the
// leaf directly: a uniform part whose density follows the sample budget plus
// a two-sided geometric ladder toward 0 so deep Bowen balls stay resolved.
// The solenoid filters the attractor sample by same-leaf membership.
LocalTrace local_trace(const UnstableChart& chart, const LambdaSample& sample, double eps);

// Transverse tolerance used by the solenoid trace filter.
double trace_tolerance(const SystemModel& system);

} // namespace bowenlab
