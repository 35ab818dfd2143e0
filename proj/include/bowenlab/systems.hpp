#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bowenlab/linalg.hpp"
#include "bowenlab/types.hpp"

namespace bowenlab {

enum class Topology { torus2, torus4, solid_torus };

// Golden-mean eigenvalue of the cat matrix [[2,1],[1,1]].
inline const double kCatLambda = (3.0 + std::sqrt(5.0)) / 2.0;

/// Closed-form per-unit-step expansion rates, available for linear systems.
struct KnownRates {
    double alpha; // slowest unstable rate (ln of eigenvalue)
    double beta;  // fastest unstable rate
};

class SystemModel;
using SystemPtr = std::shared_ptr<const SystemModel>;

/// A discrete-time hyperbolic map behind one uniform interface. Immutable;
/// all operations are pure, so instances are safe to share across workers.
class SystemModel {
public:
    virtual ~SystemModel() = default;

    const std::string& name() const { return name_; }
    int ambient_dim() const { return ambient_dim_; }
    int unstable_dim() const { return unstable_dim_; }
    // Dimension of the slow unstable sub-bundle under the declared splitting;
    // equals unstable_dim for systems without one.
    int u1_dim() const { return u1_dim_; }
    Topology topology() const { return topology_; }
    const std::map<std::string, double>& params() const { return params_; }
    std::optional<KnownRates> known_rates() const { return known_rates_; }
    // True when the invariant set is the whole manifold (toral Anosov case).
    bool lambda_covers_space() const { return lambda_covers_space_; }
    // Number of leading coordinates that live on the circle (reduced mod 1).
    int periodic_coords() const { return periodic_coords_; }

    virtual Vec step(const Vec& x) const = 0;
    virtual Vec inverse_step(const Vec& x) const = 0;
    virtual Mat jacobian(const Vec& x) const = 0;
    // The map evaluated on the universal cover (no mod reduction); used for
    // displacement dynamics along stored orbits.
    virtual Vec step_lift(const Vec& x) const = 0;

    // Block-exponent introspection: k > 1 when this system is f^k of a base map.
    virtual int block_exponent() const { return 1; }
    virtual SystemPtr base_system() const { return nullptr; }

    Vec reduce(const Vec& x) const;
    // Minimal representative of (to - from) on the cover.
    Vec displacement(const Vec& from, const Vec& to) const;
    double distance(const Vec& a, const Vec& b) const;

protected:
    SystemModel(std::string name, int ambient, int unstable, int u1, Topology top,
                std::map<std::string, double> params, std::optional<KnownRates> rates,
                bool covers, int periodic)
        : name_(std::move(name)), ambient_dim_(ambient), unstable_dim_(unstable),
          u1_dim_(u1), topology_(top), params_(std::move(params)),
          known_rates_(rates), lambda_covers_space_(covers), periodic_coords_(periodic) {}

private:
    std::string name_;
    int ambient_dim_;
    int unstable_dim_;
    int u1_dim_;
    Topology topology_;
    std::map<std::string, double> params_;
    std::optional<KnownRates> known_rates_;
    bool lambda_covers_space_;
    int periodic_coords_;
};

// Shipped systems. Parameters outside the stated ranges throw domain_error.
SystemPtr make_cat();
SystemPtr make_pcat(double eta);              // eta in [0, 0.05]
SystemPtr make_solenoid(double a, double lambda); // lambda in (0, 0.2]
SystemPtr make_prod4(double eta);             // eta in [0, 0.05]; 0 = linear

// Factory from a name and parameter map (CLI configs). Understands
// cat, pcat, solenoid, prod4, prod4-linear, prod4-perturbed.
SystemPtr make_system(const std::string& name, const std::map<std::string, double>& params);

// Wraps a system so one step means k steps of the base map (the block
// exponent substituting f^k for f).
SystemPtr make_blocked(SystemPtr base, int k);

enum class Provenance { dense_grid, attractor_orbit };

/// A finite sample of (an approximation of) the invariant set.
struct LambdaSample {
    SystemPtr system;
    Provenance provenance = Provenance::dense_grid;
    double hausdorff_tol = 0.0; // measured one-sided Hausdorff estimate d(f(S), S)
    std::uint64_t seed = 0;
    std::uint64_t budget = 0;
    // SoA layout (kernel-friendly): coord[d][i] is coordinate d of point i.
    std::vector<std::vector<double>> coord;

    std::size_t size() const { return coord.empty() ? 0 : coord[0].size(); }
    Vec point(std::size_t i) const;
};

// Deterministic sampler: low-discrepancy grid for toral systems, seeded
// attractor orbit (1e3 transient discarded) for the solenoid.
LambdaSample sample_lambda(const SystemPtr& system, std::uint64_t budget, std::uint64_t seed);

// Estimate of sup_{s in probe subset} dist(f(s), S); the value stored in
// LambdaSample::hausdorff_tol.
double sample_invariance_defect(const LambdaSample& sample, std::size_t probes = 512);

// Orbit helpers. Backward orbits use inverse_step and may throw orbit_error
// or branch_error.
Vec iterate(const SystemPtr& system, Vec x, int n);

/// A stored orbit segment x_{-backward}, ..., x_0, ..., x_{+forward} with
/// x_0 = base. index 0 maps to base.
class Orbit {
public:
    Orbit(SystemPtr system, const Vec& base, int backward, int forward);
    const Vec& at(int i) const; // i in [-backward, forward]
    int backward() const { return backward_; }
    int forward() const { return forward_; }
    const SystemPtr& system() const { return system_; }
    void extend_backward(int n);
    void extend_forward(int n);

private:
    SystemPtr system_;
    int backward_, forward_;
    std::vector<Vec> pts_; // pts_[i + backward_]
};

// Dominant subspace of the Jacobian cocycle: pushes a deterministic frame
// forward `warmup` steps from f^{-warmup}(x), re-orthonormalizing each step.
Subspace unstable_direction(const SystemPtr& system, const Vec& x, int warmup);

// Stable direction = unstable direction of the inverse map (pulled backward
// from f^{+warmup}(x)).
Subspace stable_direction(const SystemPtr& system, const Vec& x, int warmup);

// Product of ambient Jacobians along the orbit of x: Df(f^{n-1}x)...Df(x) for
// n > 0, inverse Jacobians for n < 0, identity for n = 0.
CocycleProduct cocycle(const SystemPtr& system, const Vec& x, int n);

} // namespace bowenlab
