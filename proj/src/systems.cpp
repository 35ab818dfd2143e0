#include "bowenlab/systems.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <unordered_map>

#include "bowenlab/errors.hpp"
#include "bowenlab/rng.hpp"

namespace bowenlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double mod1(double v) { return v - std::floor(v); }

// Minimal circle displacement in [-0.5, 0.5].
inline double circ(double d) { return d - std::round(d); }

const Eigen::Matrix2d kCatA = (Eigen::Matrix2d() << 2, 1, 1, 1).finished();
const Eigen::Matrix2d kCatAinv = (Eigen::Matrix2d() << 1, -1, -1, 2).finished();
const Eigen::Matrix2d kCatA2 = kCatA * kCatA;
const Eigen::Matrix2d kCatA2inv = kCatAinv * kCatAinv;

} // namespace

Vec SystemModel::reduce(const Vec& x) const {
    Vec r = x;
    for (int i = 0; i < periodic_coords_; ++i) r[i] = mod1(r[i]);
    return r;
}

Vec SystemModel::displacement(const Vec& from, const Vec& to) const {
    Vec d = to - from;
    for (int i = 0; i < periodic_coords_; ++i) d[i] = circ(d[i]);
    return d;
}

double SystemModel::distance(const Vec& a, const Vec& b) const {
    return displacement(a, b).norm();
}

// ---------------------------------------------------------------------------
// cat: the hyperbolic toral automorphism A = [[2,1],[1,1]] on T^2.

class CatMap final : public SystemModel {
public:
    CatMap()
        : SystemModel("cat", 2, 1, 1, Topology::torus2, {},
                      KnownRates{std::log(kCatLambda), std::log(kCatLambda)},
                      /*covers=*/true, /*periodic=*/2) {}

    Vec step(const Vec& x) const override { return reduce(step_lift(x)); }
    Vec step_lift(const Vec& x) const override {
        return vec2(2.0 * x[0] + x[1], x[0] + x[1]);
    }
    Vec inverse_step(const Vec& x) const override {
        return reduce(vec2(x[0] - x[1], -x[0] + 2.0 * x[1]));
    }
    Mat jacobian(const Vec&) const override { return kCatA; }
};

// ---------------------------------------------------------------------------
// pcat: cat plus the shear perturbation x -> Ax + eta*(sin 2*pi*x2, 0)/(2*pi).

class PerturbedCat final : public SystemModel {
public:
    explicit PerturbedCat(double eta)
        : SystemModel("pcat", 2, 1, 1, Topology::torus2, {{"eta", eta}}, std::nullopt,
                      true, 2),
          eta_(eta) {
        if (eta < 0.0 || eta > 0.05)
            throw domain_error("pcat: eta must lie in [0, 0.05]");
    }

    Vec step(const Vec& x) const override { return reduce(step_lift(x)); }
    Vec step_lift(const Vec& x) const override {
        return vec2(2.0 * x[0] + x[1] + eta_ * std::sin(kTwoPi * x[1]) / kTwoPi,
                    x[0] + x[1]);
    }
    Vec inverse_step(const Vec& y) const override {
        // Newton from the unperturbed inverse; contraction is strong at eta <= 0.05.
        Vec x = reduce(vec2(y[0] - y[1], -y[0] + 2.0 * y[1]));
        for (int it = 0; it < 50; ++it) {
            Vec r = displacement(step(x), y);
            if (r.norm() < 1e-13) return x;
            Mat j = jacobian(x);
            x = reduce(x + Vec(j.inverse() * r));
        }
        if (displacement(step(x), y).norm() < 1e-10) return x;
        throw orbit_error("pcat: inverse Newton did not converge in 50 iterations");
    }
    Mat jacobian(const Vec& x) const override {
        Mat j(2, 2);
        j << 2.0, 1.0 + eta_ * std::cos(kTwoPi * x[1]), 1.0, 1.0;
        return j;
    }

private:
    double eta_;
};

// ---------------------------------------------------------------------------
// solenoid: (theta, z) -> (2*theta mod 1, lambda*z + a*e(theta)) on the solid
// torus S^1 x D^2, with e(theta) = (cos 2*pi*theta, sin 2*pi*theta).

class Solenoid final : public SystemModel {
public:
    Solenoid(double a, double lambda)
        : SystemModel("solenoid", 3, 1, 1, Topology::solid_torus,
                      {{"a", a}, {"lambda", lambda}},
                      KnownRates{std::log(2.0), std::log(2.0)}, false, 1),
          a_(a), lambda_(lambda) {
        if (lambda <= 0.0 || lambda > 0.2)
            throw domain_error("solenoid: lambda must lie in (0, 0.2]");
        if (a <= 0.0 || a > 1.0)
            throw domain_error("solenoid: a must lie in (0, 1]");
    }

    double attractor_radius() const { return a_ / (1.0 - lambda_); }

    Vec step(const Vec& x) const override { return reduce(step_lift(x)); }
    Vec step_lift(const Vec& x) const override {
        return vec3(2.0 * x[0],
                    lambda_ * x[1] + a_ * std::cos(kTwoPi * x[0]),
                    lambda_ * x[2] + a_ * std::sin(kTwoPi * x[0]));
    }
    Vec inverse_step(const Vec& x) const override {
        // Two angle-halving branches; on the attractor exactly one keeps the
        // fiber coordinate inside the invariant disk of radius a/(1-lambda).
        const double rad = attractor_radius() * (1.0 + 1e-9) + 1e-12;
        Vec best;
        int hits = 0;
        for (int b = 0; b < 2; ++b) {
            const double th = mod1(x[0] / 2.0 + 0.5 * b);
            const double z1 = (x[1] - a_ * std::cos(kTwoPi * th)) / lambda_;
            const double z2 = (x[2] - a_ * std::sin(kTwoPi * th)) / lambda_;
            if (std::hypot(z1, z2) <= rad) {
                best = vec3(th, z1, z2);
                ++hits;
            }
        }
        if (hits != 1)
            throw branch_error("solenoid: no consistent inverse branch (point off the attractor)");
        return best;
    }
    Mat jacobian(const Vec& x) const override {
        Mat j(3, 3);
        const double s = std::sin(kTwoPi * x[0]);
        const double c = std::cos(kTwoPi * x[0]);
        j << 2.0, 0.0, 0.0,
            -kTwoPi * a_ * s, lambda_, 0.0,
            kTwoPi * a_ * c, 0.0, lambda_;
        return j;
    }

private:
    double a_, lambda_;
};

// ---------------------------------------------------------------------------
// prod4: block diag(A, A^2) on T^4; eta > 0 couples the blocks by a skew term
// driven by the slow block, f(x12, x34) = (A x12, A^2 x34 + eta*g(x12)).

class Prod4 final : public SystemModel {
public:
    explicit Prod4(double eta)
        : SystemModel(eta == 0.0 ? "prod4-linear" : "prod4", 4, 2, 1, Topology::torus4,
                      {{"eta", eta}},
                      eta == 0.0
                          ? std::optional<KnownRates>(KnownRates{std::log(kCatLambda),
                                                                 2.0 * std::log(kCatLambda)})
                          : std::nullopt,
                      true, 4),
          eta_(eta) {
        if (eta < 0.0 || eta > 0.05)
            throw domain_error("prod4: eta must lie in [0, 0.05]");
    }

    double eta() const { return eta_; }

    Vec step(const Vec& x) const override { return reduce(step_lift(x)); }
    Vec step_lift(const Vec& x) const override {
        Vec y(4);
        y[0] = 2.0 * x[0] + x[1];
        y[1] = x[0] + x[1];
        y[2] = 5.0 * x[2] + 3.0 * x[3] + eta_ * std::sin(kTwoPi * x[0]) / kTwoPi;
        y[3] = 3.0 * x[2] + 2.0 * x[3] + eta_ * std::sin(kTwoPi * x[1]) / kTwoPi;
        return y;
    }
    Vec inverse_step(const Vec& y) const override {
        // The skew structure inverts in closed form: slow block first.
        Eigen::Vector2d s = kCatAinv * Eigen::Vector2d(y[0], y[1]);
        const double sx = mod1(s[0]), sy = mod1(s[1]);
        Eigen::Vector2d fast(y[2] - eta_ * std::sin(kTwoPi * sx) / kTwoPi,
                             y[3] - eta_ * std::sin(kTwoPi * sy) / kTwoPi);
        Eigen::Vector2d f = kCatA2inv * fast;
        return vec4(sx, sy, mod1(f[0]), mod1(f[1]));
    }
    Mat jacobian(const Vec& x) const override {
        Mat j = Mat::Zero(4, 4);
        j.block<2, 2>(0, 0) = kCatA;
        j.block<2, 2>(2, 2) = kCatA2;
        j(2, 0) = eta_ * std::cos(kTwoPi * x[0]);
        j(3, 1) = eta_ * std::cos(kTwoPi * x[1]);
        return j;
    }

private:
    double eta_;
};

// ---------------------------------------------------------------------------

class BlockedSystem final : public SystemModel {
public:
    BlockedSystem(SystemPtr base, int k)
        : SystemModel(base->name() + "^" + std::to_string(k), base->ambient_dim(),
                      base->unstable_dim(), base->u1_dim(), base->topology(),
                      scaled_params(*base, k), scaled_rates(*base, k),
                      base->lambda_covers_space(), base->periodic_coords()),
          base_(std::move(base)), k_(k) {
        if (k < 1) throw domain_error("block exponent must be >= 1");
    }

    Vec step(const Vec& x) const override {
        Vec y = x;
        for (int i = 0; i < k_; ++i) y = base_->step(y);
        return y;
    }
    Vec step_lift(const Vec& x) const override {
        Vec y = x;
        for (int i = 0; i < k_; ++i) y = base_->step_lift(y);
        return y;
    }
    Vec inverse_step(const Vec& x) const override {
        Vec y = x;
        for (int i = 0; i < k_; ++i) y = base_->inverse_step(y);
        return y;
    }
    Mat jacobian(const Vec& x) const override {
        Vec y = x;
        Mat j = base_->jacobian(y);
        for (int i = 1; i < k_; ++i) {
            y = base_->step(y);
            j = base_->jacobian(y) * j;
        }
        return j;
    }

    int block_exponent() const override { return k_; }
    SystemPtr base_system() const override { return base_; }

private:
    static std::map<std::string, double> scaled_params(const SystemModel& b, int k) {
        auto p = b.params();
        p["block"] = static_cast<double>(k);
        return p;
    }
    static std::optional<KnownRates> scaled_rates(const SystemModel& b, int k) {
        if (auto r = b.known_rates()) return KnownRates{r->alpha * k, r->beta * k};
        return std::nullopt;
    }

    SystemPtr base_;
    int k_;
};

SystemPtr make_cat() { return std::make_shared<CatMap>(); }
SystemPtr make_pcat(double eta) { return std::make_shared<PerturbedCat>(eta); }
SystemPtr make_solenoid(double a, double lambda) { return std::make_shared<Solenoid>(a, lambda); }
SystemPtr make_prod4(double eta) { return std::make_shared<Prod4>(eta); }
SystemPtr make_blocked(SystemPtr base, int k) {
    if (k == 1) return base;
    return std::make_shared<BlockedSystem>(std::move(base), k);
}

SystemPtr make_system(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "cat") return make_cat();
    if (name == "pcat") return make_pcat(get("eta", 0.03));
    if (name == "solenoid") return make_solenoid(get("a", 0.5), get("lambda", 0.1));
    if (name == "prod4" || name == "prod4-perturbed") return make_prod4(get("eta", name == "prod4-perturbed" ? 0.02 : 0.0));
    if (name == "prod4-linear") return make_prod4(0.0);
    throw domain_error("unknown system: " + name);
}

// ---------------------------------------------------------------------------
// Sampling

Vec LambdaSample::point(std::size_t i) const {
    Vec p(static_cast<Eigen::Index>(coord.size()));
    for (std::size_t d = 0; d < coord.size(); ++d) p[static_cast<Eigen::Index>(d)] = coord[d][i];
    return p;
}

namespace {

// Kronecker (R_d) low-discrepancy sequences; the generators are powers of the
// generalized golden ratios.
const double kR2[2] = {0.7548776662466927, 0.5698402909980532};
const double kR4[4] = {0.8566748838545029, 0.7338918566271259,
                       0.6287067210378086, 0.5385972572236101};

struct SpatialHash {
    double cell;
    int dim;
    int periodic;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;

    static std::uint64_t key_of(const long long* c, int dim) {
        std::uint64_t k = 0x9e3779b97f4a7c15ULL;
        for (int d = 0; d < dim; ++d)
            k = CounterRng::mix(k ^ static_cast<std::uint64_t>(c[d] + (1LL << 32)));
        return k;
    }

    void insert(const LambdaSample& s) {
        dim = static_cast<int>(s.coord.size());
        periodic = s.system->periodic_coords();
        const std::size_t n = s.size();
        cells.reserve(n);
        long long c[4];
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < dim; ++d) c[d] = static_cast<long long>(std::floor(s.coord[d][i] / cell));
            cells[key_of(c, dim)].push_back(static_cast<std::uint32_t>(i));
        }
    }

    double nearest(const LambdaSample& s, const Vec& p) const {
        const long long cells_per_circle = static_cast<long long>(std::llround(1.0 / cell));
        long long base[4];
        for (int d = 0; d < dim; ++d) base[d] = static_cast<long long>(std::floor(p[d] / cell));
        double best = std::numeric_limits<double>::infinity();
        // Expand the ring search until a hit is found one ring beyond the best.
        for (int ring = 0; ring < 64; ++ring) {
            bool found_this_ring = false;
            long long off[4] = {0, 0, 0, 0};
            std::function<void(int)> walk = [&](int d) {
                if (d == dim) {
                    long long maxabs = 0;
                    for (int t = 0; t < dim; ++t) maxabs = std::max(maxabs, std::llabs(off[t]));
                    if (maxabs != ring) return;
                    long long c[4];
                    for (int t = 0; t < dim; ++t) {
                        c[t] = base[t] + off[t];
                        if (t < periodic && cells_per_circle > 0) {
                            c[t] %= cells_per_circle;
                            if (c[t] < 0) c[t] += cells_per_circle;
                        }
                    }
                    auto it = cells.find(key_of(c, dim));
                    if (it == cells.end()) return;
                    for (std::uint32_t i : it->second) {
                        const double dist = s.system->distance(p, s.point(i));
                        if (dist < best) best = dist;
                        found_this_ring = true;
                    }
                    return;
                }
                for (long long o = -ring; o <= ring; ++o) {
                    off[d] = o;
                    walk(d + 1);
                }
            };
            walk(0);
            if (best < ring * cell && ring > 0) break;
            if (found_this_ring && best <= (ring + 1) * cell && ring > 0) break;
        }
        return best;
    }
};

} // namespace

LambdaSample sample_lambda(const SystemPtr& system, std::uint64_t budget, std::uint64_t seed) {
    if (budget < 1) throw domain_error("sample_lambda: budget must be >= 1");
    LambdaSample s;
    s.system = system;
    s.seed = seed;
    s.budget = budget;
    const int dim = system->ambient_dim();
    s.coord.assign(static_cast<std::size_t>(dim), {});
    for (auto& c : s.coord) c.reserve(budget);

    CounterRng rng{seed, 0x4c616d626461ULL};

    if (system->topology() == Topology::solid_torus) {
        s.provenance = Provenance::attractor_orbit;
        Vec x = vec3(rng.u01(0), 0.0, 0.0);
        for (int i = 0; i < 1000; ++i) x = system->step(x);
        for (std::uint64_t i = 0; i < budget; ++i) {
            for (int d = 0; d < dim; ++d) s.coord[static_cast<std::size_t>(d)].push_back(x[d]);
            x = system->step(x);
        }
    } else {
        s.provenance = Provenance::dense_grid;
        const double* gen = dim == 2 ? kR2 : kR4;
        double shift[4];
        for (int d = 0; d < dim; ++d) shift[d] = rng.u01(static_cast<std::uint64_t>(d) + 1);
        for (std::uint64_t i = 0; i < budget; ++i) {
            for (int d = 0; d < dim; ++d) {
                const double v = mod1(shift[d] + static_cast<double>(i + 1) * gen[d]);
                s.coord[static_cast<std::size_t>(d)].push_back(v);
            }
        }
    }
    s.hausdorff_tol = sample_invariance_defect(s);
    return s;
}

double sample_invariance_defect(const LambdaSample& sample, std::size_t probes) {
    const std::size_t n = sample.size();
    if (n < 2) return 0.0;
    SpatialHash hash;
    const int dim = sample.system->ambient_dim();
    hash.cell = std::max(2.0 * std::pow(static_cast<double>(n), -1.0 / dim), 1e-5);
    if (sample.provenance == Provenance::attractor_orbit)
        hash.cell = std::max(16.0 / static_cast<double>(n), 1e-5);
    // Snap the cell so an integer number covers the circle (wraparound lookups).
    hash.cell = 1.0 / std::round(1.0 / hash.cell);
    hash.insert(sample);

    CounterRng rng{sample.seed, 0x486175736472ULL};
    const std::size_t np = std::min(probes, n);
    double worst = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        const std::size_t ix = static_cast<std::size_t>(rng.index(i, n));
        const Vec fp = sample.system->step(sample.point(ix));
        worst = std::max(worst, hash.nearest(sample, fp));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Orbits and asymptotic directions

Vec iterate(const SystemPtr& system, Vec x, int n) {
    for (; n > 0; --n) x = system->step(x);
    for (; n < 0; ++n) x = system->inverse_step(x);
    return x;
}

Orbit::Orbit(SystemPtr system, const Vec& base, int backward, int forward)
    : system_(std::move(system)), backward_(0), forward_(0) {
    pts_.push_back(base);
    extend_backward(backward);
    extend_forward(forward);
}

const Vec& Orbit::at(int i) const {
    if (i < -backward_ || i > forward_)
        throw domain_error("Orbit::at: index outside stored range");
    return pts_[static_cast<std::size_t>(i + backward_)];
}

void Orbit::extend_backward(int n) {
    for (int i = 0; i < n; ++i) {
        pts_.insert(pts_.begin(), system_->inverse_step(pts_.front()));
        ++backward_;
    }
}

void Orbit::extend_forward(int n) {
    for (int i = 0; i < n; ++i) {
        pts_.push_back(system_->step(pts_.back()));
        ++forward_;
    }
}

namespace {

Mat seeded_frame(int dim, int rank, std::uint64_t seed) {
    CounterRng rng{seed, 0x4672616d65ULL};
    Mat m(dim, rank);
    for (int j = 0; j < rank; ++j)
        for (int i = 0; i < dim; ++i)
            m(i, j) = rng.sym(static_cast<std::uint64_t>(j * dim + i));
    return m;
}

std::uint64_t system_seed(const SystemModel& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s.name()) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ULL;
    return h;
}

} // namespace

Subspace unstable_direction(const SystemPtr& system, const Vec& x, int warmup) {
    if (warmup < 1) throw domain_error("unstable_direction: warmup must be >= 1");
    Orbit orbit(system, x, warmup, 0);
    Mat frame = gram_schmidt(seeded_frame(system->ambient_dim(), system->unstable_dim(),
                                          system_seed(*system)));
    for (int i = -warmup; i < 0; ++i) {
        frame = system->jacobian(orbit.at(i)) * frame;
        frame = gram_schmidt(frame);
    }
    return Subspace(system->ambient_dim(), frame);
}

Subspace stable_direction(const SystemPtr& system, const Vec& x, int warmup) {
    if (warmup < 1) throw domain_error("stable_direction: warmup must be >= 1");
    Orbit orbit(system, x, 0, warmup);
    const int sdim = system->ambient_dim() - system->unstable_dim();
    Mat frame = gram_schmidt(seeded_frame(system->ambient_dim(), sdim,
                                          system_seed(*system) ^ 0x535441424cULL));
    for (int i = warmup; i > 0; --i) {
        Mat j = system->jacobian(orbit.at(i - 1));
        frame = j.inverse() * frame;
        frame = gram_schmidt(frame);
    }
    return Subspace(system->ambient_dim(), frame);
}

CocycleProduct cocycle(const SystemPtr& system, const Vec& x, int n) {
    std::vector<Mat> factors;
    const int dim = system->ambient_dim();
    if (n == 0) {
        factors.push_back(Mat::Identity(dim, dim));
        return CocycleProduct::from_factors(std::move(factors));
    }
    if (n > 0) {
        Orbit orbit(system, x, 0, n - 1);
        for (int i = n - 1; i >= 0; --i) factors.push_back(system->jacobian(orbit.at(i)));
    } else {
        Orbit orbit(system, x, -n, 0);
        for (int i = n; i < 0; ++i) factors.push_back(Mat(system->jacobian(orbit.at(i)).inverse()));
    }
    return CocycleProduct::from_factors(std::move(factors));
}

} // namespace bowenlab
