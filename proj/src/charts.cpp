#include "bowenlab/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bowenlab/errors.hpp"
#include "bowenlab/rng.hpp"

namespace bowenlab {

Vec LeafModel::u1_offset(double) const {
    throw domain_error("this system has no explicit slow sub-leaf");
}

double LeafModel::u1_param(const Vec&) const {
    throw domain_error("this system has no explicit slow sub-leaf");
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double circ(double d) { return d - std::round(d); }

// Leaf offset interface shared by the concrete leaves below: `offset` is the
// ambient displacement (on the cover) of the leaf point at parameter u.

// ---------------------------------------------------------------------------
// Flat leaf: exact for linear toral systems.
class FlatLeaf final : public LeafModel {
public:
    FlatLeaf(Mat frame) : frame_(std::move(frame)) {}

    Vec point(const Vec& u) const override { return frame_ * u; }
    Vec coords(const Vec& delta) const override { return frame_.transpose() * delta; }
    Mat param_to_tangent() const override { return frame_; }
    Mat ambient_to_param() const override { return frame_.transpose(); }

private:
    Mat frame_;
};

// ---------------------------------------------------------------------------
// Solenoid leaf through a base point on the attractor, parameterized by the
// angle offset. The fiber coordinate is the geometric series driven by the
// base point's backward angle itinerary.
class SolenoidLeaf final : public LeafModel {
public:
    SolenoidLeaf(double a, double lambda, Vec base, std::vector<double> back_angles)
        : a_(a), lambda_(lambda), base_(std::move(base)), th_(std::move(back_angles)) {
        // Pin the center: the truncated series must reproduce the base fiber.
        corr_ = Eigen::Vector2d(base_[1], base_[2]) - fiber(0.0);
    }

    Vec point(const Vec& u) const override {
        Eigen::Vector2d z = fiber(u[0]) + corr_;
        return vec3(u[0], z[0] - base_[1], z[1] - base_[2]);
    }
    Vec coords(const Vec& delta) const override { return vec1(circ(delta[0])); }
    Mat param_to_tangent() const override {
        Mat t(3, 1);
        Eigen::Vector2d d = dfiber(0.0);
        t << 1.0, d[0], d[1];
        return t;
    }
    Mat ambient_to_param() const override {
        Mat t(1, 3);
        t << 1.0, 0.0, 0.0;
        return t;
    }

private:
    // z(theta0 + du) = sum_k lambda^{k-1} a e(theta_{-k} + du/2^k), truncated
    // where lambda^k reaches round-off; the tail is absorbed by corr_.
    Eigen::Vector2d fiber(double du) const {
        Eigen::Vector2d z(0.0, 0.0);
        double lk = 1.0;
        for (std::size_t k = 0; k < th_.size(); ++k) {
            const double th = th_[k] + du / std::ldexp(1.0, static_cast<int>(k) + 1);
            z[0] += lk * a_ * std::cos(kTwoPi * th);
            z[1] += lk * a_ * std::sin(kTwoPi * th);
            lk *= lambda_;
        }
        return z;
    }
    Eigen::Vector2d dfiber(double du) const {
        Eigen::Vector2d d(0.0, 0.0);
        double lk = 1.0;
        for (std::size_t k = 0; k < th_.size(); ++k) {
            const double p2 = std::ldexp(1.0, static_cast<int>(k) + 1);
            const double th = th_[k] + du / p2;
            d[0] += lk * a_ * -std::sin(kTwoPi * th) * kTwoPi / p2;
            d[1] += lk * a_ * std::cos(kTwoPi * th) * kTwoPi / p2;
            lk *= lambda_;
        }
        return d;
    }

    double a_, lambda_;
    Vec base_;
    std::vector<double> th_; // th_[k] = angle of f^{-(k+1)}(base)
    Eigen::Vector2d corr_;
};

// ---------------------------------------------------------------------------
// Numerically grown leaf for pcat: displacements seeded along the frame at a
// backward orbit point and pushed forward, then interpolated as a graph over
// the frame line (cubic Hermite on the transverse component).
class GrownLeaf final : public LeafModel {
public:
    GrownLeaf(Mat frame, Vec perp, std::vector<double> u, std::vector<double> s)
        : frame_(std::move(frame)), perp_(std::move(perp)), u_(std::move(u)), s_(std::move(s)) {
        const std::size_t n = u_.size();
        m_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == n ? i : i + 1;
            m_[i] = (s_[hi] - s_[lo]) / (u_[hi] - u_[lo]);
        }
    }

    Vec point(const Vec& u) const override {
        return frame_ * u + perp_ * transverse(u[0]);
    }
    Vec coords(const Vec& delta) const override { return frame_.transpose() * delta; }
    Mat param_to_tangent() const override { return frame_; }
    Mat ambient_to_param() const override { return frame_.transpose(); }

private:
    double transverse(double u) const {
        if (u < u_.front() || u > u_.back())
            throw radius_error("grown leaf evaluated outside its computed range");
        auto it = std::upper_bound(u_.begin(), u_.end(), u);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - u_.begin())) - 1;
        if (i + 1 >= u_.size()) i = u_.size() - 2;
        const double h = u_[i + 1] - u_[i];
        const double t = (u - u_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * s_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
               (-2 * t3 + 3 * t2) * s_[i + 1] + (t3 - t2) * h * m_[i + 1];
    }

    Mat frame_; // ambient x 1
    Vec perp_;
    std::vector<double> u_, s_, m_;
};

// ---------------------------------------------------------------------------
// prod4 leaf: the skew coupling leaves the slow-block line exact and enslaves
// the fast block's contracting component through a geometric series over the
// backward orbit of the slow block.
class Prod4SkewLeaf final : public LeafModel {
public:
    Prod4SkewLeaf(double eta, const Vec& base) : eta_(eta) {
        const double s5 = std::sqrt(5.0);
        vp_ = Eigen::Vector2d(1.0, (s5 - 1.0) / 2.0).normalized();
        vm_ = Eigen::Vector2d(-vp_[1], vp_[0]); // orthogonal: A is symmetric
        lam_ = (3.0 + s5) / 2.0;
        // Backward slow-block orbit (exact integer inverse matrix, mod 1).
        Eigen::Vector2d s(base[0], base[1]);
        const Eigen::Matrix2d ainv = (Eigen::Matrix2d() << 1, -1, -1, 2).finished();
        back_.resize(kDepth);
        for (int k = 0; k < kDepth; ++k) {
            s = ainv * s;
            s[0] -= std::floor(s[0]);
            s[1] -= std::floor(s[1]);
            back_[static_cast<std::size_t>(k)] = s;
        }
        d0_ = dDelta(0.0);
        Eigen::Vector4d e1;
        e1 << vp_[0], vp_[1], d0_ * vm_[0], d0_ * vm_[1];
        e1.normalize();
        Mat f(4, 2);
        f.col(0) = e1;
        f.col(1) << 0.0, 0.0, vp_[0], vp_[1];
        frame_ = f;
    }

    const Mat& frame() const { return frame_; }

    Vec point(const Vec& u) const override {
        const double t = solve_t(u[0]);
        const double s = u[1];
        const double dm = Delta(t);
        Vec d(4);
        d[0] = t * vp_[0];
        d[1] = t * vp_[1];
        d[2] = dm * vm_[0] + s * vp_[0];
        d[3] = dm * vm_[1] + s * vp_[1];
        return d;
    }
    Vec coords(const Vec& delta) const override { return frame_.transpose() * delta; }
    Mat param_to_tangent() const override { return frame_; }
    Mat ambient_to_param() const override { return frame_.transpose(); }

    // Slow sub-leaf W^{u,1}: fast-block offset enslaved in both components.
    bool has_u1_leaf() const override { return true; }
    Vec u1_offset(double t) const override {
        Vec d(4);
        const double dm = Delta(t);
        const double sp = Splus(t);
        d[0] = t * vp_[0];
        d[1] = t * vp_[1];
        d[2] = dm * vm_[0] + sp * vp_[0];
        d[3] = dm * vm_[1] + sp * vp_[1];
        return d;
    }
    double u1_param(const Vec& delta) const override {
        return vp_[0] * delta[0] + vp_[1] * delta[1];
    }
    double e1_tilt() const { return d0_; }

private:
    static constexpr int kDepth = 16;     // lambda^{-3k} series
    static constexpr int kDepthFwd = 24;  // lambda^{-2k} series

    // g(w) = (sin(2 pi w1), sin(2 pi w2)) / (2 pi), componentwise on the slow block.
    static Eigen::Vector2d g(const Eigen::Vector2d& w) {
        return Eigen::Vector2d(std::sin(kTwoPi * w[0]), std::sin(kTwoPi * w[1])) / kTwoPi;
    }
    static Eigen::Vector2d dg_times(const Eigen::Vector2d& w, const Eigen::Vector2d& v) {
        return Eigen::Vector2d(std::cos(kTwoPi * w[0]) * v[0], std::cos(kTwoPi * w[1]) * v[1]);
    }

    // Contracting-component graph offset: Delta(t) = eta * sum_{k>=1}
    // lam^{-2(k-1)} * <vm, g(x_{-k} + t lam^{-k} vp) - g(x_{-k})>.
    double Delta(double t) const {
        double acc = 0.0, w2 = 1.0, wk = 1.0 / lam_;
        for (int k = 0; k < kDepth; ++k) {
            const Eigen::Vector2d& y = back_[static_cast<std::size_t>(k)];
            acc += w2 * vm_.dot(g(y + (t * wk) * vp_) - g(y));
            w2 /= lam_ * lam_;
            wk /= lam_;
        }
        return eta_ * acc;
    }
    double dDelta(double t) const {
        double acc = 0.0, w2 = 1.0, wk = 1.0 / lam_;
        for (int k = 0; k < kDepth; ++k) {
            const Eigen::Vector2d& y = back_[static_cast<std::size_t>(k)];
            acc += w2 * wk * vm_.dot(dg_times(y + (t * wk) * vp_, vp_));
            w2 /= lam_ * lam_;
            wk /= lam_;
        }
        return eta_ * acc;
    }
    // Expanding-component enslavement along W^{u,1}: S(t) = -eta * sum_{k>=0}
    // lam^{-2(k+1)} <vp, g(x_k + t lam^k vp) - g(x_k)> over the forward orbit.
    double Splus(double t) const {
        const Eigen::Matrix2d a = (Eigen::Matrix2d() << 2, 1, 1, 1).finished();
        Eigen::Vector2d y = back_.empty() ? Eigen::Vector2d(0, 0) : a * back_[0];
        y[0] -= std::floor(y[0]);
        y[1] -= std::floor(y[1]);
        double acc = 0.0, w2 = 1.0 / (lam_ * lam_), tk = t;
        for (int k = 0; k < kDepthFwd; ++k) {
            acc += w2 * vp_.dot(g(y + tk * vp_) - g(y));
            w2 /= lam_ * lam_;
            tk *= lam_;
            y = a * y;
            y[0] -= std::floor(y[0]);
            y[1] -= std::floor(y[1]);
        }
        return -eta_ * acc;
    }

    double solve_t(double u1) const {
        const double nrm = std::sqrt(1.0 + d0_ * d0_);
        double t = u1 * nrm;
        for (int it = 0; it < 12; ++it) {
            const double f = (t + d0_ * Delta(t)) / nrm - u1;
            if (std::fabs(f) < 1e-15 * (1.0 + std::fabs(u1))) break;
            const double df = (1.0 + d0_ * dDelta(t)) / nrm;
            t -= f / df;
        }
        return t;
    }

    double eta_, lam_, d0_ = 0.0;
    Eigen::Vector2d vp_, vm_;
    std::vector<Eigen::Vector2d> back_;
    Mat frame_;
};

} // namespace

// ---------------------------------------------------------------------------

Vec UnstableChart::point(const Vec& u) const {
    if (u.norm() > radius * 1.2 + 1e-12)
        throw radius_error("chart evaluated far outside its radius");
    return system->reduce(base + leaf->point(u));
}

Vec UnstableChart::coords(const Vec& ambient) const {
    return leaf->coords(system->displacement(base, ambient));
}

double UnstableChart::transverse_offset(const Vec& ambient) const {
    const Vec delta = system->displacement(base, ambient);
    const Vec u = leaf->coords(delta);
    return (delta - leaf->point(u)).norm();
}

// ---------------------------------------------------------------------------

Vec push_displacement(const SystemPtr& base, const Orbit& orbit, int start_index,
                      Vec displacement, int steps) {
    for (int j = 0; j < steps; ++j) {
        const Vec& x = orbit.at(start_index + j);
        displacement = base->step_lift(x + displacement) - base->step_lift(x);
    }
    return displacement;
}

Vec pull_displacement(const SystemPtr& base, const Orbit& orbit, int end_index,
                      Vec displacement, int steps) {
    for (int j = 0; j < steps; ++j) {
        const Vec& x = orbit.at(end_index - j - 1);
        Vec d = base->jacobian(x).inverse() * displacement;
        for (int it = 0; it < 30; ++it) {
            const Vec r = displacement - (base->step_lift(x + d) - base->step_lift(x));
            if (r.norm() <= 1e-14 * displacement.norm()) break;
            d += base->jacobian(x + d).inverse() * r;
        }
        displacement = d;
    }
    return displacement;
}

namespace {

int leaf_extra_backsteps(const SystemModel& base, const ChartOptions& opts) {
    if (base.name() == "pcat" && base.params().at("eta") != 0.0) return opts.leaf_backsteps;
    if (base.topology() == Topology::solid_torus) return 20;
    return 0;
}

bool is_prod4(const SystemModel& base) { return base.ambient_dim() == 4; }

} // namespace

ChartOrbit::ChartOrbit(SystemPtr system, const Vec& base, int backward, int forward,
                       ChartOptions opts)
    : system_(std::move(system)), backward_(backward), forward_(forward), opts_(opts) {
    base_ = system_->block_exponent() > 1 ? system_->base_system() : system_;
    block_ = system_->block_exponent();
    const int extra = leaf_extra_backsteps(*base_, opts_);
    const bool propagate = !is_prod4(*base_);
    const int warm = propagate ? opts_.frame_warmup : 0;
    const int total_back = backward_ * block_ + extra + warm;
    orbit_ = std::make_shared<Orbit>(base_, base, total_back, forward_ * block_);

    frame_lo_ = -(backward_ * block_ + extra);
    if (propagate) {
        Mat f(base_->ambient_dim(), base_->unstable_dim());
        {
            CounterRng rng{0x436861727473ULL, 0};
            for (int j = 0; j < f.cols(); ++j)
                for (int i = 0; i < f.rows(); ++i)
                    f(i, j) = rng.sym(static_cast<std::uint64_t>(j * f.rows() + i));
            f = gram_schmidt(f);
        }
        for (int i = -total_back; i < frame_lo_; ++i)
            f = gram_schmidt(base_->jacobian(orbit_->at(i)) * f);
        frames_.reserve(static_cast<std::size_t>(forward_ * block_ - frame_lo_ + 1));
        frames_.emplace_back(base_->ambient_dim(), f);
        for (int i = frame_lo_; i < forward_ * block_; ++i) {
            f = gram_schmidt(base_->jacobian(orbit_->at(i)) * f);
            frames_.emplace_back(base_->ambient_dim(), f);
        }
    }
    charts_.resize(static_cast<std::size_t>(backward_ + forward_ + 1));
}

void ChartOrbit::build_chart(int i) const {
    const int c = i * block_;
    auto chart = std::make_unique<UnstableChart>();
    chart->system = system_;
    chart->base = orbit_->at(c);
    chart->radius = opts_.eps0;
    chart->eps1 = opts_.eps1;

    const std::string& nm = base_->name();
    if (is_prod4(*base_)) {
        auto leaf = std::make_shared<Prod4SkewLeaf>(base_->params().at("eta"), chart->base);
        chart->frame = Subspace(4, leaf->frame());
        chart->leaf = leaf;
    } else if (base_->topology() == Topology::solid_torus) {
        std::vector<double> back;
        for (int k = 1; k <= 20; ++k) back.push_back(orbit_->at(c - k)[0]);
        chart->frame = frames_[static_cast<std::size_t>(c - frame_lo_)];
        chart->leaf = std::make_shared<SolenoidLeaf>(base_->params().at("a"),
                                                     base_->params().at("lambda"),
                                                     chart->base, std::move(back));
    } else if (nm == "pcat" && base_->params().at("eta") != 0.0) {
        chart->frame = frames_[static_cast<std::size_t>(c - frame_lo_)];
        const int nb = opts_.leaf_backsteps;
        const Mat seed_dir = frames_[static_cast<std::size_t>(c - nb - frame_lo_)].basis();
        const Mat fr = chart->frame.basis();
        Vec perp = vec2(-fr(1, 0), fr(0, 0));
        // Scale the seed so the pushed polyline covers the chart radius.
        const double cover = opts_.eps0 * 1.3;
        double seed_len = cover * std::pow(2.55, -nb);
        {
            Vec probe = push_displacement(base_, *orbit_, c - nb, Vec(seed_dir * vec1(seed_len)), nb);
            const double got = std::fabs((fr.transpose() * probe)(0));
            seed_len *= cover / got;
        }
        int m = opts_.leaf_samples | 1;
        std::vector<double> us, ss;
        us.reserve(static_cast<std::size_t>(m));
        ss.reserve(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            const double t = seed_len * (2.0 * j / (m - 1) - 1.0);
            Vec d = push_displacement(base_, *orbit_, c - nb, Vec(seed_dir * vec1(t)), nb);
            us.push_back((fr.transpose() * d)(0));
            ss.push_back(perp.dot(d));
        }
        if (us.front() > us.back()) {
            std::reverse(us.begin(), us.end());
            std::reverse(ss.begin(), ss.end());
        }
        chart->leaf = std::make_shared<GrownLeaf>(fr, perp, std::move(us), std::move(ss));
    } else {
        chart->frame = frames_[static_cast<std::size_t>(c - frame_lo_)];
        chart->leaf = std::make_shared<FlatLeaf>(chart->frame.basis());
    }

    // Record the chart constant: max of ||dPhi|| and 1/sigma_min(dPhi) over a
    // probe ladder, by central differences.
    double cc = 1.0;
    const int m = chart->udim();
    const double h = 1e-6;
    for (double r : {0.0, 0.5 * opts_.eps0, 0.95 * opts_.eps0}) {
        for (int axis = 0; axis < m; ++axis) {
            for (double sgn : {1.0, -1.0}) {
                Vec u = Vec::Zero(m);
                u[axis] = sgn * r;
                Mat d(base_->ambient_dim(), m);
                for (int j = 0; j < m; ++j) {
                    Vec up = u, dn = u;
                    up[j] += h;
                    dn[j] -= h;
                    d.col(j) = (chart->leaf->point(up) - chart->leaf->point(dn)) / (2.0 * h);
                }
                cc = std::max({cc, operator_norm(d), 1.0 / conorm(d)});
                if (r == 0.0) break;
            }
            if (r == 0.0) break;
        }
    }
    chart->chart_C = cc;
    charts_[static_cast<std::size_t>(i + backward_)] = std::move(chart);
}

const UnstableChart& ChartOrbit::chart(int i) const {
    if (i < -backward_ || i > forward_)
        throw domain_error("ChartOrbit::chart: index outside stored range");
    auto& slot = charts_[static_cast<std::size_t>(i + backward_)];
    if (!slot) build_chart(i);
    return *slot;
}

Vec ChartOrbit::hat_f(int i, const Vec& u, double* projection_error) const {
    const UnstableChart& src = chart(i);
    const UnstableChart& dst = chart(i + 1);
    if (u.norm() > src.eps1 * (1.0 + 1e-9))
        throw radius_error("hat_f: ||u|| exceeds eps1");
    Vec delta = src.leaf->point(u);
    delta = push_displacement(base_, *orbit_, i * block_, delta, block_);
    const Vec up = dst.leaf->coords(delta);
    const double err = (delta - dst.leaf->point(up)).norm();
    if (projection_error) *projection_error = err;
    if (err > 1e-6 * u.norm() + 1e-11)
        throw domain_error("hat_f: image left the unstable leaf (projection error too large)");
    return up;
}

Vec ChartOrbit::hat_f_inverse(int i, const Vec& u) const {
    const Mat d0 = dhat0(i - 1);
    Vec w = d0.inverse() * u;
    const UnstableChart& src = chart(i - 1);
    const double cap = src.eps1 * 0.999;
    const double tol = 1e-12 * std::max(u.norm(), 1e-6);
    double best = std::numeric_limits<double>::infinity();
    Vec r;
    for (int it = 0; it < 60; ++it) {
        if (w.norm() > cap) w *= cap / w.norm();
        r = u - hat_f(i - 1, w);
        const double rn = r.norm();
        if (rn < tol && rn >= best) return w; // converged and no longer improving
        best = std::min(best, rn);
        Mat j = dhat(i - 1, w);
        w += j.inverse() * r;
        if (rn == 0.0) return w;
    }
    if (best < 10 * tol) return w;
    throw orbit_error("hat_f_inverse: Newton did not converge");
}

Vec ChartOrbit::hat_f_iter(int i, Vec u, int p) const {
    for (int j = 0; j < p; ++j) u = hat_f(i + j, u);
    return u;
}

Vec ChartOrbit::pullback(int i, const Vec& u, int p) const {
    if (p < 0) throw domain_error("pullback: p must be >= 0");
    Vec w = u;
    for (int j = 0; j < p; ++j) w = hat_f_inverse(i - j, w);
    if (p > 0 && w.norm() > u.norm() * (1.0 + 1e-9))
        throw pinch_violation("pullback did not contract");
    return w;
}

Mat ChartOrbit::dhat0(int i) const {
    const UnstableChart& src = chart(i);
    const UnstableChart& dst = chart(i + 1);
    Mat j = Mat::Identity(base_->ambient_dim(), base_->ambient_dim());
    for (int s = 0; s < block_; ++s) j = base_->jacobian(orbit_->at(i * block_ + s)) * j;
    return dst.leaf->ambient_to_param() * j * src.leaf->param_to_tangent();
}

Mat ChartOrbit::dhat(int i, const Vec& u, double h) const {
    if (h <= 0.0) h = 1e-6 * opts_.eps1;
    const int m = chart(i).udim();
    Mat j(m, m);
    for (int c = 0; c < m; ++c) {
        Vec up = u, dn = u;
        up[c] += h;
        dn[c] -= h;
        j.col(c) = (hat_f(i, up) - hat_f(i, dn)) / (2.0 * h);
    }
    return j;
}

Mat ChartOrbit::cocycle0_forward(int i, int p) const {
    const int m = chart(i).udim();
    Mat acc = Mat::Identity(m, m);
    for (int j = 0; j < p; ++j) acc = dhat0(i + j) * acc;
    return acc;
}

// ---------------------------------------------------------------------------
// Local traces

Vec LocalTrace::member(std::size_t i) const {
    Vec u(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t d = 0; d < coords.size(); ++d) u[static_cast<Eigen::Index>(d)] = coords[d][i];
    return u;
}

double trace_tolerance(const SystemModel& system) {
    if (system.topology() == Topology::solid_torus) {
        const double a = system.params().at("a");
        const double lambda = system.params().at("lambda");
        return 1e-3 * (2.0 * a / (1.0 - lambda));
    }
    return 1e-6;
}

LocalTrace local_trace(const UnstableChart& chart, const LambdaSample& sample, double eps) {
    if (eps > chart.radius * (1.0 + 1e-12))
        throw radius_error("local_trace: eps exceeds the chart radius");
    LocalTrace tr;
    tr.chart = &chart;
    tr.eps = eps;
    const int m = chart.udim();
    tr.coords.assign(static_cast<std::size_t>(m), {});

    const SystemModel& sys = *sample.system;
    if (sys.topology() == Topology::solid_torus) {
        const double tol = trace_tolerance(sys);
        tr.coords[0].push_back(0.0);
        const std::size_t n = sample.size();
        const double th0 = chart.base[0];
        for (std::size_t i = 0; i < n; ++i) {
            const double du = circ(sample.coord[0][i] - th0);
            if (std::fabs(du) > eps) continue;
            const Vec p = chart.system->reduce(chart.base + chart.leaf->point(vec1(du)));
            const double dz = std::hypot(sample.coord[1][i] - p[1], sample.coord[2][i] - p[2]);
            if (dz <= tol) tr.coords[0].push_back(du);
        }
        std::sort(tr.coords[0].begin(), tr.coords[0].end());
        tr.resolution = 2.0 * eps / static_cast<double>(std::max<std::size_t>(tr.size(), 1));
        return tr;
    }

    // Toral systems: the invariant set is the whole torus, so the trace is a
    // deterministic sample of the leaf itself. Uniform density follows the
    // ambient budget (per-axis resolution); a geometric ladder keeps small
    // scales resolved.
    const double per_axis = std::pow(static_cast<double>(std::max<std::uint64_t>(sample.budget, 1)),
                                     1.0 / sys.ambient_dim());
    const double h = 1.0 / per_axis;
    const double floor_u = eps * std::max(1e-8, 1.0 / static_cast<double>(sample.budget));
    tr.resolution = h;

    if (m == 1) {
        auto& cs = tr.coords[0];
        cs.push_back(0.0);
        const auto nuni = static_cast<long long>(std::floor(2.0 * eps / h));
        for (long long j = 0; j < nuni; ++j) {
            const double u = -eps + (static_cast<double>(j) + 0.5) * h;
            if (std::fabs(u) <= eps) cs.push_back(u);
        }
        const double ratio = 0.995;
        for (double r = eps; r >= floor_u; r *= ratio) {
            cs.push_back(r);
            cs.push_back(-r);
        }
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    } else {
        auto push = [&](double a, double b) {
            tr.coords[0].push_back(a);
            tr.coords[1].push_back(b);
        };
        push(0.0, 0.0);
        const auto nuni = static_cast<long long>(std::floor(2.0 * eps / h));
        for (long long i = 0; i < nuni; ++i)
            for (long long j = 0; j < nuni; ++j) {
                const double a = -eps + (static_cast<double>(i) + 0.5) * h;
                const double b = -eps + (static_cast<double>(j) + 0.5) * h;
                if (a * a + b * b <= eps * eps) push(a, b);
            }
        const int nang = 32;
        const double ratio = 0.97;
        for (double r = eps; r >= floor_u; r *= ratio)
            for (int j = 0; j < nang; ++j) {
                const double th = kTwoPi * j / nang;
                push(r * std::cos(th), r * std::sin(th));
            }
    }
    return tr;
}

} // namespace bowenlab
