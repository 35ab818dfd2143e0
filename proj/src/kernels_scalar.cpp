#include "bowenlab/kernels.hpp"

#include <cmath>

// Reference kernels. Arithmetic here defines the contract the AVX2 variant
// must reproduce bit-for-bit, so no FMA and no reassociation beyond min/max.

namespace bowenlab::kernels {
namespace {

MinMax s_minmax(const double* u, std::size_t n) {
    double lo = u[0], hi = u[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (u[i] < lo) lo = u[i];
        if (u[i] > hi) hi = u[i];
    }
    return {lo, hi};
}

double s_max_abs(const double* u, std::size_t n) {
    double m = std::fabs(u[0]);
    for (std::size_t i = 1; i < n; ++i) {
        double a = std::fabs(u[i]);
        if (a > m) m = a;
    }
    return m;
}

double s_max_pairwise_dist2_2d(const double* x, const double* y, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double xi = x[i], yi = y[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xi - x[j];
            const double dy = yi - y[j];
            const double d2 = dx * dx + dy * dy;
            if (d2 > best) best = d2;
        }
    }
    return best;
}

void s_scale(const double* u, double* out, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s * u[i];
}

inline double mod1(double v) { return v - std::floor(v); }

void s_affine2_mod1(double* x, double* y, std::size_t n,
                    double a, double b, double c, double d,
                    double tx, double ty) {
    for (std::size_t i = 0; i < n; ++i) {
        const double nx = a * x[i] + b * y[i] + tx;
        const double ny = c * x[i] + d * y[i] + ty;
        x[i] = mod1(nx);
        y[i] = mod1(ny);
    }
}

std::size_t s_filter_norm2_le_2d(const double* x, const double* y, std::size_t n,
                                 double r2, std::uint32_t* idx) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = x[i] * x[i] + y[i] * y[i];
        if (d2 <= r2) idx[k++] = static_cast<std::uint32_t>(i);
    }
    return k;
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        s_minmax,  s_max_abs, s_max_pairwise_dist2_2d,
        s_scale,   s_affine2_mod1, s_filter_norm2_le_2d,
        "scalar",
    };
    return ops;
}

} // namespace bowenlab::kernels
