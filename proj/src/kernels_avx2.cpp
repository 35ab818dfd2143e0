#include "bowenlab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define BOWENLAB_HAVE_AVX2_TU 1
#include <immintrin.h>
#include <cmath>
#endif

namespace bowenlab::kernels {

#ifdef BOWENLAB_HAVE_AVX2_TU
namespace {

// Lane ops mirror the scalar reference exactly: mul/add only (no FMA), floor,
// min/max. Tails fall back to the same scalar expressions.

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_min_pd(lo, hi);
    m = _mm_min_sd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

MinMax v_minmax(const double* u, std::size_t n) {
    std::size_t i = 0;
    double lo = u[0], hi = u[0];
    if (n >= 4) {
        __m256d vlo = _mm256_loadu_pd(u);
        __m256d vhi = vlo;
        for (i = 4; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(u + i);
            vlo = _mm256_min_pd(vlo, v);
            vhi = _mm256_max_pd(vhi, v);
        }
        lo = hmin(vlo);
        hi = hmax(vhi);
    }
    for (; i < n; ++i) {
        if (u[i] < lo) lo = u[i];
        if (u[i] > hi) hi = u[i];
    }
    return {lo, hi};
}

double v_max_abs(const double* u, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    double m = std::fabs(u[0]);
    if (n >= 4) {
        __m256d vm = _mm256_andnot_pd(sign, _mm256_loadu_pd(u));
        for (i = 4; i + 4 <= n; i += 4) {
            __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(u + i));
            vm = _mm256_max_pd(vm, v);
        }
        m = hmax(vm);
    }
    for (; i < n; ++i) {
        double a = std::fabs(u[i]);
        if (a > m) m = a;
    }
    return m;
}

double v_max_pairwise_dist2_2d(const double* x, const double* y, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const __m256d xi = _mm256_set1_pd(x[i]);
        const __m256d yi = _mm256_set1_pd(y[i]);
        __m256d vbest = _mm256_setzero_pd();
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(x + j));
            __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(y + j));
            __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
            vbest = _mm256_max_pd(vbest, d2);
        }
        double row = hmax(vbest);
        for (; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            const double d2 = dx * dx + dy * dy;
            if (d2 > row) row = d2;
        }
        if (row > best) best = row;
    }
    return best;
}

void v_scale(const double* u, double* out, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_loadu_pd(u + i)));
    for (; i < n; ++i) out[i] = s * u[i];
}

void v_affine2_mod1(double* x, double* y, std::size_t n,
                    double a, double b, double c, double d,
                    double tx, double ty) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    const __m256d vc = _mm256_set1_pd(c), vd = _mm256_set1_pd(d);
    const __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d nx = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy)), vtx);
        __m256d ny = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(vc, vx), _mm256_mul_pd(vd, vy)), vty);
        nx = _mm256_sub_pd(nx, _mm256_floor_pd(nx));
        ny = _mm256_sub_pd(ny, _mm256_floor_pd(ny));
        _mm256_storeu_pd(x + i, nx);
        _mm256_storeu_pd(y + i, ny);
    }
    for (; i < n; ++i) {
        const double nx = a * x[i] + b * y[i] + tx;
        const double ny = c * x[i] + d * y[i] + ty;
        x[i] = nx - std::floor(nx);
        y[i] = ny - std::floor(ny);
    }
}

std::size_t v_filter_norm2_le_2d(const double* x, const double* y, std::size_t n,
                                 double r2, std::uint32_t* idx) {
    const __m256d vr2 = _mm256_set1_pd(r2);
    std::size_t k = 0, i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d d2 = _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy));
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_LE_OQ));
        for (int lane = 0; lane < 4; ++lane)
            if (mask & (1 << lane)) idx[k++] = static_cast<std::uint32_t>(i + lane);
    }
    for (; i < n; ++i) {
        const double d2 = x[i] * x[i] + y[i] * y[i];
        if (d2 <= r2) idx[k++] = static_cast<std::uint32_t>(i);
    }
    return k;
}

} // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        v_minmax,  v_max_abs, v_max_pairwise_dist2_2d,
        v_scale,   v_affine2_mod1, v_filter_norm2_le_2d,
        "avx2",
    };
    return ops;
}

#else

const Ops& avx2_ops() { return scalar_ops(); }

#endif

} // namespace bowenlab::kernels
