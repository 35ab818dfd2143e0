#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

namespace bowenlab::kernels {

// Batched arithmetic used in the hot loops: torus map steps over point arrays,
// diameter reductions and radius filters over chart coordinates.
//
// Two implementations exist: a scalar reference and an AVX2 variant. They are
// required to produce bit-identical results: every operation is either
// per-element with the same rounding sequence (no FMA contraction) or an
// order-insensitive min/max reduction. The active variant is selected once at
// runtime from CPU capabilities; BOWEN_LAB_FORCE_SCALAR=1 pins the reference.

struct MinMax {
    double lo;
    double hi;
};

struct Ops {
    // min/max of u[0..n); n >= 1.
    MinMax (*minmax)(const double* u, std::size_t n);
    // max of |u[i]|; n >= 1.
    double (*max_abs)(const double* u, std::size_t n);
    // max over i<j of (x[i]-x[j])^2 + (y[i]-y[j])^2; 0 for n < 2.
    double (*max_pairwise_dist2_2d)(const double* x, const double* y, std::size_t n);
    // out[i] = s * u[i]
    void (*scale)(const double* u, double* out, double s, std::size_t n);
    // (x,y) <- (a*x + b*y + tx mod 1, c*x + d*y + ty mod 1), in place.
    void (*affine2_mod1)(double* x, double* y, std::size_t n,
                         double a, double b, double c, double d,
                         double tx, double ty);
    // Writes indices i with x[i]^2 + y[i]^2 <= r2 into idx (caller-sized >= n),
    // in increasing order; returns the count.
    std::size_t (*filter_norm2_le_2d)(const double* x, const double* y, std::size_t n,
                                      double r2, std::uint32_t* idx);
    const char* name;
};

const Ops& scalar_ops();
const Ops& avx2_ops();   // valid to call only if avx2_available()
bool avx2_available();

// Dispatched variant (scalar unless AVX2 is present and not disabled by env).
const Ops& active_ops();

} // namespace bowenlab::kernels
