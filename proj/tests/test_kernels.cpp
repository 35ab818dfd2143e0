#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bowenlab/kernels.hpp"
#include "bowenlab/rng.hpp"

using namespace bowenlab;

namespace {

std::vector<double> random_array(std::size_t n, std::uint64_t seed, double scale = 10.0) {
    CounterRng rng{seed, 0xABCD};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * rng.sym(i);
    return v;
}

} // namespace

TEST_CASE("scalar and AVX2 kernels agree bit-for-bit") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; dispatch covered by the scalar path");
        return;
    }
    const auto& s = kernels::scalar_ops();
    const auto& v = kernels::avx2_ops();
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 64u, 1001u}) {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            auto x = random_array(n, seed);
            auto y = random_array(n, seed + 100);

            const auto ms = s.minmax(x.data(), n);
            const auto mv = v.minmax(x.data(), n);
            CHECK(ms.lo == mv.lo);
            CHECK(ms.hi == mv.hi);
            CHECK(s.max_abs(x.data(), n) == v.max_abs(x.data(), n));
            CHECK(s.max_pairwise_dist2_2d(x.data(), y.data(), n) ==
                  v.max_pairwise_dist2_2d(x.data(), y.data(), n));

            std::vector<double> so(n), vo(n);
            s.scale(x.data(), so.data(), 2.7, n);
            v.scale(x.data(), vo.data(), 2.7, n);
            CHECK(so == vo);

            auto xs = x, ys = y, xv = x, yv = y;
            s.affine2_mod1(xs.data(), ys.data(), n, 2, 1, 1, 1, 0.25, -0.125);
            v.affine2_mod1(xv.data(), yv.data(), n, 2, 1, 1, 1, 0.25, -0.125);
            CHECK(xs == xv);
            CHECK(ys == yv);

            std::vector<std::uint32_t> is(n), iv(n);
            const auto cs = s.filter_norm2_le_2d(x.data(), y.data(), n, 40.0, is.data());
            const auto cv = v.filter_norm2_le_2d(x.data(), y.data(), n, 40.0, iv.data());
            REQUIRE(cs == cv);
            for (std::size_t i = 0; i < cs; ++i) CHECK(is[i] == iv[i]);
        }
    }
}

TEST_CASE("kernel results match naive references") {
    const auto& k = kernels::active_ops();
    auto x = random_array(257, 42);
    auto y = random_array(257, 43);

    double lo = x[0], hi = x[0], ma = std::fabs(x[0]);
    for (double u : x) {
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        ma = std::max(ma, std::fabs(u));
    }
    const auto mm = k.minmax(x.data(), x.size());
    CHECK(mm.lo == lo);
    CHECK(mm.hi == hi);
    CHECK(k.max_abs(x.data(), x.size()) == ma);

    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            best = std::max(best, dx * dx + dy * dy);
        }
    CHECK(k.max_pairwise_dist2_2d(x.data(), y.data(), x.size()) == best);
}

TEST_CASE("affine2_mod1 lands in [0,1)") {
    const auto& k = kernels::active_ops();
    auto x = random_array(500, 7, 3.0);
    auto y = random_array(500, 8, 3.0);
    k.affine2_mod1(x.data(), y.data(), x.size(), 2, 1, 1, 1, 0, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i] >= 0.0);
        CHECK(x[i] < 1.0);
        CHECK(y[i] >= 0.0);
        CHECK(y[i] < 1.0);
    }
}
