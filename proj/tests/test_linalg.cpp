#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bowenlab/linalg.hpp"
#include "bowenlab/rng.hpp"
#include "bowenlab/systems.hpp"

using namespace bowenlab;

namespace {

Subspace span_of(std::initializer_list<double> v) {
    Mat m(static_cast<Eigen::Index>(v.size()), 1);
    int i = 0;
    for (double x : v) m(i++, 0) = x;
    return Subspace(static_cast<int>(v.size()), m);
}

} // namespace

TEST_CASE("subspace angles: closed forms") {
    const Subspace e1 = span_of({1.0, 0.0});
    const Subspace e2 = span_of({0.0, 1.0});
    const Subspace diag = span_of({1.0, 1.0});
    CHECK(subspace_angle(e1, e1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(subspace_angle(e1, e2) == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(subspace_angle(e1, diag) == doctest::Approx(M_PI / 4).epsilon(1e-12));
    // symmetry
    CHECK(subspace_angle(diag, e1) == doctest::Approx(subspace_angle(e1, diag)));
}

TEST_CASE("subspace angle rejects mismatched ranks") {
    Mat two(3, 2);
    two << 1, 0, 0, 1, 0, 0;
    const Subspace plane(3, two);
    const Subspace line = span_of({1.0, 0.0, 0.0});
    CHECK_THROWS_AS(subspace_angle(plane, line), dimension_error);
}

TEST_CASE("gram volume: unit square, dependence, rectangle") {
    CHECK(gram_volume({vec2(1, 0), vec2(0, 1)}) == doctest::Approx(1.0));
    CHECK(gram_volume({vec2(1, 0), vec2(1, 0)}) == doctest::Approx(0.0));
    CHECK(gram_volume({vec2(2, 0), vec2(0, 3)}) == doctest::Approx(6.0));
    CHECK_THROWS_AS(gram_volume({}), domain_error);
}

TEST_CASE("gram volume invariances (property)") {
    CounterRng rng{7, 1};
    for (int trial = 0; trial < 50; ++trial) {
        Vec a = vec3(rng.sym(trial * 6 + 0), rng.sym(trial * 6 + 1), rng.sym(trial * 6 + 2));
        Vec b = vec3(rng.sym(trial * 6 + 3), rng.sym(trial * 6 + 4), rng.sym(trial * 6 + 5));
        const double v1 = gram_volume({a, b});
        const double v2 = gram_volume({b, a});
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
        // scaling a vector orthogonal to the rest scales the volume linearly
        Vec c = vec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]);
        if (c.norm() > 1e-9) {
            const double base = gram_volume({a, b, c});
            const double scaled = gram_volume({a, b, Vec(2.5 * c)});
            CHECK(scaled == doctest::Approx(2.5 * base).epsilon(1e-10));
        }
    }
}

TEST_CASE("orthonormality maintained by gram_schmidt") {
    CounterRng rng{11, 2};
    for (int trial = 0; trial < 20; ++trial) {
        Mat m(4, 3);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 4; ++i) m(i, j) = rng.sym(static_cast<std::uint64_t>(trial * 12 + j * 4 + i));
        Subspace s(4, m);
        CHECK(s.orthonormality_defect() < 1e-12);
    }
}

TEST_CASE("cocycle: constant-Jacobian cat map gives matrix powers") {
    auto cat = make_cat();
    const Vec x = vec2(0.37, 0.81);
    const CocycleProduct c3 = cocycle(cat, x, 3);
    Mat a(2, 2);
    a << 2, 1, 1, 1;
    Mat a3 = a * a * a;
    CHECK((c3.value - a3).norm() < 1e-12);
    CHECK(c3.log_conorm <= c3.log_norm);

    const CocycleProduct c0 = cocycle(cat, x, 0);
    CHECK((c0.value - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("cocycle of pcat: 5-step conorm rate near ln lambda_+") {
    auto pcat = make_pcat(0.03);
    const Vec x = vec2(0.2, 0.7);
    const CocycleProduct c = cocycle(pcat, x, 5);
    // independent recomputation: direct 5-step Jacobian product
    Vec y = x;
    Mat prod = Mat::Identity(2, 2);
    for (int i = 0; i < 5; ++i) {
        prod = pcat->jacobian(y) * prod;
        y = pcat->step(y);
    }
    CHECK((c.value - prod).norm() < 1e-10);
    const double lam = std::log(kCatLambda);
    CHECK(c.log_conorm / 5.0 > lam - 0.2);
    CHECK(c.log_conorm / 5.0 < lam + 0.2);
}

TEST_CASE("cocycle inverse composition is the identity (property)") {
    CounterRng rng{3, 9};
    std::vector<SystemPtr> systems = {make_cat(), make_pcat(0.03), make_prod4(0.02),
                                      make_solenoid(0.5, 0.1)};
    for (const auto& sys : systems) {
        for (int trial = 0; trial < 5; ++trial) {
            Vec x(sys->ambient_dim());
            for (int d = 0; d < sys->ambient_dim(); ++d)
                x[d] = rng.u01(static_cast<std::uint64_t>(trial * 7 + d));
            if (sys->topology() == Topology::solid_torus) {
                // project onto the attractor first
                x = vec3(x[0], 0, 0);
                for (int i = 0; i < 200; ++i) x = sys->step(x);
            }
            for (int n : {1, 5, 20}) {
                const CocycleProduct fwd = cocycle(sys, x, n);
                const CocycleProduct bwd = cocycle(sys, iterate(sys, x, n), -n);
                const Mat prod = fwd.value * bwd.value;
                CHECK((prod - Mat::Identity(sys->ambient_dim(), sys->ambient_dim())).norm() <
                      1e-8);
            }
        }
    }
}

TEST_CASE("cocycle factors recompute to the value in long double") {
    auto pcat = make_pcat(0.02);
    const CocycleProduct c = cocycle(pcat, vec2(0.1, 0.4), 8);
    // extended-precision recomputation of the factor product
    using LMat = Eigen::Matrix<long double, 2, 2>;
    LMat acc = LMat::Identity();
    for (const Mat& f : c.factors) acc = acc * f.cast<long double>();
    CHECK(std::fabs(static_cast<double>(acc(0, 0)) - c.value(0, 0)) < 1e-10);
    CHECK(std::fabs(static_cast<double>(acc(1, 1)) - c.value(1, 1)) < 1e-10);
}
