#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bowenlab/errors.hpp"
#include "bowenlab/rng.hpp"
#include "bowenlab/systems.hpp"

using namespace bowenlab;

TEST_CASE("cat map point evaluations") {
    auto cat = make_cat();
    CHECK(cat->step(vec2(0, 0)).norm() == 0.0); // fixed point
    const Vec y = cat->step(vec2(0.1, 0.2));
    CHECK(y[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(0.3).epsilon(1e-15));
    const Vec b = cat->inverse_step(vec2(0.4, 0.3));
    CHECK(b[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("solenoid step formula") {
    auto sol = make_solenoid(0.5, 0.1);
    const Vec y = sol->step(vec3(0, 0, 0));
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(0.5)); // a * e(0) with e(0) the unit vector
    CHECK(y[2] == doctest::Approx(0.0));
}

TEST_CASE("inverse_step round trip on 1e3 random points (property)") {
    CounterRng rng{2024, 5};
    std::vector<SystemPtr> systems = {make_cat(), make_pcat(0.05), make_prod4(0.03)};
    std::uint64_t ctr = 0;
    for (const auto& sys : systems) {
        for (int trial = 0; trial < 333; ++trial) {
            Vec x(sys->ambient_dim());
            for (int d = 0; d < sys->ambient_dim(); ++d) x[d] = rng.u01(ctr++);
            const Vec rt = sys->inverse_step(sys->step(x));
            CHECK(sys->distance(rt, x) < 1e-10);
            const Vec rt2 = sys->step(sys->inverse_step(x));
            CHECK(sys->distance(rt2, x) < 1e-10);
        }
    }
    // solenoid: points must lie on the attractor for the inverse branch
    auto sol = make_solenoid(0.5, 0.1);
    Vec x = vec3(0.123, 0, 0);
    for (int i = 0; i < 300; ++i) x = sol->step(x);
    for (int trial = 0; trial < 333; ++trial) {
        const Vec rt = sol->inverse_step(sol->step(x));
        CHECK(sol->distance(rt, x) < 1e-10);
        x = sol->step(x);
    }
}

TEST_CASE("solenoid rejects off-attractor inverse branches") {
    auto sol = make_solenoid(0.5, 0.1);
    CHECK_THROWS_AS(sol->inverse_step(vec3(0.3, 40.0, 0.0)), branch_error);
}

TEST_CASE("pcat inverse is a converged Newton solve") {
    auto pcat = make_pcat(0.05);
    CounterRng rng{77, 1};
    for (int t = 0; t < 100; ++t) {
        const Vec y = vec2(rng.u01(2 * t), rng.u01(2 * t + 1));
        const Vec x = pcat->inverse_step(y);
        CHECK(pcat->distance(pcat->step(x), y) < 1e-10);
    }
}

TEST_CASE("sample_lambda: toral grid basics") {
    auto cat = make_cat();
    const LambdaSample s = sample_lambda(cat, 4, 0);
    CHECK(s.size() == 4);
    CHECK(s.provenance == Provenance::dense_grid);
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec p = s.point(i);
        CHECK(p[0] >= 0.0);
        CHECK(p[0] < 1.0);
        CHECK(p[1] >= 0.0);
        CHECK(p[1] < 1.0);
    }
    // determinism
    const LambdaSample s2 = sample_lambda(cat, 4, 0);
    CHECK(s2.coord == s.coord);
    const LambdaSample s3 = sample_lambda(cat, 4, 1);
    CHECK(s3.coord != s.coord);
}

TEST_CASE("sample_lambda: solenoid orbit stays within the attractor radius") {
    auto sol = make_solenoid(0.5, 0.1);
    const LambdaSample s = sample_lambda(sol, 100, 3);
    CHECK(s.size() == 100);
    CHECK(s.provenance == Provenance::attractor_orbit);
    const double radius = 0.5 / (1.0 - 0.1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Vec p = s.point(i);
        CHECK(std::hypot(p[1], p[2]) <= radius + 1e-12);
    }
}

TEST_CASE("sample invariance: forward image stays near the sample") {
    auto cat = make_cat();
    const LambdaSample s = sample_lambda(cat, 200000, 0);
    CHECK(s.hausdorff_tol < 1e-2);
    auto sol = make_solenoid(0.5, 0.1);
    const LambdaSample so = sample_lambda(sol, 50000, 0);
    CHECK(so.hausdorff_tol < 1e-3);
}

TEST_CASE("unstable_direction: cat converges to the expanding eigenvector") {
    auto cat = make_cat();
    const Subspace u = unstable_direction(cat, vec2(0.3, 0.9), 30);
    Vec ev = vec2(1.0, (std::sqrt(5.0) - 1.0) / 2.0);
    ev /= ev.norm();
    const double cosang = std::fabs(ev.dot(u.basis().col(0)));
    CHECK(std::acos(std::min(1.0, cosang)) < 1e-10);
}

TEST_CASE("unstable_direction: prod4-linear recovers both block eigendirections") {
    auto p4 = make_prod4(0.0);
    const Subspace u = unstable_direction(p4, vec4(0.1, 0.2, 0.3, 0.4), 40);
    // the span of the two block unstable eigenvectors
    Vec e1 = Vec::Zero(4), e2 = Vec::Zero(4);
    const double s = (std::sqrt(5.0) - 1.0) / 2.0;
    e1.head(2) << 1.0, s;
    e2.tail(2) << 1.0, s;
    Mat truth(4, 2);
    truth.col(0) = e1 / e1.norm();
    truth.col(1) = e2 / e2.norm();
    const Subspace t(4, truth);
    CHECK(subspace_angle(u, t) < 1e-9);
}

TEST_CASE("unstable_direction: pcat stays near the cat eigenvector and is Cauchy") {
    auto pcat = make_pcat(0.03);
    const Vec x = vec2(0.21, 0.67);
    const Subspace u40 = unstable_direction(pcat, x, 40);
    const Subspace u80 = unstable_direction(pcat, x, 80);
    auto cat_dir = [] {
        Vec ev = vec2(1.0, (std::sqrt(5.0) - 1.0) / 2.0);
        Mat m(2, 1);
        m.col(0) = ev / ev.norm();
        return Subspace(2, m);
    }();
    CHECK(subspace_angle(u40, cat_dir) < 0.1);
    CHECK(subspace_angle(u40, u80) < 1e-8);
}

TEST_CASE("bundle invariance: Df(x) E^u(x) = E^u(f(x)) (property)") {
    CounterRng rng{5150, 0};
    std::vector<SystemPtr> systems = {make_cat(), make_pcat(0.03), make_prod4(0.02)};
    std::uint64_t ctr = 0;
    for (const auto& sys : systems) {
        for (int t = 0; t < 8; ++t) {
            Vec x(sys->ambient_dim());
            for (int d = 0; d < sys->ambient_dim(); ++d) x[d] = rng.u01(ctr++);
            const Subspace ex = unstable_direction(sys, x, 40);
            const Subspace efx = unstable_direction(sys, sys->step(x), 40);
            const Subspace pushed(sys->ambient_dim(), Mat(sys->jacobian(x) * ex.basis()));
            CHECK(subspace_angle(pushed, efx) < 1e-8);
        }
    }
}

TEST_CASE("cat: exact expansion along the unstable eigendirection") {
    auto cat = make_cat();
    Vec v = vec2(1.0, (std::sqrt(5.0) - 1.0) / 2.0);
    v /= v.norm();
    Mat a(2, 2);
    a << 2, 1, 1, 1;
    Vec w = v;
    for (int n = 1; n <= 12; ++n) {
        w = a * w;
        CHECK(w.norm() == doctest::Approx(std::pow(kCatLambda, n)).epsilon(1e-13));
    }
}

TEST_CASE("factory understands names, rejects bad parameters") {
    CHECK(make_system("cat", {})->name() == "cat");
    CHECK(make_system("prod4-linear", {})->known_rates().has_value());
    CHECK(make_system("prod4-perturbed", {})->params().at("eta") == 0.02);
    CHECK_THROWS_AS(make_system("henon", {}), domain_error);
    CHECK_THROWS_AS(make_pcat(0.2), domain_error);
    CHECK_THROWS_AS(make_solenoid(0.5, 0.7), domain_error);
}

TEST_CASE("blocked system composes steps and Jacobians") {
    auto pcat = make_pcat(0.03);
    auto b3 = make_blocked(pcat, 3);
    const Vec x = vec2(0.11, 0.73);
    CHECK(b3->distance(b3->step(x), iterate(pcat, x, 3)) < 1e-14);
    Mat j = Mat::Identity(2, 2);
    Vec y = x;
    for (int i = 0; i < 3; ++i) {
        j = pcat->jacobian(y) * j;
        y = pcat->step(y);
    }
    CHECK((b3->jacobian(x) - j).norm() < 1e-12);
    CHECK(b3->block_exponent() == 3);
    CHECK(b3->known_rates() == std::nullopt);
}
