#include <cmath>
#include <random>

#include "doctest.h"
#include "ym/integrand.hpp"

using namespace ym;

TEST_CASE("T of the constant 1 is 1 - |zhat|") {
    Integrand one = make_integrand("one");
    auto t = transform(one);
    for (double r : {0.0, 0.3, 0.7, 0.95})
        CHECK(t.eval(Pt(0.5), Pt(0.0), Pt(r)) == doctest::Approx(1.0 - r));
    CHECK(t.eval(Pt(0.5), Pt(0.0), Pt(1.0)) == doctest::Approx(0.0));
}

TEST_CASE("T of |z| is |zhat| with boundary value 1") {
    Integrand f = make_integrand("abs");
    auto t = transform(f);
    for (double r : {0.0, 0.25, 0.5, 0.9})
        CHECK(t.eval(Pt(0.0), Pt(0.0), Pt(-r)) == doctest::Approx(r));
    CHECK(t.eval(Pt(0.0), Pt(0.0), Pt(-1.0)) == doctest::Approx(1.0));
}

TEST_CASE("T of sqrt(1+z^2) extends continuously to 1 at the boundary") {
    Integrand f = make_integrand("sqrt1pz2");
    auto t = transform(f);
    // grid of zhat -> +-1: limit of (1-|zhat|) f(zhat/(1-|zhat|)) is 1
    double prev_gap = 1e9;
    for (double r : {0.9, 0.99, 0.999, 0.9999}) {
        double gap = std::fabs(t.eval(Pt(0.0), Pt(0.0), Pt(r)) - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
        gap = std::fabs(t.eval(Pt(0.0), Pt(0.0), Pt(-r)) - 1.0);
        CHECK(gap < 2e-1);
    }
    CHECK(t.eval(Pt(0.0), Pt(0.0), Pt(1.0)) == doctest::Approx(1.0));
    CHECK(t.eval(Pt(0.0), Pt(0.0), Pt(-1.0)) == doctest::Approx(1.0));
}

TEST_CASE("S(T(f)) = f on random samples (roundtrip isometry)") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uz(-20.0, 20.0), u01(0.0, 1.0);
    for (const auto& name : {"abs", "sqrt1pz2", "hinge1", "pospart",
                             "tensor:bump:cos1:sqrt1pz2"}) {
        Integrand f = make_integrand(name);
        auto t = transform(f);
        auto g = [&](const Pt& x, const Pt& xi, const Pt& zhat) { return t.eval(x, xi, zhat); };
        for (int i = 0; i < 100; ++i) {
            Pt x(u01(rng)), xi(u01(rng)), z(uz(rng));
            double back = apply_S(g, x, xi, z);
            CHECK(back == doctest::Approx(f.eval(x, xi, z)).epsilon(1e-10));
        }
    }
}

TEST_CASE("recession of |z| is 1 in every mode") {
    Integrand f = make_integrand("abs");
    f.recession_fn = nullptr;  // force the numeric path
    for (auto mode : {RecessionMode::strong, RecessionMode::upper, RecessionMode::lower}) {
        auto r = recession(f, mode, Pt(0.5), Pt(0.0), Pt(1.0));
        CHECK(r.exists);
        CHECK(r.value == doctest::Approx(1.0));
    }
}

TEST_CASE("recession of sqrt(1+z^2) at z=-1: strong exists, limit grid to 1e6") {
    Integrand f = make_integrand("sqrt1pz2");
    f.recession_fn = nullptr;
    // oracle: direct evaluation of f(tz)/t at t = 1e6
    double oracle = std::sqrt(1.0 + 1e12) / 1e6;
    auto r = recession(f, RecessionMode::strong, Pt(0.0), Pt(0.0), Pt(-1.0));
    CHECK(r.exists);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("recession of sin(z)+z at z=1 is 1, strong exists") {
    Integrand f;
    f.name = "sinz_plus_z";
    f.value_dim = 1;
    f.eval = [](const Pt&, const Pt&, const Pt& z) { return std::sin(z[0]) + z[0]; };
    f.growth_constant = 2.0;
    auto up = recession(f, RecessionMode::upper, Pt(0.0), Pt(0.0), Pt(1.0));
    auto lo = recession(f, RecessionMode::lower, Pt(0.0), Pt(0.0), Pt(1.0));
    auto st = recession(f, RecessionMode::strong, Pt(0.0), Pt(0.0), Pt(1.0));
    CHECK(up.value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(lo.value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(up.value >= lo.value);
    CHECK(st.exists);
    CHECK(st.value == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("quadratic growth has no finite recession") {
    Integrand f = make_integrand("aniso_quad:1");
    auto r = recession(f, RecessionMode::strong, Pt(0.0), Pt(0.25), Pt(1.0));
    CHECK(!r.finite);
    CHECK(!r.exists);
    CHECK_THROWS(recession_value(f, Pt(0.0), Pt(0.25), Pt(1.0)));
}

TEST_CASE("upper >= lower always; modes are 1-homogeneous") {
    Integrand f;
    f.name = "osc";
    f.value_dim = 1;
    // sign-dependent slope: recession differs by direction but exists per ray
    f.eval = [](const Pt&, const Pt&, const Pt& z) {
        return z[0] >= 0 ? 2.0 * z[0] : -0.5 * z[0];
    };
    f.growth_constant = 2.0;
    for (double zdir : {1.0, -1.0}) {
        auto up = recession(f, RecessionMode::upper, Pt(0.0), Pt(0.0), Pt(zdir));
        auto lo = recession(f, RecessionMode::lower, Pt(0.0), Pt(0.0), Pt(zdir));
        CHECK(up.value >= lo.value - 1e-12);
    }
    // 1-homogeneity via recession_value on a scaled vector
    Integrand a = make_integrand("abs");
    CHECK(recession_value(a, Pt(0.0), Pt(0.0), Pt(-3.0)) == doctest::Approx(3.0));
}

TEST_CASE("linear-growth and convexity sample validation") {
    GridDomain omega = GridDomain::interval(0, 1, 8);
    for (const auto& name : {"one", "abs", "sqrt1pz2", "hinge1", "pospart"})
        CHECK_NOTHROW(make_integrand(name).validate_samples(omega));
    // broken growth constant is caught
    Integrand f = make_integrand("abs");
    f.growth_constant = 0.1;
    CHECK_THROWS(f.validate_samples(omega));
}

TEST_CASE("convex linear-growth integrands have strong recession everywhere sampled") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& name : {"abs", "sqrt1pz2", "hinge1", "hinge-1"}) {
        Integrand f = make_integrand(name);
        f.recession_fn = nullptr;
        for (int i = 0; i < 20; ++i) {
            Pt dir(u(rng) >= 0 ? 1.0 : -1.0);
            auto r = recession(f, RecessionMode::strong, Pt(0.5), Pt(0.5), dir);
            CHECK(r.exists);
            CHECK(r.finite);
        }
    }
}

TEST_CASE("T requires linear growth and reports the offending point") {
    Integrand f = make_integrand("aniso_quad:1");
    CHECK_THROWS(transform(f));
    Integrand g;
    g.name = "halfline";
    g.value_dim = 1;
    // linear growth but genuinely oscillating at infinity: sin(log(1+|z|)) z
    g.eval = [](const Pt&, const Pt&, const Pt& z) {
        return std::sin(std::log1p(std::fabs(z[0]))) * z[0];
    };
    g.growth_constant = 1.0;
    auto t = transform(g);
    CHECK_THROWS_WITH_AS(t.eval(Pt(0.0), Pt(0.0), Pt(1.0)), doctest::Contains("not in E2"),
                         std::runtime_error);
}

TEST_CASE("separating family: nonnegative, Lipschitz h with analytic recession") {
    GridDomain omega = GridDomain::interval(0, 1, 16);
    auto family = separating_family(omega, 1, 125);
    CHECK(family.size() == 125);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0, 1), uz(-5, 5);
    for (size_t i = 0; i < family.size(); i += 13) {
        const auto& f = family[i];
        CHECK(f.flags.tensor);
        for (int s = 0; s < 10; ++s) {
            Pt x(u01(rng)), xi(u01(rng)), z(uz(rng));
            CHECK(f.eval(x, xi, z) >= -1e-12);
            CHECK(f.recession_fn(x, xi, z) >= -1e-12);
        }
    }
}

TEST_CASE("norm equality ||Tf||_inf == ||f||_E2 on a sample") {
    Integrand f = make_integrand("sqrt1pz2");
    auto t = transform(f);
    double sup_t = 0;
    for (int i = -50; i <= 50; ++i) {
        double zh = i / 50.0;
        sup_t = std::max(sup_t, std::fabs(t.eval(Pt(0.5), Pt(0.5), Pt(zh))));
    }
    // ||f||_E2 = sup over z of |f(z)|/(1+|z|) = 1 at z=0 for sqrt(1+z^2)
    CHECK(sup_t == doctest::Approx(1.0).epsilon(1e-9));
}
