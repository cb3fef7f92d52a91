#include <cmath>

#include "doctest.h"
#include "golden.hpp"
#include "ym/young.hpp"

using namespace ym;
using namespace ym::testing;

namespace {

double quad1(const GridDomain& g, const std::function<double(double)>& f) {
    double s = 0;
    for (int64_t c = 0; c < g.cell_count(); ++c) s += f(g.cell_center(c)[0]);
    return s * g.cell_volume();
}

Integrand tensor_phi_g_h(std::function<double(double)> phi, std::function<double(double)> g,
                         const std::string& hname) {
    Integrand h = make_integrand(hname);
    Integrand f;
    f.name = "test_tensor";
    f.value_dim = 1;
    auto he = h.eval;
    auto hr = h.recession_fn;
    f.eval = [phi, g, he](const Pt& x, const Pt& xi, const Pt& z) {
        return phi(x[0]) * g(xi[0]) * he(Pt(), Pt(), z);
    };
    f.recession_fn = [phi, g, hr](const Pt& x, const Pt& xi, const Pt& z) {
        return phi(x[0]) * g(xi[0]) * hr(Pt(), Pt(), z);
    };
    f.growth_constant = 20.0;
    return f;
}

}  // namespace

TEST_CASE("pairing of phi x g x 1 is quad(phi) quad(g) for any ym") {
    Grids grids;
    auto phi = [](double x) { return 1.0 + x * x; };
    auto g = [](double xi) { return 1.0 + std::cos(2 * M_PI * xi); };
    Integrand f = tensor_phi_g_h(phi, g, "one");
    double expected = quad1(grids.omega, phi) * quad1(grids.torus, g);
    for (uint64_t seed : {1ull, 2ull}) {
        TwoScaleYoungMeasure ym = random_ym(grids, seed);
        // h = 1 has zero recession: the concentration term drops out
        CHECK(pairing(f, ym) == doctest::Approx(expected).epsilon(1e-12));
    }
    TwoScaleYoungMeasure triv = empty_ym(grids);
    CHECK(pairing(f, triv) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pairing against the pure point concentration (spike, alpha > 1)") {
    // ym = (delta_0, delta_0, delta_0, delta_1) on Omega = (-1,1):
    // <<phi x g x h, ym>> = h(0) int phi int g + phi(0) g(0) h_inf(1)
    Grids grids;
    grids.omega = GridDomain::interval(-1, 1, 64);
    TwoScaleYoungMeasure ym = point_concentration(grids, 0.0, 0.0, +1.0);
    auto phi = [](double x) { return 2.0 + std::sin(x); };
    auto g = [](double xi) { return 1.0 + 0.5 * std::cos(2 * M_PI * xi); };
    Integrand f = tensor_phi_g_h(phi, g, "sqrt1pz2");  // h(0)=1, h_inf(1)=1
    double expected = quad1(grids.omega, phi) * quad1(grids.torus, g) + phi(0.0) * g(0.0);
    CHECK(pairing(f, ym) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pairing against the Fakir carpet tuple") {
    // <<phi x g x h>> = h(0) int phi int g + g(0) (h_inf(1)+h_inf(-1))/2 int_0^1/2 phi
    Grids grids;
    TwoScaleYoungMeasure ym = fakir_golden(grids);
    auto phi = [](double x) { return 1.0 + x; };
    auto g = [](double xi) { return 1.0 + std::sin(2 * M_PI * xi); };
    Integrand f = tensor_phi_g_h(phi, g, "abs");  // h(0)=0, h_inf(+-1)=1
    double half_phi = 0;
    for (int64_t c = 0; c < grids.omega.cell_count(); ++c) {
        double x = grids.omega.cell_center(c)[0];
        if (x <= 0.5) half_phi += phi(x) * grids.omega.cell_volume();
    }
    double expected = g(0.0) * half_phi;
    CHECK(pairing(f, ym) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("compactify of the trivial ym is Lebesgue x Lebesgue x delta_0") {
    Grids grids;
    TwoScaleYoungMeasure ym = empty_ym(grids);
    CompactifiedMeasure mu = compactify(ym);
    CHECK(mu.total_mass() == doctest::Approx(grids.omega.volume()));
    for (const auto& e : mu.entries) {
        CHECK(e.layer == 0);
        CHECK(norm(e.z) == 0.0);
    }
    CHECK(verify_representation_identity(mu) < 1e-12);
}

TEST_CASE("compactify of the point concentration pairs correctly on 20 registry integrands") {
    Grids grids;
    grids.omega = GridDomain::interval(-1, 1, 32);
    TwoScaleYoungMeasure ym = point_concentration(grids, 0.0, 0.0, +1.0);
    CompactifiedMeasure mu = compactify(ym);
    auto family = separating_family(grids.omega, 1, 27);
    int checked = 0;
    for (const auto& f : family) {
        CHECK(pair_compactified(f, mu) == doctest::Approx(pairing(f, ym)).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("roundtrip decompose(compactify(ym)) preserves pairings and components") {
    Grids grids;
    grids.omega = GridDomain::interval(0, 1, 16);
    grids.torus = GridDomain::unit_torus(1, 16);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        TwoScaleYoungMeasure ym = random_ym(grids, seed);
        ym.validate();
        TwoScaleYoungMeasure back = decompose_compactified(compactify(ym));
        back.validate();
        YmDiff d = ym_distance(back, ym);
        CHECK(d.nu_tv_max < 1e-8);
        CHECK(d.lambda_tv < 1e-8);
        CHECK(d.rho_tv_max < 1e-8);
        CHECK(d.nuinf_tv_max < 1e-8);
        CHECK(d.atom_loc_cells < 1e-8);
        Integrand probe = make_integrand("tensor:bump:cos1:sqrt1pz2");
        CHECK(pairing(probe, back) == doctest::Approx(pairing(probe, ym)).epsilon(1e-12));
    }
}

TEST_CASE("isometry: pairing equals <Tf, S* ym> across the registry to 1e-10") {
    Grids grids;
    TwoScaleYoungMeasure ym = random_ym(grids, 42);
    CompactifiedMeasure mu = compactify(ym);
    for (const auto& name : registry_names()) {
        if (name.rfind("aniso_quad", 0) == 0) continue;  // not in E^2
        Integrand f = make_integrand(name);
        double a = pairing(f, ym), b = pair_compactified(f, mu);
        CHECK(std::fabs(a - b) <= 1e-10 * (1.0 + std::fabs(b)));
    }
}

TEST_CASE("zero measure fails the representation identity") {
    Grids grids;
    CompactifiedMeasure mu;
    mu.omega = grids.omega;
    mu.torus = grids.torus;
    mu.ball = grids.ball;
    double dev = verify_representation_identity(mu);
    CHECK(dev >= grids.omega.volume() - 1e-12);  // phi = g = 1 already fails
    CHECK_THROWS_AS(decompose_compactified(mu), std::runtime_error);
}

TEST_CASE("doubled interior weight violates the representation identity and is rejected") {
    Grids grids;
    TwoScaleYoungMeasure ym = empty_ym(grids);
    CompactifiedMeasure mu = compactify(ym);
    for (auto& e : mu.entries) e.w *= 2.0;
    // int phi g (1-|zhat|) dmu = 2 int phi int g != int phi int g
    CHECK(verify_representation_identity(mu) >= 0.5);
    CHECK_THROWS(decompose_compactified(mu));
}

TEST_CASE("embed_measure of the zero measure") {
    GridDomain g = GridDomain::interval(0, 1, 16);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    TwoScaleYoungMeasure ym = embed_measure(m);
    CHECK(ym.conc.lambda.total_mass() == 0.0);
    CHECK(ym.nu.empty());  // delta_0 everywhere
    for (int64_t cx = 0; cx < 4; ++cx) {
        const FiberDist& d = ym.nu_at(cx, 0);
        REQUIRE(d.atoms.size() == 1);
        CHECK(norm(d.atoms[0].point) == 0.0);
    }
}

TEST_CASE("embed_measure of a point mass: lambda atom, uniform rho, delta direction") {
    GridDomain g = GridDomain::interval(-1, 1, 16);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    m.singular.push_back({Pt(0.0), Pt(1.0), 1.0});
    TwoScaleYoungMeasure ym = embed_measure(m);
    REQUIRE(ym.conc.lambda.atoms.size() == 1);
    CHECK(ym.conc.lambda.atoms[0].mass == 1.0);
    CHECK(ym.conc.rho_atom[0].uniform);
    REQUIRE(ym.conc.rho_atom[0].uniform_dirs.size() == 1);
    CHECK(ym.conc.rho_atom[0].uniform_dirs[0].dir[0] == 1.0);
}

TEST_CASE("pair(phi x 1 x |z|, embed(m)) equals int phi d|m| (quadrature oracle)") {
    GridDomain g = GridDomain::interval(0, 1, 128);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    for (int64_t c = 0; c < g.cell_count(); ++c) m.set_ac(c, Pt(g.cell_center(c)[0]));
    TwoScaleYoungMeasure ym = embed_measure(m);
    auto phi = [](double x) { return 2.0 - x; };
    Integrand f = tensor_phi_g_h(phi, [](double) { return 1.0; }, "abs");
    double oracle = quad1(g, [&](double x) { return phi(x) * std::fabs(x); });
    CHECK(pairing(f, ym) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("compactness surrogate: mixtures of bounded ym's stay representable") {
    // ten perturbed ym's with a uniform mass bound; a Cauchy-selected
    // mixture of their compactified images satisfies the identity and
    // decomposes again
    Grids grids;
    grids.omega = GridDomain::interval(0, 1, 16);
    grids.torus = GridDomain::unit_torus(1, 16);
    std::vector<CompactifiedMeasure> mus;
    double bound = 0;
    for (uint64_t seed = 100; seed < 110; ++seed) {
        TwoScaleYoungMeasure ym = random_ym(grids, seed);
        bound = std::max(bound, ym.mass_bound());
        mus.push_back(compactify(ym));
    }
    CHECK(bound < 1e6);
    auto family = separating_family(grids.omega, 1, 27);
    auto pair_vec = [&](const CompactifiedMeasure& mu) {
        std::vector<double> v;
        for (const auto& f : family) v.push_back(pair_compactified(f, mu));
        return v;
    };
    auto v0 = pair_vec(mus[0]);
    size_t jbest = 1;
    double best = 1e300;
    for (size_t j = 1; j < mus.size(); ++j) {
        auto vj = pair_vec(mus[j]);
        double d = 0;
        for (size_t k = 0; k < vj.size(); ++k) d = std::max(d, std::fabs(vj[k] - v0[k]));
        if (d < best) {
            best = d;
            jbest = j;
        }
    }
    CompactifiedMeasure mix = mus[0];
    for (auto& e : mix.entries) e.w *= 0.5;
    for (auto e : mus[jbest].entries) {
        e.w *= 0.5;
        mix.entries.push_back(e);
    }
    CHECK(verify_representation_identity(mix) < 1e-10);
    TwoScaleYoungMeasure lim = decompose_compactified(mix);
    lim.validate();
    CHECK(verify_representation_identity(compactify(lim)) < 1e-10);
}

TEST_CASE("pairing is bounded by ||Tf||_inf (vol + <|z|,nu> mass + lambda mass)") {
    Grids grids;
    grids.omega = GridDomain::interval(0, 1, 16);
    grids.torus = GridDomain::unit_torus(1, 16);
    for (uint64_t seed : {5ull, 6ull, 7ull}) {
        TwoScaleYoungMeasure ym = random_ym(grids, seed);
        double budget = grids.omega.volume() + ym.mass_bound();
        for (const auto& name : {"abs", "sqrt1pz2", "hinge1", "pospart"}) {
            Integrand f = make_integrand(name);
            auto tf = transform(f);
            double sup_tf = 0;  // sample ||Tf||_inf over the closed ball
            for (int i = -40; i <= 40; ++i)
                for (double x : {0.1, 0.6})
                    sup_tf = std::max(sup_tf,
                                      std::fabs(tf.eval(Pt(x), Pt(0.3), Pt(i / 40.0))));
            CHECK(std::fabs(pairing(f, ym)) <= sup_tf * budget + 1e-9);
        }
    }
}
