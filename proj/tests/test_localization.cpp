#include <cmath>

#include "doctest.h"
#include "golden.hpp"
#include "ym/localization.hpp"

using namespace ym;
using namespace ym::testing;

TEST_CASE("blow_up: homogeneous density is a fixed point of the regular scaling") {
    GridDomain g = GridDomain::interval(0, 1, 64);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    for (int64_t c = 0; c < g.cell_count(); ++c) m.set_ac(c, Pt(3.0));
    VectorMeasure b = blow_up(m, Pt(0.5), 0.25, BlowupScaling::regular);
    for (int64_t c = 0; c < b.domain.cell_count(); ++c)
        CHECK(b.ac_at(c)[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("blow_up: unit atom under the singular scaling") {
    GridDomain g = GridDomain::interval(0, 1, 64);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    m.singular.push_back({Pt(0.5), Pt(1.0), 0.37});
    VectorMeasure b = blow_up(m, Pt(0.5), 0.25, BlowupScaling::singular);
    REQUIRE(b.singular.size() == 1);
    CHECK(b.singular[0].location[0] == doctest::Approx(0.0));
    CHECK(b.singular[0].mass == doctest::Approx(1.0));
}

TEST_CASE("blow_up: density x at x0 = 0.5, r = 0.1 against a 10-cell quadrature oracle") {
    GridDomain g = GridDomain::interval(0, 1, 1000);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    for (int64_t c = 0; c < g.cell_count(); ++c) m.set_ac(c, Pt(g.cell_center(c)[0]));
    double r = 0.1, x0 = 0.5;
    VectorMeasure b = blow_up(m, Pt(x0), r, BlowupScaling::regular, 10);
    // a(y) = r^d u(x0 + r y) * r^{-d} = u(x0 + r y); oracle per target cell
    for (int64_t c = 0; c < b.domain.cell_count(); ++c) {
        double y = b.domain.cell_center(c)[0];
        CHECK(b.ac_at(c)[0] == doctest::Approx(x0 + r * y).epsilon(1e-3));
    }
}

TEST_CASE("blow_up rejects cubes leaving the domain") {
    GridDomain g = GridDomain::interval(0, 1, 16);
    VectorMeasure m = VectorMeasure::zero(g, 1);
    CHECK_THROWS(blow_up(m, Pt(0.05), 0.5, BlowupScaling::regular));
}

TEST_CASE("torus_translate: uniform is invariant, atoms shift, group law holds") {
    GridDomain z = GridDomain::unit_torus(1, 32);
    ScalarMeasure uniform = ScalarMeasure::zero(z);
    for (auto& d : uniform.density) d = 1.0;
    ScalarMeasure moved = torus_translate(uniform, Pt(0.3));
    CHECK(tv_distance(moved, uniform) < 1e-12);

    FiberDist d;
    d.atoms.push_back({Pt(0.3), 1.0});
    FiberDist shifted = torus_translate(d, Pt(0.1));
    CHECK(shifted.atoms[0].point[0] == doctest::Approx(0.2));

    FiberDist back = torus_translate(shifted, Pt(-0.1));
    CHECK(back.atoms[0].point[0] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("tangent_measures: Lebesgue point of Lebesgue measure gives normalized Lebesgue") {
    GridDomain g = GridDomain::interval(0, 1, 128);
    ScalarMeasure m = ScalarMeasure::zero(g);
    for (auto& d : m.density) d = 1.0;
    auto tans = tangent_measures(m, Pt(0.5), {0.5, 0.25, 0.125, 0.0625});
    CHECK(tans.converged_at >= 0);
    const ScalarMeasure& tau = tans.blowups.back();
    CHECK(tau.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    for (int64_t c = 0; c < tau.domain.cell_count(); ++c)
        CHECK(tau.density[static_cast<size_t>(c)] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tangent_measures: atom gives delta_0; empty cube reports no tangent") {
    GridDomain g = GridDomain::interval(0, 1, 64);
    ScalarMeasure m = ScalarMeasure::zero(g);
    m.atoms.push_back({Pt(0.5), 2.0});
    auto tans = tangent_measures(m, Pt(0.5), {0.25, 0.125});
    REQUIRE(tans.blowups.back().atoms.size() == 1);
    CHECK(tans.blowups.back().atoms[0].location[0] == doctest::Approx(0.0));
    CHECK(tans.blowups.back().atoms[0].mass == doctest::Approx(1.0));

    ScalarMeasure empty = ScalarMeasure::zero(g);
    CHECK_THROWS_WITH_AS(tangent_measures(empty, Pt(0.5), {0.25}),
                         doctest::Contains("no tangent"), std::runtime_error);
}

TEST_CASE("tangent_measures: restriction of Lebesgue to [0,1/2] at an interior point") {
    GridDomain g = GridDomain::interval(0, 1, 256);
    ScalarMeasure m = ScalarMeasure::zero(g);
    for (int64_t c = 0; c < g.cell_count(); ++c)
        if (g.cell_center(c)[0] <= 0.5) m.density[static_cast<size_t>(c)] = 1.0;
    auto tans = tangent_measures(m, Pt(0.25), {0.25, 0.125, 0.0625});
    const ScalarMeasure& tau = tans.blowups.back();
    for (int64_t c = 0; c < tau.domain.cell_count(); ++c)
        CHECK(tau.density[static_cast<size_t>(c)] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("singular tangent of an interior deep spike: (delta_0, Dlambda, delta_<0>, delta_1)") {
    // translated spike with b = 0: pure concentration at the interior point a;
    // the pinned schedule fixes xi0 and Drho = Gamma^{xi0}_# delta_{xi0} = delta_0
    double a = 1.0 / std::sqrt(2.0), xi_target = 0.125;
    SequenceSpec spec;
    spec.kind = SeqKind::translated_spike;
    spec.a = a;
    spec.b = 0.0;
    spec.domain = GridDomain::interval(0, 1, 64);
    for (int n : {64, 128, 256, 512, 1024, 2048})
        spec.epsilons.push_back(a / (n + xi_target));
    auto est = estimate_young_measure(spec);

    TangentOptions topt;
    topt.radii = {0.25, 0.125, 0.0625, 0.03125};
    topt.singular_ratio_tol = 0.05;
    auto tan = tangent_young(est.ym, spec, Pt(a), BlowupScaling::singular, topt);
    CHECK(tan.xi0 == doctest::Approx(xi_target).epsilon(1e-9));
    // D nu = delta_0: no oscillation table entries away from zero
    for (const auto& [k, d] : tan.tangent.nu) {
        (void)k;
        for (const auto& at : d.atoms) CHECK(norm(at.point) < 1e-12);
    }
    REQUIRE(tan.tangent.conc.lambda.atoms.size() == 1);
    CHECK(std::fabs(tan.tangent.conc.lambda.atoms[0].location[0]) <= 2.0 / 64);
    CHECK(tan.tangent.conc.lambda.atoms[0].mass == doctest::Approx(1.0).epsilon(0.02));
    // rho concentrated near 0 on the torus (the xi0 translation cancels)
    const RhoDist& rho = tan.tangent.conc.rho_atom[0];
    double mass_near_0 = 0;
    for (const auto& at : rho.atoms)
        if (torus_dist(at.xi[0], 0.0) < 3.0 / 64) mass_near_0 += at.w;
    CHECK(mass_near_0 >= 0.98);
    CHECK(tan.warnings.empty());
    CHECK(tan.reestimated);
    CHECK(tan.reestimate_diff.rho_tv_max <= 0.02);
    CHECK(tan.reestimate_diff.nuinf_tv_max <= 0.02);
}

TEST_CASE("translated spike: two schedules give Drho = delta_b after translation") {
    double a = 1.0 / std::sqrt(2.0), b = 0.3;
    auto run = [&](double xi_target) {
        SequenceSpec spec;
        spec.kind = SeqKind::translated_spike;
        spec.a = a;
        spec.b = b;
        spec.domain = GridDomain::interval(0, 1, 64);
        for (int n : {64, 128, 256, 512, 1024, 2048})
            spec.epsilons.push_back(a / (n + xi_target));
        auto est = estimate_young_measure(spec);
        TangentOptions topt;
        topt.radii = {0.25, 0.125};
        topt.reestimate = true;
        return tangent_young(est.ym, spec, Pt(a), BlowupScaling::singular, topt);
    };
    auto tan1 = run(0.25);
    auto tan2 = run(0.60);
    CHECK(tan1.xi0 == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(tan2.xi0 == doctest::Approx(0.60).epsilon(1e-9));
    // both singular tangents carry rho = delta_b within 2 cells
    GridDomain z = GridDomain::unit_torus(1, 64);
    for (const auto* tan : {&tan1, &tan2}) {
        const RhoDist& rho = tan->tangent.conc.rho_atom.at(0);
        double mass_near_b = 0;
        for (const auto& a2 : rho.atoms)
            if (torus_dist(a2.xi[0], b) <= 2.0 / 64 + 1e-12) mass_near_b += a2.w;
        CHECK(mass_near_b >= 0.99);
    }
    // the raw rho's of the two tangents agree (both are delta_b) to 1% TV
    RhoDist r1 = tan1.tangent.conc.rho_atom.at(0);
    RhoDist r2 = tan2.tangent.conc.rho_atom.at(0);
    FiberDist f1, f2;
    for (const auto& at : r1.atoms) f1.atoms.push_back({at.xi, at.w});
    for (const auto& at : r2.atoms) f2.atoms.push_back({at.xi, at.w});
    CHECK(tv_distance(f1, f2, z) <= 0.01);
}

TEST_CASE("regular tangent of the sine sequence: homogeneous in y, lambda = 0") {
    SequenceSpec spec;
    spec.kind = SeqKind::sine;
    spec.alpha = 1.0;
    spec.domain = GridDomain::interval(0, 1, 64);
    double x0 = 0.5;
    // schedule pinning frac(x0/eps) = 0.125: eps = x0/(n + 0.125)
    for (int n : {16, 32, 64, 128, 256, 512}) spec.epsilons.push_back(x0 / (n + 0.125));
    EstimateOptions eopt;
    eopt.fine_res = 8192;
    eopt.win = 16;
    eopt.zres = 32;
    auto est = estimate_young_measure(spec, eopt);
    CHECK(est.ym.conc.lambda.total_mass() < 0.01);  // no concentration

    TangentOptions topt;
    topt.radii = {0.5, 0.25};
    topt.est = eopt;
    topt.est.fine_res = 16384;
    auto tan = tangent_young(est.ym, spec, Pt(x0), BlowupScaling::regular, topt);
    CHECK(tan.xi0 == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(tan.warnings.empty());
    // direct formula: D nu_{y,xi} = delta_{sin(2 pi (xi + xi0))}
    const GridDomain& z = tan.tangent.torus;
    for (int64_t cz = 0; cz < z.cell_count(); cz += 3) {
        const FiberDist& d = tan.tangent.nu_at(0, cz);
        double mean = 0;
        for (const auto& a : d.atoms) mean += a.w * a.point[0];
        double expected = std::sin(2 * M_PI * frac01(z.cell_center(cz)[0] + tan.xi0));
        CHECK(mean == doctest::Approx(expected).epsilon(0.08));
    }
    CHECK(tan.reestimated);
    CHECK(tan.reestimate_diff.nu_mean_l1 <= 0.05);
}

TEST_CASE("tangent_young reports a non-convergent subsequence") {
    SequenceSpec spec;
    spec.kind = SeqKind::spike;
    spec.alpha = 2.0;
    spec.domain = GridDomain::interval(0, 1, 64);
    for (int k = 4; k <= 10; ++k) spec.epsilons.push_back(std::pow(2.0, -k));
    auto est = estimate_young_measure(spec);
    // frac(0.37 * 2^k) wanders around the torus along the dyadic schedule
    TangentOptions topt;
    topt.radii = {0.25};
    topt.reestimate = false;
    CHECK_THROWS_WITH_AS(
        tangent_young(est.ym, spec, Pt(0.37), BlowupScaling::singular, topt),
        doctest::Contains("refine the subsequence"), std::runtime_error);
}
