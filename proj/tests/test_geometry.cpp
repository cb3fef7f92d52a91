#include "doctest.h"
#include "ym/geometry.hpp"

using namespace ym;

TEST_CASE("grid indexing round-trips and boundary points go to the lower cell") {
    GridDomain g = GridDomain::interval(0.0, 1.0, 8);
    CHECK(g.cell_count() == 8);
    CHECK(g.cell_volume() == doctest::Approx(0.125));
    CHECK(g.cell_index(Pt(0.0)) == 0);
    CHECK(g.cell_index(Pt(1.0)) == 7);
    // interior boundary 0.25 belongs to cell 1 (lower index)
    CHECK(g.cell_index(Pt(0.25)) == 1);
    for (int64_t c = 0; c < g.cell_count(); ++c)
        CHECK(g.cell_index(g.cell_center(c)) == c);
}

TEST_CASE("torus axes wrap") {
    GridDomain z = GridDomain::unit_torus(1, 4);
    CHECK(z.cell_index(Pt(1.25)) == z.cell_index(Pt(0.25)));
    CHECK(z.cell_index(Pt(-0.1)) == 3);
    CHECK(torus_dist(0.95, 0.05) == doctest::Approx(0.1));
}

TEST_CASE("2d row-major flatten") {
    GridDomain g = GridDomain::box({0, 0}, {1, 1}, {4, 8});
    Pt p(0.9, 0.1);
    auto m = g.cell_multi(g.cell_index(p));
    CHECK(m[0] == 3);
    CHECK(m[1] == 0);
    CHECK(g.flatten(m) == 3 * 8 + 0);
}

TEST_CASE("resolution below 2 is rejected") {
    CHECK_THROWS(GridDomain::interval(0, 1, 1));
}

TEST_CASE("ball grid: rings, snap radius, direction bins") {
    BallGrid b = BallGrid::make(1, 24);
    CHECK(b.dirs == 2);
    CHECK(b.snap_radius() == doctest::Approx(23.0 / 24.0));
    CHECK(b.dir_index(Pt(0.7)) == 1);
    CHECK(b.dir_index(Pt(-0.1)) == 0);
    CHECK(b.ring_index(0.0) == 0);
    CHECK(b.ring_index(0.99) == 23);

    BallGrid b2 = BallGrid::make(2, 16, 8);
    Pt e1(1.0, 0.0);
    Pt d = b2.dir_center(b2.dir_index(e1));
    CHECK(norm(d) == doctest::Approx(1.0));
    // the representative stays within the angular bin
    CHECK(dot(d, e1) > std::cos(2.0 * M_PI / 8));
}

TEST_CASE("affine map with torus reduction") {
    AffineMap map;
    map.shift = Pt(0.5);
    map.scale = 0.1;
    Pt y = map.apply(Pt(0.55));
    CHECK(y[0] == doctest::Approx(0.5));
    AffineMap tr;
    tr.shift = Pt(0.3);
    tr.scale = 1.0;
    tr.mod_torus = true;
    CHECK(tr.apply(Pt(0.1))[0] == doctest::Approx(0.8));
}
