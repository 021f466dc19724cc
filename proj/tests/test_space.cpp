#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bbmlab/cantor.hpp"
#include "bbmlab/space.hpp"

using namespace bbmlab;
using doctest::Approx;

namespace {

Space unit_interval(std::size_t n) { return Space::weighted_interval({0.0, 1.0}, {1.0}, n); }

}  // namespace

TEST_CASE("weighted interval masses") {
    CHECK(unit_interval(1000).total_mass() == Approx(1.0).epsilon(1e-14));
    const Space s = Space::weighted_interval({0.0, 0.375, 0.625, 1.0}, {2.0, 1.0, 2.0}, 1000);
    CHECK(s.total_mass() == Approx(1.75).epsilon(1e-14));
    for (std::size_t k = 0; k < s.size(); ++k) {
        REQUIRE(s.cell_mass(k) > 0.0);
        CHECK(s.cell_mass(k) == Approx(s.density(k) * (s.cell_hi(k) - s.cell_lo(k))).epsilon(1e-15));
        if (k > 0) CHECK(s.coords()[k] > s.coords()[k - 1]);
    }
    // Breakpoints that miss the uniform edges split a cell.
    const Space split = Space::weighted_interval({0.0, 0.3333, 1.0}, {1.0, 3.0}, 10);
    CHECK(split.size() == 11);
    CHECK(split.total_mass() == Approx(0.3333 + 3.0 * 0.6667).epsilon(1e-14));
}

TEST_CASE("weighted interval rejects bad input") {
    CHECK_THROWS_AS(Space::weighted_interval({0.0, 1.0}, {1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(Space::weighted_interval({0.0, 0.6, 0.4, 1.0}, {1.0, 1.0, 1.0}, 10), InvalidArgument);
    CHECK_THROWS_AS(Space::weighted_interval({0.0, 1.0}, {0.0}, 10), InvalidArgument);
    CHECK_THROWS_AS(Space::weighted_interval({0.0, 1.0}, {-1.0}, 10), InvalidArgument);
}

TEST_CASE("planar grid") {
    CHECK(Space::planar_grid(100, 100).total_mass() == Approx(1.0).epsilon(1e-13));
    const Space s = Space::planar_grid(2, 2);
    CHECK(s.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(s.cell_mass(k) == 0.25);
    CHECK(Space::planar_grid(100, 50).cell_mass(7) == Approx(2e-4).epsilon(1e-14));
    CHECK_THROWS_AS(Space::planar_grid(1, 5), InvalidArgument);
}

TEST_CASE("ball measure") {
    const Space s = unit_interval(1000);
    CHECK(s.ball_measure(Point{0.5, 0.0}, 0.1) == Approx(0.2).epsilon(1e-14));
    CHECK(s.ball_measure(Point{0.0, 0.0}, 0.1) == Approx(0.1).epsilon(1e-14));
    CHECK(s.ball_measure(Point{0.3, 0.0}, 5.0) == Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(s.ball_measure(Point{0.3, 0.0}, 0.0), InvalidArgument);

    const Space c = cantor_space(build_cantor_model(1), cantor_min_cells(1));
    CHECK(c.ball_measure(Point{0.5, 0.0}, 0.125) == Approx(0.25).epsilon(1e-14));
    CHECK(c.total_mass() == Approx(1.75).epsilon(1e-14));

    // Monotone and continuous in r on a weighted space.
    double prev = 0.0;
    for (int k = 1; k <= 400; ++k) {
        const double m = c.ball_measure(Point{0.41, 0.0}, k * 0.0025);
        CHECK(m >= prev);
        CHECK(m - prev <= 2.0 * 2.0 * 0.0025 + 1e-15);
        prev = m;
    }
}

TEST_CASE("planar ball measure approaches the disc area") {
    const Space coarse = Space::planar_grid(64, 64), fine = Space::planar_grid(512, 512);
    const double r = 0.05;
    const double exact = std::numbers::pi * r * r;
    // Exact integration: independent of the grid.
    CHECK(coarse.ball_measure(Point{0.5, 0.5}, r) == Approx(exact).epsilon(1e-12));
    CHECK(fine.ball_measure(Point{0.5, 0.5}, r) == Approx(exact).epsilon(1e-12));
    // Corner clipping gives a quarter disc.
    CHECK(fine.ball_measure(Point{0.0, 0.0}, r) == Approx(exact / 4).epsilon(1e-12));
    // Cell overlaps sum to the ball measure.
    double sum = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k) sum += coarse.cell_ball_overlap(k, Point{0.31, 0.52}, 0.1);
    CHECK(sum == Approx(coarse.ball_measure(Point{0.31, 0.52}, 0.1)).epsilon(1e-12));
}

TEST_CASE("neighbors within") {
    const Space s = unit_interval(1000);
    CHECK(s.neighbors_within(500, 0.0095).size() == 18);  // open ball, center excluded
    CHECK(s.neighbors_within(500, 1e-4).empty());
    CHECK(s.neighbors_within(500, 2.0).size() == 999);
    // Exactness on an irregular weighted space.
    const Space w = Space::weighted_interval({0.0, 0.3333, 1.0}, {1.0, 3.0}, 97);
    for (std::size_t c : {0ul, 31ul, 32ul, 96ul}) {
        const auto nb = w.neighbors_within(c, 0.05);
        std::size_t j = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (k == c) continue;
            const bool inside = w.distance(k, c) < 0.05;
            if (inside) {
                REQUIRE(j < nb.size());
                CHECK(nb[j++] == k);
            }
        }
        CHECK(j == nb.size());
    }
    const Space g = Space::planar_grid(20, 20);
    for (std::size_t k : g.neighbors_within(210, 0.12)) CHECK(g.distance(k, 210) < 0.12);
    std::size_t count = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (k != 210 && g.distance(k, 210) < 0.12) ++count;
    CHECK(g.neighbors_within(210, 0.12).size() == count);
}

TEST_CASE("doubling audits") {
    const Space s = unit_interval(1000);
    const auto d = audit_doubling(s, default_sample(s));
    CHECK(d.C_d <= 2.0 + 1e-12);
    CHECK(d.C_d >= 1.5);

    const Space c = cantor_space(build_cantor_model(3), cantor_min_cells(3));
    CHECK(audit_doubling(c, default_sample(c)).C_d <= 4.0);
    const Space g = Space::planar_grid(64, 64);
    CHECK(audit_doubling(g, default_sample(g, 33)).C_d <= 4.0 + 1e-12);

    // Invariant under rescaling every density.
    const Space a = Space::weighted_interval({0.0, 0.4, 1.0}, {1.0, 2.0}, 500);
    const Space b = Space::weighted_interval({0.0, 0.4, 1.0}, {3.0, 6.0}, 500);
    CHECK(audit_doubling(a, default_sample(a)).C_d == Approx(audit_doubling(b, default_sample(b)).C_d).epsilon(1e-12));
    CHECK_THROWS_AS(audit_doubling(s, RadiusSample{}), InvalidArgument);
}

TEST_CASE("upper mass bound fit") {
    const Space s = unit_interval(1000);
    const RadiusSample interior{{500}, {0.01, 0.02, 0.05, 0.1, 0.2, 0.4}};
    const auto fit = audit_upper_mass_bound(s, interior);
    CHECK(fit.sigma == Approx(1.0).epsilon(1e-9));
    CHECK(fit.C0 == Approx(1.0).epsilon(1e-9));
    CHECK(mass_bound_violation(s, default_sample(s), fit.C0, fit.sigma) >= 0.0);

    const Space c = cantor_space(build_cantor_model(3), cantor_min_cells(3));
    // mu(B_r) <= 4r and mu(B_R) >= R on [0,1] with density in [1,2].
    CHECK(mass_bound_violation(c, default_sample(c), 4.0, 1.0) == 0.0);
    const auto cf = audit_upper_mass_bound(c, default_sample(c));
    CHECK(mass_bound_violation(c, default_sample(c), cf.C0, cf.sigma) == Approx(0.0).epsilon(1e-12));

    const Space g = Space::planar_grid(64, 64);
    CHECK(mass_bound_violation(g, default_sample(g, 33), 4.0, 2.0) == 0.0);
}

TEST_CASE("ahlfors audits") {
    const Space s = unit_interval(1000);
    CHECK(audit_ahlfors(s, 1.0, default_sample(s)).C_A <= 2.0 + 1e-12);
    const Space g = Space::planar_grid(64, 64);
    CHECK(audit_ahlfors(g, 2.0, RadiusSample{{g.index(32, 32)}, {0.05, 0.1, 0.2}}).C_A == Approx(std::numbers::pi).epsilon(1e-9));
    CHECK(audit_ahlfors(g, 2.0, default_sample(g, 33)).C_A <= 4.0 + 1e-12);
    const Space c = cantor_space(build_cantor_model(3), cantor_min_cells(3));
    CHECK(audit_ahlfors(c, 1.0, default_sample(c)).C_A <= 4.0 + 1e-12);
}
