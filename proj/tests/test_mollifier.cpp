#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bbmlab/cantor.hpp"
#include "bbmlab/mollifier.hpp"

using namespace bbmlab;
using doctest::Approx;

namespace {

Space unit_interval(std::size_t n) { return Space::weighted_interval({0.0, 1.0}, {1.0}, n); }

// sum_x mu_x rho(x, y) over x != y.
double row_mass(const MollifierSpec& k, const Space& s, std::size_t y) {
    double m = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x)
        if (x != y) m += s.cell_mass(x) * eval(k, s, x, y);
    return m;
}

}  // namespace

TEST_CASE("family names") {
    for (auto f : {MollifierFamily::Fractional, MollifierFamily::WindowPower, MollifierFamily::FlatWindow,
                   MollifierFamily::EuclideanRadial, MollifierFamily::CustomKernel})
        CHECK(parse_family(to_string(f)) == f);
    CHECK_THROWS_AS(parse_family("gaussian"), InvalidArgument);
}

TEST_CASE("constructors validate parameters") {
    CHECK_THROWS_AS(fractional(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(fractional(1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(fractional(0.5, 0.5), InvalidArgument);
    CHECK_THROWS_AS(window_power(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(window_power(0.1, -1.0), InvalidArgument);
    CHECK_THROWS_AS(flat_window(-0.1), InvalidArgument);
    CHECK_THROWS_AS(euclidean_radial(0.0), InvalidArgument);
    CHECK_THROWS_AS(radial_profile({0.1}, {1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(radial_profile({0.2, 0.1}, {1.0, 1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(radial_profile({0.1}, {10.0}, 3), InvalidArgument);
    CHECK_NOTHROW(custom_kernel({0.1}, {1.0}, 1));
    CHECK_NOTHROW(radial_profile({0.05, 0.1}, {15.0, 5.0}, 1));
    CHECK(fractional(0.5, 2.0).support() == std::numeric_limits<double>::infinity());
    CHECK(flat_window(0.2).support() == 0.2);
}

TEST_CASE("radial profiles") {
    const MollifierSpec k1 = euclidean_radial(20.0);
    CHECK(k1.support() == Approx(0.05).epsilon(1e-15));
    CHECK(k1.profile(0.01) == Approx(20.0).epsilon(1e-14));
    CHECK(k1.profile(0.05) == 0.0);
    // Height n / r^n makes int_0^r rho(t) t^{n-1} dt = 1.
    const MollifierSpec k2 = euclidean_radial(10.0, 2);
    CHECK(k2.profile(0.05) * 0.1 * 0.1 / 2.0 == Approx(1.0).epsilon(1e-14));
    const MollifierSpec st = radial_profile({0.05, 0.1}, {15.0, 5.0}, 1);
    CHECK(st.profile(0.0) == 15.0);
    CHECK(st.profile(0.07) == 5.0);
    CHECK(st.profile(0.2) == 0.0);
    CHECK_FALSE(st.ball_normalized());
    CHECK(flat_window(0.1).ball_normalized());
}

TEST_CASE("kernel values") {
    const Space s = Space::weighted_interval({0.0, 0.5, 1.0}, {1.0, 3.0}, 200);
    const std::size_t y = 90, x = 95;
    const double d = s.distance(x, y);
    CHECK(eval(flat_window(0.1), s, x, y) == Approx(1.0 / s.ball_measure(y, 0.1)).epsilon(1e-15));
    CHECK(eval(flat_window(0.01), s, x, y) == 0.0);
    CHECK(eval(window_power(0.1, 2.0), s, x, y) ==
          Approx(std::pow(d / 0.1, 2.0) / s.ball_measure(y, 0.1)).epsilon(1e-14));
    CHECK(eval(fractional(0.7, 2.0), s, x, y) ==
          Approx(0.3 * std::pow(d, 0.6) / s.ball_measure(y, d)).epsilon(1e-14));
    // Normalization is centred at the second argument.
    CHECK(eval(flat_window(0.1), s, y, 105) != eval(flat_window(0.1), s, 105, y));
    CHECK_THROWS_AS(eval(fractional(0.7, 2.0), s, y, y), InvalidArgument);
}

TEST_CASE("kernel mass of ball-normalized windows") {
    const Space s = unit_interval(2000);
    const double h = 1.0 / 2000;
    // Node sums miss at most the y cell and the partial cells at the rim.
    CHECK(row_mass(flat_window(0.05), s, 1000) == Approx(1.0).epsilon(4.0 * h / 0.1));
    CHECK(row_mass(window_power(0.05, 2.0), s, 1000) == Approx(1.0 / 3.0).epsilon(0.02));
    const MollifierSpec r = euclidean_radial(20.0);
    CHECK(row_mass(r, s, 1000) == Approx(2.0).epsilon(4.0 * h / 0.05));
}

TEST_CASE("minorization constants") {
    const Space s = unit_interval(1000);
    const MinorizeAudit flat = audit_minorize(flat_window(0.05), s, 1.0, 0.05);
    CHECK(flat.C_rho == 1.0);
    CHECK(flat.bounded);
    CHECK(flat.pairs > 0);
    CHECK(audit_minorize(window_power(0.05, 1.0), s, 2.0, 0.05).C_rho == 1.0);
    CHECK_FALSE(audit_minorize(window_power(0.05, 3.0), s, 2.0, 0.05).bounded);
    // A probe larger than the support leaves pairs with a vanishing kernel.
    const MinorizeAudit wide = audit_minorize(flat_window(0.02), s, 1.0, 0.05);
    CHECK_FALSE(wide.bounded);
    CHECK(std::isinf(wide.max_ratio));

    const auto ladder = audit_minorize_ladder(fractional(0.5, 1.0), s, 1.0, {0.01, 0.05, 0.2});
    REQUIRE(ladder.size() == 3);
    for (const auto& [r, a] : ladder) {
        CHECK(a.bounded);
        CHECK(std::isfinite(a.C_rho));
        CHECK(a.C_rho >= 1.0);
    }
    CHECK_THROWS_AS(audit_minorize(flat_window(0.05), s, 0.5, 0.05), InvalidArgument);
}

TEST_CASE("dyadic majorants") {
    const Space s = unit_interval(4000);
    for (double q : {1.0, 2.0, 3.0}) {
        const DyadicMajorant m = dyadic_majorant(window_power(0.05, q), s);
        CHECK(m.violations == 0);
        CHECK(m.checked > 0);
        CHECK(m.sum <= std::pow(2.0, q + 1.0) * m.C_d * (1.0 + 1e-12));
        CHECK(m.sum <= m.declared_bound * (1.0 + 1e-12));
        CHECK(m.worst_excess <= 1e-12);
    }
    const DyadicMajorant flat = dyadic_majorant(flat_window(0.05), s);
    CHECK(flat.violations == 0);
    CHECK(std::isfinite(flat.sum));
    CHECK(flat.sum <= flat.declared_bound * (1.0 + 1e-12));
    CHECK(flat.tail(flat.j_min) == Approx(flat.sum).epsilon(1e-14));
    CHECK(flat.tail(flat.j_max + 1) == 0.0);
    for (int j = flat.j_min; j < flat.j_max; ++j) CHECK(flat.tail(j) >= flat.tail(j + 1));

    const Space c = cantor_space(build_cantor_model(4), cantor_min_cells(4));
    CHECK(dyadic_majorant(window_power(0.02, 2.0), c).violations == 0);
    CHECK(dyadic_majorant(flat_window(0.02), c).violations == 0);
    CHECK_THROWS_AS(dyadic_majorant(fractional(0.5, 1.0), s), InvalidArgument);
    CHECK_THROWS_AS(dyadic_majorant(euclidean_radial(10.0), s), InvalidArgument);
}
