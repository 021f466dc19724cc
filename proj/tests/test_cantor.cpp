#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bbmlab/cantor.hpp"

using namespace bbmlab;
using doctest::Approx;

namespace {

// Components of A_m in floating point, built independently of the model.
std::vector<std::pair<double, double>> float_components(int m) {
    std::vector<std::pair<double, double>> cur{{0.0, 1.0}};
    for (int i = 1; i <= m; ++i) {
        const double gap = std::ldexp(1.0, -2 * i);
        std::vector<std::pair<double, double>> next;
        for (auto [a, b] : cur) {
            const double mid = 0.5 * (a + b);
            next.push_back({a, mid - 0.5 * gap});
            next.push_back({mid + 0.5 * gap, b});
        }
        cur = std::move(next);
    }
    return cur;
}

double float_truncated(const std::vector<std::pair<double, double>>& comps, double x) {
    double acc = 0.0;
    for (auto [a, b] : comps) acc += 2.0 * std::max(0.0, std::min(b, x) - a);
    return acc;
}

}  // namespace

TEST_CASE("dyadic arithmetic") {
    const Dyadic half(1, 1), quarter = Dyadic::pow2(-2);
    CHECK(half + quarter == Dyadic(3, 2));
    CHECK((half - quarter).to_double() == 0.25);
    CHECK(half * quarter == Dyadic::pow2(-3));
    CHECK(Dyadic(12, 3) == Dyadic(3, 1));
    CHECK(Dyadic(12, 3).numerator() == 3);
    CHECK(Dyadic(0, 17) == Dyadic());
    CHECK(half > quarter);
    CHECK(-half < Dyadic());
    CHECK(abs(-half) == half);
    CHECK(half.scaled(3) == Dyadic::integer(4));
    CHECK(Dyadic::pow2(-60).to_double() == std::ldexp(1.0, -60));
    CHECK(Dyadic(3, 2).str() == "3*2^-2");
    CHECK_THROWS_AS(Dyadic::integer(1) + Dyadic::pow2(-80), std::overflow_error);
    const Dyadic big((std::int64_t{1} << 40) + 1, 0);
    CHECK_THROWS_AS(big * big, std::overflow_error);
}

TEST_CASE("construction lengths") {
    for (int m = 1; m <= 12; ++m) {
        const CantorModel model = build_cantor_model(m);
        REQUIRE(model.levels.size() == static_cast<std::size_t>(m + 1));
        CHECK(model.components().size() == (std::size_t{1} << m));
        // L_m = 1 - sum_i 2^{i-1} 2^{-2i} = 1/2 + 2^{-m-1}.
        CHECK(model.L.back() == Dyadic(1, 1) + Dyadic::pow2(-m - 1));
        for (int i = 1; i <= m; ++i)
            for (const DyadicInterval& gap : model.removed[i - 1]) CHECK(gap.length() == Dyadic::pow2(-2 * i));
        const auto comps = float_components(m);
        for (std::size_t k = 0; k < comps.size(); ++k) {
            CHECK(model.components()[k].lo.to_double() == comps[k].first);
            CHECK(model.components()[k].hi.to_double() == comps[k].second);
        }
    }
    CHECK_THROWS_AS(build_cantor_model(0), InvalidArgument);
    CHECK_THROWS_AS(build_cantor_model(kMaxCantorDepth + 1), InvalidArgument);
}

TEST_CASE("cantor space") {
    const CantorModel model = build_cantor_model(3);
    CHECK(cantor_min_cells(3) == 512);
    const Space s = cantor_space(model, cantor_min_cells(3));
    CHECK(s.total_mass() == Approx(1.0 + model.L.back().to_double()).epsilon(1e-14));
    for (std::size_t k = 0; k < s.size(); ++k) CHECK((s.density(k) == 1.0 || s.density(k) == 2.0));
    try {
        cantor_space(model, 511);
        FAIL("coarse grid accepted");
    } catch (const ResolutionError& e) {
        CHECK(e.required_cells() == 512);
    }
}

TEST_CASE("primitives and approximants") {
    for (int m : {1, 2, 4, 6}) {
        const CantorModel model = build_cantor_model(m);
        const CantorFunction fn(model);
        CHECK(fn.truncated(Dyadic::integer(1)) == model.L.back().scaled(1));
        CHECK(fn.limit(Dyadic::integer(1)) == Dyadic::integer(1));
        CHECK(fn.limit(Dyadic()) == Dyadic());
        const auto comps = float_components(m);
        for (int k = 0; k <= 256; ++k) {
            const Dyadic x(k, 8);
            CHECK(fn.truncated(x).to_double() == Approx(float_truncated(comps, x.to_double())).epsilon(1e-15));
        }
        for (int i = 1; i <= m; ++i) {
            CHECK(fn.approximant_mass(i) == Dyadic::integer(1));
            CHECK(fn.approximant(i, Dyadic()) == Dyadic());
        }
        // On a first-generation gap the limit sits at the midpoint value.
        const DyadicInterval g = model.removed[0][0];
        CHECK(fn.limit(g.midpoint()) == Dyadic(1, 1));
        CHECK(fn.approximant(1, g.hi) == Dyadic::integer(1));
        CHECK_THROWS_AS(fn.approximant(0, g.hi), InvalidArgument);
        CHECK_THROWS_AS(fn.limit(Dyadic(1, 4)), InvalidArgument);

        const PiecewiseLinear pl = fn.descriptor();
        REQUIRE(pl.knots.size() == pl.values.size());
        for (std::size_t k = 1; k < pl.knots.size(); ++k) {
            CHECK(pl.knots[k] > pl.knots[k - 1]);
            CHECK(pl.values[k] >= pl.values[k - 1]);
        }
        CHECK(pl.values.back() == Approx(2.0 * model.L.back().to_double()).epsilon(1e-15));
    }
}

TEST_CASE("construction audit") {
    for (int m = 1; m <= 8; ++m) {
        const CantorReport rep = audit_cantor(build_cantor_model(m));
        CAPTURE(m);
        for (const CantorCheck& c : rep.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK(c.pass);
        }
        CHECK(rep.all_pass);
        const double Lm = 0.5 + std::ldexp(1.0, -m - 1);
        CHECK(rep.total_mass == Approx(1.0 + Lm).epsilon(1e-15));
        CHECK(rep.f_at_one == Approx(2.0 * Lm).epsilon(1e-15));
        CHECK(rep.envelope_variation == Approx(4.0 * Lm).epsilon(1e-15));
        CHECK(rep.limit_envelope_variation == Approx(2.0 * Lm).epsilon(1e-15));
        CHECK(rep.approximant_infimum == 1.0);
    }
}

TEST_CASE("bump sits in the middle gap") {
    const FunctionSpec b = bump_f0(2.0);
    REQUIRE(std::holds_alternative<Bump>(b));
    CHECK(std::get<Bump>(b).center == 0.5);
    CHECK(std::get<Bump>(b).half_width == 0.125);
    CHECK(std::get<Bump>(b).amplitude == 2.0);
}
