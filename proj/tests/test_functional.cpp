#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "bbmlab/cantor.hpp"
#include "bbmlab/functional.hpp"
#include "reference.hpp"

using namespace bbmlab;
using doctest::Approx;

namespace {

Space unit_interval(std::size_t n) { return Space::weighted_interval({0.0, 1.0}, {1.0}, n); }

struct Case {
    std::string label;
    Space space;
    FunctionSpec f;
};

std::vector<Case> small_cases() {
    std::vector<Case> out;
    out.push_back({"uniform", unit_interval(150), Sine{1.0, 1.5, 0.4}});
    out.push_back({"weighted", Space::weighted_interval({0.0, 0.3333, 0.7, 1.0}, {1.0, 3.0, 0.5}, 140),
                   PiecewiseLinear{{0.2, 0.4, 0.5, 0.8}, {0.0, 1.0, 1.0, -0.5}}});
    out.push_back({"cantor", cantor_space(build_cantor_model(2), cantor_min_cells(2)), CantorPrimitive{2}});
    out.push_back({"planar", Space::planar_grid(12, 12), Affine{0.2, 1.0, -0.5}});
    out.push_back({"planar-sine", Space::planar_grid(12, 11), Sine{1.0, 1.0, 0.0}});
    return out;
}

std::vector<MollifierSpec> kernels(int dim) {
    std::vector<MollifierSpec> out = {flat_window(0.2), window_power(0.25, 2.0), window_power(0.3, 0.5),
                                      fractional(0.6, 1.0), fractional(0.8, 2.0), euclidean_radial(4.0, dim),
                                      custom_kernel({0.1, 0.25}, {3.0, 1.0}, dim)};
    return out;
}

}  // namespace

TEST_CASE("channel sums match the naive reference") {
    const std::vector<Channel> chs = {{1.0, 1.0}, {2.0, 1.0}, {4.0, 2.0}, {0.0, 1.0}, {2.5, 1.0}, {3.0, 3.0}};
    const std::vector<Domain> domains = {Domain{}, Domain{Region::square(0.2, 0.8), Region::whole()},
                                         Domain{Region::square(0.1, 0.9), Region::square(0.05, 0.95)}};
    for (const Case& c : small_cases()) {
        const SampledFunction f = sample_function(c.space, c.f);
        for (const MollifierSpec& k : kernels(c.space.dim()))
            for (const Domain& dom : domains) {
                const ChannelSums expect = reference::channels(c.space, f, k, chs, dom);
                for (unsigned workers : {1u, 3u}) {
                    const ChannelSums got = evaluate_channels(c.space, f, k, chs, {workers, dom});
                    CAPTURE(c.label);
                    CAPTURE(to_string(k.family));
                    CAPTURE(workers);
                    REQUIRE(got.channels.size() == chs.size());
                    CHECK(got.rows == expect.rows);
                    CHECK(got.outer_mass == Approx(expect.outer_mass).epsilon(1e-14));
                    for (std::size_t i = 0; i < chs.size(); ++i) {
                        CAPTURE(i);
                        CHECK(reference::rel_err(got.channels[i].outer_sum, expect.channels[i].outer_sum) <= 1e-12);
                        CHECK(reference::rel_err(got.channels[i].row_max, expect.channels[i].row_max) <= 1e-12);
                    }
                }
            }
    }
}

TEST_CASE("evaluation is identical across worker counts") {
    const Space s = unit_interval(3000);
    const SampledFunction f = sample_function(s, Sine{1.0, 2.0, 0.1});
    const auto base = evaluate_channels(s, f, flat_window(0.01), bound_channels(1.0, 0.5, 2.0));
    for (unsigned w : {2u, 4u, 8u}) {
        const auto other = evaluate_channels(s, f, flat_window(0.01), bound_channels(1.0, 0.5, 2.0), {w, {}});
        for (std::size_t i = 0; i < base.channels.size(); ++i) {
            CHECK(other.channels[i].outer_sum == base.channels[i].outer_sum);
            CHECK(other.channels[i].row_max == base.channels[i].row_max);
        }
        CHECK(other.pairs == base.pairs);
    }
}

TEST_CASE("nonconvex functional matches the naive reference") {
    const std::vector<PhiSpec> phis = {step_phi(), step_phi(0.5), clamped_power_phi(3.0)};
    for (const Case& c : small_cases())
        for (const PhiSpec& phi : phis)
            for (LambdaAnchor anchor : {LambdaAnchor::YBall, LambdaAnchor::XBall, LambdaAnchor::AhlforsPower})
                for (double delta : {0.01, 0.05}) {
                    const SampledFunction f = sample_function(c.space, c.f);
                    LambdaParams lp;
                    lp.p = 1.0 + (anchor == LambdaAnchor::XBall ? 0.5 : 0.0);
                    lp.delta = delta;
                    lp.phi = phi;
                    lp.anchor = anchor;
                    lp.Q = static_cast<double>(c.space.dim());
                    const Domain dom{Region::square(0.1, 0.9), Region::whole()};
                    CAPTURE(c.label);
                    CAPTURE(to_string(anchor));
                    CHECK(reference::rel_err(eval_Lambda(c.space, f, lp, {2, dom}).value,
                                             reference::lambda(c.space, f, lp, dom)) <= 1e-12);
                }
}

TEST_CASE("functional wrappers") {
    const Space s = unit_interval(150);
    const SampledFunction f = sample_function(s, Sine{1.0, 1.0, 0.3});
    const MollifierSpec k = window_power(0.2, 1.0);
    const auto ref = reference::channels(s, f, k, {{2.0, 1.0}, {2.5, 1.0}, {4.0, 2.0}});
    CHECK(reference::rel_err(eval_I(s, f, 2.0, k).value, ref.channels[0].outer_sum) <= 1e-12);
    CHECK(reference::rel_err(eval_Psi(s, f, 2.0, 0.5, k).value, std::pow(ref.channels[1].outer_sum, 2.0 / 2.5)) <= 1e-12);
    CHECK(reference::rel_err(eval_Phi(s, f, 2.0, 2.0, k).value, ref.channels[2].outer_sum) <= 1e-12);
    CHECK(eval_Psi(s, f, 2.0, 0.0, k).value == Approx(eval_I(s, f, 2.0, k).value).epsilon(1e-14));
    CHECK(eval_I(s, f, 1.0, k).which == FunctionalKind::I);
    CHECK(eval_I(s, f, 1.0, k).diag_excluded == s.size());

    CHECK(functional_channel(FunctionalKind::Phi, 2.0, 0.0, 3.0).exponent == 6.0);
    CHECK(functional_channel(FunctionalKind::Phi, 2.0, 0.0, 3.0).root == 3.0);
    CHECK(functional_channel(FunctionalKind::Psi, 2.0, 0.5, 3.0).exponent == 2.5);
    CHECK_THROWS_AS(functional_channel(FunctionalKind::Lambda, 1.0, 0.0, 1.0), InvalidArgument);
    CHECK(functional_from_sum(FunctionalKind::Psi, 2.0, 2.0, 16.0) == Approx(4.0).epsilon(1e-15));
    CHECK(functional_from_sum(FunctionalKind::I, 2.0, 2.0, 16.0) == 16.0);

    CHECK_THROWS_AS(eval_I(s, f, 0.5, k), InvalidArgument);
    CHECK_THROWS_AS(eval_Psi(s, f, 1.0, -0.1, k), InvalidArgument);
    CHECK_THROWS_AS(eval_Phi(s, f, 1.0, 0.5, k), InvalidArgument);
    CHECK_THROWS_AS(evaluate_channels(s, f, k, {}), InvalidArgument);
    CHECK_THROWS_AS(evaluate_channels(s, f, k, {{-1.0, 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(evaluate_channels(s, f, euclidean_radial(4.0, 2), {{1.0, 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(evaluate_channels(unit_interval(100), f, k, {{1.0, 1.0}}), InvalidArgument);
    LambdaParams lp;
    lp.delta = 0.0;
    CHECK_THROWS_AS(eval_Lambda(s, f, lp), InvalidArgument);
    CHECK(parse_anchor(to_string(LambdaAnchor::XBall)) == LambdaAnchor::XBall);
    CHECK_THROWS_AS(parse_anchor("z-ball"), InvalidArgument);
}

TEST_CASE("circle moments") {
    // Composite Simpson over a quarter period.
    const auto simpson = [](double e) {
        const int n = 20000;
        const double h = 0.5 * std::numbers::pi / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * std::pow(std::cos(i * h), e);
        }
        return s * h / 3.0 / (0.5 * std::numbers::pi);
    };
    for (double e : {0.0, 1.0, 2.0, 2.5, 3.0, 4.0, 6.0}) CHECK(circle_moment(e) == Approx(simpson(e)).epsilon(1e-9));
    CHECK(circle_moment(1.0) == Approx(2.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(circle_moment(2.0) == Approx(0.5).epsilon(1e-15));
    for (double e : {0.5, 1.5, 3.5}) CHECK(circle_moment(e) == Approx(reference::circle_mean(e)).epsilon(1e-13));
}

TEST_CASE("invariants of the kernel functionals") {
    const Space s = unit_interval(400);
    const SampledFunction f = sample_function(s, Sine{1.0, 1.0, 0.3});
    SampledFunction g = f;
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.values[k] = -3.0 * f.values[k] + 5.0;
        g.grad_x[k] = -3.0 * f.grad_x[k];
    }
    const MollifierSpec k = flat_window(0.05);
    for (double p : {1.0, 2.0, 3.0}) {
        CHECK(eval_I(s, g, p, k).value == Approx(std::pow(3.0, p) * eval_I(s, f, p, k).value).epsilon(1e-12));
        CHECK(eval_Phi(s, g, p, 2.0, k).value == Approx(std::pow(3.0, p) * eval_Phi(s, f, p, 2.0, k).value).epsilon(1e-12));
    }
    CHECK(eval_I(s, sample_function(s, Affine{2.0, 0.0, 0.0}), 2.0, k).value == 0.0);

    // f = x with the flat window gives I_1 = mu(outer) up to rounding.
    const SampledFunction id = sample_function(s, Affine{});
    const Domain inner{Region::interval(0.1, 0.9), Region::whole()};
    CHECK(eval_I(s, id, 1.0, k, {1, inner}).value == Approx(0.8).epsilon(1e-12));
    // Planar affine f: the radial kernel gives |grad f|^p times the circle moment.
    const Space g2 = Space::planar_grid(60, 60);
    const SampledFunction plane = sample_function(g2, Affine{0.0, 0.6, 0.8});
    const Domain mid{Region::square(0.3, 0.7), Region::whole()};
    const double I2 = eval_I(g2, plane, 2.0, euclidean_radial(10.0, 2), {1, mid}).value;
    CHECK(I2 == Approx(2.0 * std::numbers::pi * 0.5 * 0.16).epsilon(1e-9));
}

TEST_CASE("holder and interpolation bounds") {
    for (const Case& c : small_cases()) {
        const SampledFunction f = sample_function(c.space, c.f);
        for (double eps : {0.25, 0.5})
            for (const MollifierSpec& k : kernels(c.space.dim())) {
                const BoundBundle b = eval_bounds(c.space, f, 1.0, eps, 2.0, k);
                CAPTURE(c.label);
                CAPTURE(to_string(k.family));
                CHECK(b.holder.margin() >= -1e-12 * std::abs(b.holder.rhs));
                CHECK(b.interpolation.margin() >= -1e-12 * std::abs(b.interpolation.rhs));
                CHECK(b.C_rho > 0.0);
            }
    }
    const Space s = unit_interval(100);
    const SampledFunction f = sample_function(s, Affine{});
    CHECK_THROWS_AS(eval_bounds(s, f, 1.0, 1.0, 2.0, flat_window(0.1)), InvalidArgument);
    ChannelSums few;
    few.channels.resize(3);
    CHECK_THROWS_AS(assemble_bounds(1.0, 0.5, 2.0, few), InvalidArgument);
}
