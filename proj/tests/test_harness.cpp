#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bbmlab/cantor.hpp"
#include "bbmlab/harness.hpp"

using namespace bbmlab;
using doctest::Approx;

namespace {

ScenarioConfig small_sweep() {
    ScenarioConfig c;
    c.name = "small";
    c.functional = FunctionalKind::I;
    c.p = 1.0;
    c.space.cells = 2000;
    c.function = Affine{};
    c.family = MollifierFamily::FlatWindow;
    c.axis = SweepAxis::Radius;
    c.ladder = {0.1, 0.05, 0.04, 0.03};
    c.domain.outer = Region::interval(0.2, 0.8);
    c.has_oracle = true;
    c.oracle = 1.0;
    return c;
}

ConvergenceSeries synthetic(const std::string& name, std::vector<double> ratios) {
    ConvergenceSeries s;
    s.config.name = name;
    for (double r : ratios) {
        SeriesPoint p;
        p.ratio = r;
        s.points.push_back(p);
    }
    s.plateau = estimate_limit(s);
    return s;
}

}  // namespace

TEST_CASE("plateau estimates") {
    const PlateauEstimate flat = estimate_limit({3.0, 2.0, 1.001, 1.0, 1.0005}, 0.01);
    CHECK(flat.status == SeriesStatus::Converged);
    CHECK(flat.value == 1.0005);
    CHECK(flat.half_width == Approx(0.0005).epsilon(1e-9));

    const PlateauEstimate grow = estimate_limit({1.0, 1.1, 1.3, 1.7}, 0.01);
    CHECK(grow.status == SeriesStatus::Diverging);
    const PlateauEstimate down = estimate_limit({1.0, 0.9, 0.7, 0.3}, 0.01);
    CHECK(down.status == SeriesStatus::Diverging);
    // Shrinking increments of one sign: still moving, but not diverging.
    const PlateauEstimate slow = estimate_limit({1.0, 1.4, 1.6, 1.7}, 0.01);
    CHECK(slow.status == SeriesStatus::NonPlateau);
    const PlateauEstimate wobble = estimate_limit({1.0, 1.2, 0.9, 1.1}, 0.01);
    CHECK(wobble.status == SeriesStatus::NonPlateau);
    CHECK(wobble.half_width == Approx(0.15).epsilon(1e-12));
    CHECK(estimate_limit({1.0, 1.0, NAN, 1.0}, 0.01).status == SeriesStatus::NonPlateau);
    CHECK_THROWS_AS(estimate_limit({1.0, 1.0, 1.0}, 0.01), InvalidArgument);
    CHECK(to_string(SeriesStatus::NonPlateau) == "non-plateau");
}

TEST_CASE("checks and exit status") {
    const BoundCheck ok = make_check("a", 1.0, 1.0 - 1e-12, 1e-9);
    CHECK(ok.pass);
    CHECK(ok.margin() == Approx(-1e-12).epsilon(1e-3));
    const BoundCheck bad = make_check("b", 1.0, 0.9, 1e-9);
    CHECK_FALSE(bad.pass);
    CHECK(proved_checks_pass({ok}));
    CHECK_FALSE(proved_checks_pass({ok, bad}));
    BoundCheck expectation = bad;
    expectation.proved = false;
    CHECK(proved_checks_pass({ok, expectation}));
}

TEST_CASE("resolution refusal") {
    ScenarioConfig c;
    CHECK_NOTHROW(check_resolution(c, 0.016, 0.002));
    try {
        check_resolution(c, 0.01, 0.002);
        FAIL("coarse kernel accepted");
    } catch (const ResolutionError& e) {
        CHECK(e.required_cells() == 800);
    }
    ScenarioConfig s = small_sweep();
    s.ladder = {0.1, 0.05, 0.01, 0.001};
    CHECK_THROWS_AS(run_sweep(s), ResolutionError);
}

TEST_CASE("kernels along the sweep") {
    ScenarioConfig c;
    c.family = MollifierFamily::EuclideanRadial;
    c.axis = SweepAxis::Index;
    CHECK(kernel_at(c, 40.0, 2).support() == Approx(0.025).epsilon(1e-15));
    CHECK(kernel_at(c, 40.0, 2).dim == 2);
    c.family = MollifierFamily::WindowPower;
    c.kernel_power = 3.0;
    c.axis = SweepAxis::Radius;
    CHECK(kernel_at(c, 0.02, 1).r == 0.02);
    CHECK(kernel_at(c, 0.02, 1).q == 3.0);
    c.family = MollifierFamily::Fractional;
    c.axis = SweepAxis::Smoothness;
    c.p = 2.0;
    CHECK(kernel_at(c, 0.9, 1).s == 0.9);
    CHECK(kernel_at(c, 0.9, 1).p == 2.0);
}

TEST_CASE("small sweep") {
    const ScenarioConfig c = small_sweep();
    const ConvergenceSeries s = run_sweep(c);
    REQUIRE(s.points.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(s.points[k].param == c.ladder[k]);
        CHECK(s.points[k].energy.value == Approx(0.6).epsilon(1e-12));
        CHECK(s.points[k].ratio == Approx(1.0).epsilon(1e-9));
        CHECK(s.points[k].grid == 2000);
        REQUIRE(s.points[k].bounds.has_value());
    }
    CHECK(s.plateau.status == SeriesStatus::Converged);
    CHECK(s.band_lo <= s.band_hi);
    const auto checks = check_bounds(s);
    CHECK(proved_checks_pass(checks));
    CHECK(checks.size() == 2 * 4 + 2);
    CHECK(checks.front().name == "holder@r=0.1");
    CHECK(checks.back().name == "oracle-limit");
    CHECK_FALSE(checks.back().proved);
    for (const auto& ch : checks) CHECK(ch.pass);

    // Same CSV from every worker count and on a rerun.
    const std::string csv = csv_text(s);
    CHECK(csv.rfind("scenario,axis,param,functional,energy,ratio,pairs,seed_grid\n", 0) == 0);
    CHECK(csv_text(run_sweep(c, 2)) == csv);
    CHECK(csv_text(run_sweep(c, 8)) == csv);
    CHECK(csv_text(run_sweep(c, 1)) == csv);

    const std::string summary = summary_text(s, checks);
    CHECK(summary.find("scenario: small") != std::string::npos);
    CHECK(summary.find("converged") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "bbmlab-harness-test";
    std::filesystem::remove_all(dir);
    emit_report(s, checks, dir.string());
    for (const char* ext : {".csv", ".summary.txt", ".gp"}) CHECK(std::filesystem::exists(dir / (std::string("small") + ext)));
    std::ifstream in(dir / "small.csv");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == csv);
    std::filesystem::remove_all(dir);
}

TEST_CASE("ratio floor and grid axis") {
    ScenarioConfig c = small_sweep();
    c.axis = SweepAxis::Grid;
    c.radius = 0.05;
    c.ladder = {500, 1000, 2000, 4000};
    c.has_floor = true;
    c.ratio_floor = 0.99;
    const ConvergenceSeries s = run_sweep(c);
    for (std::size_t k = 0; k < 4; ++k) CHECK(s.points[k].grid == static_cast<std::size_t>(c.ladder[k]));
    const auto checks = check_bounds(s);
    CHECK(checks.back().name == "ratio-floor");
    CHECK(checks.back().pass);
    CHECK(checks.back().proved);
    c.ratio_floor = 1.5;
    CHECK_FALSE(check_bounds(run_sweep(c)).back().pass);

    ScenarioConfig bad = small_sweep();
    bad.ladder = {0.1, 0.1, 0.05, 0.04};
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
    bad = small_sweep();
    bad.axis = SweepAxis::Delta;
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
    bad = small_sweep();
    bad.energy_source = EnergySource::Approximant;
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
}

TEST_CASE("comparing plateau constants") {
    const ConvergenceSeries high = synthetic("high", {3.9, 4.0, 4.001, 4.0});
    const ConvergenceSeries low = synthetic("low", {1.5, 1.42, 1.414, 1.4142});
    const ConstantComparison cmp = compare_constants(high, low);
    CHECK(cmp.separation.name == "distinct-constants");
    CHECK(cmp.separation.pass);
    CHECK(cmp.conclusion.rfind("incompatible", 0) == 0);
    CHECK(cmp.separation.lhs == Approx(1.4142 + 0.5 * (1.42 - 1.414)).epsilon(1e-12));

    const ConvergenceSeries close = synthetic("close", {4.5, 4.2, 3.9, 4.15});
    CHECK_FALSE(compare_constants(close, high).separation.pass);
    const ConvergenceSeries moving = synthetic("moving", {1.0, 2.0, 3.0, 4.0});
    const ConstantComparison open = compare_constants(high, moving);
    CHECK_FALSE(open.separation.pass);
    CHECK(open.conclusion.rfind("inconclusive", 0) == 0);
}

TEST_CASE("config parsing") {
    const ScenarioConfig c = parse_config(R"(
[scenario]
name = demo
functional = Phi
p = 1
q = 3
axis = r
ladder = 0.08, 0.04 0.02,0.01
energy = 2.5

[space]
kind = interval
cells = 5000
breakpoints = 0, 0.5, 1
weights = 2, 1

[function]
kind = sine
amplitude = 2
frequency = 3

[mollifier]
family = window-power
power = 2

[domain]
outer = 0.1 0.9

[tolerance]
plateau = 0.005
oracle = 0.7
min_cells_per_radius = 12
)");
    CHECK(c.name == "demo");
    CHECK(c.functional == FunctionalKind::Phi);
    CHECK(c.q == 3.0);
    CHECK(c.axis == SweepAxis::Radius);
    CHECK(c.ladder == std::vector<double>{0.08, 0.04, 0.02, 0.01});
    CHECK(c.energy_source == EnergySource::Fixed);
    CHECK(c.fixed_energy == 2.5);
    CHECK(c.space.cells == 5000);
    CHECK(c.space.weights == std::vector<double>{2.0, 1.0});
    REQUIRE(std::holds_alternative<Sine>(c.function));
    CHECK(std::get<Sine>(c.function).frequency == 3.0);
    CHECK(c.family == MollifierFamily::WindowPower);
    CHECK(c.kernel_power == 2.0);
    CHECK(c.domain.outer.x0 == 0.1);
    CHECK(c.domain.outer.x1 == 0.9);
    CHECK(c.has_oracle);
    CHECK_FALSE(c.has_floor);
    CHECK(c.plateau_tol == 0.005);
    CHECK(c.min_cells_per_radius == 12.0);

    const ScenarioConfig cantor = parse_config("[scenario]\nladder = 1 2\nenergy = approximant\n[space]\nkind = cantor\ndepth = 4\n");
    CHECK(cantor.space.cells == cantor_min_cells(4));
    CHECK(cantor.energy_source == EnergySource::Approximant);

    const ScenarioConfig lam = parse_config(
        "[scenario]\nfunctional = Lambda\naxis = delta\nladder = 0.01\n[lambda]\nphi = clamped-power\nkappa = 3\nanchor = "
        "ahlfors-power\nQ = 1\n");
    CHECK(lam.phi.kind == PhiKind::ClampedPower);
    CHECK(lam.anchor == LambdaAnchor::AhlforsPower);

    ScenarioConfig g = c;
    override_grid(g, 123);
    CHECK(g.space.cells == 123);
    CHECK_THROWS_AS(override_grid(g, 0), ConfigError);
}

TEST_CASE("config errors") {
    const char* bad[] = {
        "[scenario]\nladder = 1\n[extra]\nx = 1\n",
        "[scenario]\nladder = 1\nnmae = typo\n",
        "[scenario]\nladder = 1\np = two\n",
        "[scenario]\nladder = 1\np = 1.5x\n",
        "[scenario]\nladder = 1\nfunctional = J\n",
        "[scenario]\nladder = 1\naxis = t\n",
        "[scenario]\nname = x\n",
        "[scenario]\nladder = 1\n[tolerance]\nbound_eps = 2\n",
        "[scenario]\nladder = 1\n[space]\nkind = torus\n",
        "[scenario]\nladder = 1\n[space]\ncells = 10.5\n",
        "[scenario]\nladder = 1\n[space]\nkind = cantor\ndepth = 40\n",
        "[scenario]\nladder = 1\n[function]\nkind = gaussian\n",
        "[scenario]\nladder = 1\n[mollifier]\nfamily = gaussian\n",
        "[scenario]\nladder = 1\n[lambda]\nphi = table\nknots = 1 0.5\nvalues = 0 1\n",
        "[scenario]\nladder = 1\n[domain]\nouter = 0.1 0.2 0.3\n",
        "[scenario]\nladder = 1\neps_from_radius = maybe\n",
        "[scenario\nladder = 1\n",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/bbmlab.ini"), ConfigError);
}

TEST_CASE("presets") {
    const auto names = preset_names();
    CHECK(names.size() == 11);
    for (const auto& n : names) {
        const ScenarioConfig c = preset(n);
        CHECK(c.name == n);
        CHECK(c.ladder.size() >= 4);
    }
    const ScenarioConfig smooth = preset("bbm-1d-smooth");
    CHECK(smooth.has_oracle);
    CHECK(smooth.oracle == Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(preset("radial-2d").oracle == Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(preset("cantor-gap").has_floor);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}
