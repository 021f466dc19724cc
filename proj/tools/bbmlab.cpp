// Command-line driver for the scenario harness.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bbmlab/cantor.hpp"
#include "bbmlab/config.hpp"
#include "bbmlab/errors.hpp"
#include "bbmlab/harness.hpp"
#include "bbmlab/mollifier.hpp"
#include "bbmlab/phi.hpp"

using namespace bbmlab;

namespace {

constexpr int kOk = 0, kConfigError = 1, kBoundFailure = 2, kResolution = 3;

struct Options {
    std::string config;
    std::string preset;
    std::string out = "bbmlab-out";
    unsigned workers = 1;
    std::size_t grid = 0;
    double param = std::nan("");
};

ScenarioConfig scenario(const Options& o, const std::string& fallback = "") {
    ScenarioConfig c;
    if (!o.config.empty())
        c = load_config(o.config);
    else if (!o.preset.empty())
        c = preset(o.preset);
    else if (!fallback.empty())
        c = preset(fallback);
    else
        throw ConfigError("pass --config <path> or --preset <name> (presets: run `bbmlab report --help`)");
    if (o.grid > 0) override_grid(c, o.grid);
    return c;
}

Space space_of(const ScenarioConfig& c) {
    switch (c.space.shape) {
        case SpaceShape::Interval:
            if (c.space.breakpoints.empty()) return Space::weighted_interval({0.0, 1.0}, {1.0}, c.space.cells);
            return Space::weighted_interval(c.space.breakpoints, c.space.weights, c.space.cells);
        case SpaceShape::Planar: return Space::planar_grid(c.space.cells, c.space.cells);
        case SpaceShape::Cantor: return cantor_space(build_cantor_model(c.space.depth), c.space.cells);
    }
    throw ConfigError("unknown space shape");
}

std::string g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

bool all_pass(const std::vector<BoundCheck>& checks) { return proved_checks_pass(checks); }

int audit_space(const Options& o) {
    const ScenarioConfig c = scenario(o);
    const Space space = space_of(c);
    const RadiusSample sample = default_sample(space);
    const auto doubling = audit_doubling(space, sample);
    const auto fit = audit_upper_mass_bound(space, sample);
    const auto ahlfors = audit_ahlfors(space, space.dim(), sample);
    std::cout << "nodes: " << space.size() << "\ntotal mass: " << g(space.total_mass())
              << "\nmax spacing: " << g(space.max_spacing()) << "\ndoubling constant: " << g(doubling.C_d)
              << " (center " << doubling.worst_center << ", radius " << g(doubling.worst_radius) << ")"
              << "\nmass bound: C0 " << g(fit.C0) << ", sigma " << g(fit.sigma)
              << "\nahlfors constant at Q=" << space.dim() << ": " << g(ahlfors.C_A) << '\n';
    if (c.space.shape == SpaceShape::Cantor) {
        const CantorReport rep = audit_cantor(build_cantor_model(c.space.depth));
        for (const auto& ck : rep.checks)
            std::cout << (ck.pass ? "PASS " : "FAIL ") << ck.name << (ck.detail.empty() ? "" : "  " + ck.detail) << '\n';
        if (!rep.all_pass) return kBoundFailure;
    }
    return kOk;
}

int audit_mollifier(const Options& o) {
    const ScenarioConfig c = scenario(o);
    if (c.functional == FunctionalKind::Lambda) throw ConfigError("the scenario has no kernel");
    const Space space = space_of(c);
    const double param = std::isnan(o.param) ? c.ladder.back() : o.param;
    const MollifierSpec kernel = kernel_at(c, param, space.dim());
    const double probe = std::isfinite(kernel.support()) ? kernel.support() : 0.1;
    const MinorizeAudit minor = audit_minorize(kernel, space, c.p, probe);
    std::cout << "family: " << to_string(kernel.family) << "\nsupport: " << g(kernel.support())
              << "\nminorize constant: " << g(minor.C_rho) << (minor.bounded ? "" : " (unbounded near the diagonal)")
              << " over " << minor.pairs << " pairs\n";
    if (kernel.family == MollifierFamily::WindowPower || kernel.family == MollifierFamily::FlatWindow) {
        const DyadicMajorant maj = dyadic_majorant(kernel, space);
        std::cout << "dyadic majorant: j in [" << maj.j_min << ", " << maj.j_max << "], sum " << g(maj.sum)
                  << ", declared bound " << g(maj.declared_bound) << "\n  audited C_d " << g(maj.C_d) << ", C0 "
                  << g(maj.C0) << ", sigma " << g(maj.sigma) << "\n  domination: " << maj.violations
                  << " violations over " << maj.checked << " pairs\n";
        if (maj.violations > 0 || maj.sum > maj.declared_bound * (1.0 + 1e-12)) return kBoundFailure;
    }
    return kOk;
}

int audit_phi_cmd(const Options& o) {
    const ScenarioConfig c = scenario(o, "lambda-1d");
    const PhiAudit a = audit_phi(c.phi, c.p);
    std::cout << "profile: " << to_string(c.phi.kind) << "\nmonotone: " << (a.monotone ? "yes" : "no")
              << "\nbound: " << g(a.b) << "\ntail integral: " << g(a.integral) << "\nconstant: " << g(a.C_phi)
              << "\nfeasible: " << (a.feasible ? "yes" : "no") << '\n';
    if (!a.note.empty()) std::cout << "note: " << a.note << '\n';
    return a.feasible ? kOk : kBoundFailure;
}

int eval_cmd(const Options& o) {
    ScenarioConfig c = scenario(o);
    c.ladder = {std::isnan(o.param) ? c.ladder.back() : o.param};
    const ConvergenceSeries s = run_sweep(c, o.workers);
    const SeriesPoint& pt = s.points.front();
    std::cout << to_string(c.functional) << " at " << to_string(c.axis) << "=" << g(pt.param) << ": " << g(pt.value.value)
              << "\nenergy: " << g(pt.energy.value) << "\nratio: " << g(pt.ratio) << "\npairs: " << pt.value.pair_count
              << '\n';
    int code = kOk;
    if (pt.bounds) {
        const auto& b = *pt.bounds;
        const BoundCheck h = make_check("holder", b.holder.lhs, b.holder.rhs, c.bound_tol);
        const BoundCheck i = make_check("interpolation", b.interpolation.lhs, b.interpolation.rhs, c.bound_tol);
        for (const auto& ck : {h, i})
            std::cout << (ck.pass ? "PASS " : "FAIL ") << ck.name << "  " << g(ck.lhs) << " <= " << g(ck.rhs) << '\n';
        if (!h.pass || !i.pass) code = kBoundFailure;
    }
    return code;
}

int run_and_emit(const ScenarioConfig& c, const Options& o, std::ostream& log) {
    const ConvergenceSeries s = run_sweep(c, o.workers);
    const auto checks = check_bounds(s);
    emit_report(s, checks, o.out);
    log << c.name << ": plateau " << g(s.plateau.value) << " +- " << g(s.plateau.half_width) << " ("
        << to_string(s.plateau.status) << "), " << (all_pass(checks) ? "proved bounds hold" : "BOUND FAILURE") << '\n';
    return all_pass(checks) ? kOk : kBoundFailure;
}

int sweep_cmd(const Options& o) { return run_and_emit(scenario(o), o, std::cout); }

int cantor_demo(const Options& o) {
    ScenarioConfig gap = preset("cantor-gap"), bump = preset("bump-f0");
    if (o.grid > 0) {
        override_grid(gap, o.grid);
        override_grid(bump, o.grid);
    }
    const CantorReport rep = audit_cantor(build_cantor_model(gap.space.depth));
    std::ostringstream text;
    text << "construction, depth " << rep.depth << ":\n";
    for (const auto& ck : rep.checks) text << "  " << (ck.pass ? "PASS " : "FAIL ") << ck.name << '\n';
    text << "  total mass " << g(rep.total_mass) << ", f(1) " << g(rep.f_at_one) << ", envelope variation "
         << g(rep.envelope_variation) << " (depth limit " << g(rep.limit_envelope_variation) << "), approximant infimum "
         << g(rep.approximant_infimum) << '\n';

    const ConvergenceSeries a = run_sweep(gap, o.workers), b = run_sweep(bump, o.workers);
    const auto ca = check_bounds(a), cb = check_bounds(b);
    emit_report(a, ca, o.out);
    emit_report(b, cb, o.out);
    const ConstantComparison cmp = compare_constants(a, b);
    text << gap.name << " plateau " << g(a.plateau.value) << " +- " << g(a.plateau.half_width) << '\n'
         << bump.name << " plateau " << g(b.plateau.value) << " +- " << g(b.plateau.half_width) << '\n'
         << (cmp.separation.pass ? "PASS " : "FAIL ") << cmp.separation.name << '\n'
         << cmp.conclusion << '\n';
    std::ofstream((std::filesystem::path(o.out) / "cantor-demo.txt").string()) << text.str();
    std::cout << text.str();
    return rep.all_pass && all_pass(ca) && all_pass(cb) && cmp.separation.pass ? kOk : kBoundFailure;
}

int report_cmd(const Options& o) {
    std::vector<ScenarioConfig> list;
    if (!o.config.empty() || !o.preset.empty()) {
        list.push_back(scenario(o));
    } else {
        for (const auto& name : preset_names()) {
            list.push_back(preset(name));
            if (o.grid > 0) override_grid(list.back(), o.grid);
        }
    }
    std::ostringstream index;
    int code = kOk;
    for (const auto& c : list)
        if (run_and_emit(c, o, index) != kOk) code = kBoundFailure;
    std::filesystem::create_directories(o.out);
    std::ofstream((std::filesystem::path(o.out) / "report.txt").string()) << index.str();
    std::cout << index.str();
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal functional laboratory: audits, sweeps and reports"};
    app.require_subcommand(1);
    Options o;
    const auto add_common = [&](CLI::App* sub, bool with_param) {
        sub->add_option("--config", o.config, "INI scenario file");
        sub->add_option("--preset", o.preset, "shipped scenario name");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--workers", o.workers, "worker threads per evaluation")->check(CLI::PositiveNumber);
        sub->add_option("--grid", o.grid, "override the cell count (grid side on planar spaces)");
        if (with_param) sub->add_option("--param", o.param, "sweep parameter (defaults to the last ladder value)");
    };
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;

    auto* sp = app.add_subcommand("audit-space", "doubling, mass bound and Ahlfors audits of the scenario space");
    auto* sm = app.add_subcommand("audit-mollifier", "minorization and dyadic majorant audits");
    auto* sf = app.add_subcommand("audit-phi", "admissibility of the nonconvex profile");
    auto* se = app.add_subcommand("eval", "one point of the scenario");
    auto* ss = app.add_subcommand("sweep", "run the ladder and write csv, summary and gnuplot script");
    auto* sc = app.add_subcommand("cantor-demo", "Cantor gap against the bump and the constant comparison");
    auto* sr = app.add_subcommand("report", "sweep every preset (presets: " + names + ")");
    for (auto* sub : {sp, sf, ss, sc, sr}) add_common(sub, false);
    for (auto* sub : {sm, se}) add_common(sub, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*sp) return audit_space(o);
        if (*sm) return audit_mollifier(o);
        if (*sf) return audit_phi_cmd(o);
        if (*se) return eval_cmd(o);
        if (*ss) return sweep_cmd(o);
        if (*sc) return cantor_demo(o);
        if (*sr) return report_cmd(o);
    } catch (const ResolutionError& e) {
        std::cerr << "refused: " << e.what() << " (required cells: " << e.required_cells() << ")\n";
        return kResolution;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
