#include "bbmlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "bbmlab/cantor.hpp"
#include "bbmlab/errors.hpp"

namespace bbmlab {

std::string to_string(SeriesStatus status) {
    switch (status) {
        case SeriesStatus::Converged: return "converged";
        case SeriesStatus::NonPlateau: return "non-plateau";
        case SeriesStatus::Diverging: return "diverging";
    }
    return "?";
}

std::vector<double> ConvergenceSeries::ratios() const {
    std::vector<double> r;
    for (const auto& pt : points) r.push_back(pt.ratio);
    return r;
}

PlateauEstimate estimate_limit(const std::vector<double>& values, double tol) {
    if (values.size() < 4) throw InvalidArgument("estimate_limit: need at least 4 points");
    const std::size_t n = values.size();
    PlateauEstimate out;
    out.value = values.back();
    const auto [lo, hi] = std::minmax_element(values.end() - 3, values.end());
    out.half_width = 0.5 * (*hi - *lo);
    if (!std::all_of(values.end() - 3, values.end(), [](double v) { return std::isfinite(v); })) {
        out.status = SeriesStatus::NonPlateau;
        return out;
    }
    if (out.half_width <= tol * std::abs(out.value)) {
        out.status = SeriesStatus::Converged;
        return out;
    }
    const double d1 = values[n - 3] - values[n - 4], d2 = values[n - 2] - values[n - 3], d3 = values[n - 1] - values[n - 2];
    const bool same_sign = (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
    out.status = same_sign && std::abs(d1) < std::abs(d2) && std::abs(d2) < std::abs(d3) ? SeriesStatus::Diverging
                                                                                      : SeriesStatus::NonPlateau;
    return out;
}

PlateauEstimate estimate_limit(const ConvergenceSeries& series) {
    return estimate_limit(series.ratios(), series.config.plateau_tol);
}

BoundCheck make_check(std::string name, double lhs, double rhs, double tolerance) {
    BoundCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.tolerance = tolerance;
    c.pass = c.margin() >= -tolerance * std::abs(rhs);
    return c;
}

bool proved_checks_pass(const std::vector<BoundCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass || !c.proved; });
}

void check_resolution(const ScenarioConfig& config, double radius, double spacing) {
    const double need = config.min_cells_per_radius * spacing;
    if (radius >= need) return;
    const auto required = static_cast<std::size_t>(std::ceil(config.min_cells_per_radius / radius));
    throw ResolutionError("kernel radius " + std::to_string(radius) + " spans fewer than " +
                              std::to_string(config.min_cells_per_radius) + " cells of width " + std::to_string(spacing) +
                              "; need about " + std::to_string(required) + " cells per unit length",
                          required);
}

MollifierSpec kernel_at(const ScenarioConfig& c, double param, int dim) {
    const auto radius = [&] {
        if (c.axis == SweepAxis::Radius) return param;
        if (c.axis == SweepAxis::Index) return 1.0 / param;
        return c.radius;
    };
    switch (c.family) {
        case MollifierFamily::EuclideanRadial: {
            double i = c.index;
            if (c.axis == SweepAxis::Index) i = param;
            if (c.axis == SweepAxis::Radius) i = 1.0 / param;
            return euclidean_radial(i, dim);
        }
        case MollifierFamily::FlatWindow: return flat_window(radius());
        case MollifierFamily::WindowPower: return window_power(radius(), c.kernel_power);
        case MollifierFamily::Fractional:
            return fractional(c.axis == SweepAxis::Smoothness ? param : c.smoothness, c.p);
        case MollifierFamily::CustomKernel: return custom_kernel(c.radii, c.heights, dim);
    }
    throw InvalidArgument("kernel_at: unknown family");
}

namespace {

struct Setting {
    Space space;
    SampledFunction f;
    double energy = 0.0;
};

Setting build_setting(const ScenarioConfig& c, std::size_t cells, int depth) {
    const auto make_space = [&]() -> Space {
        switch (c.space.shape) {
            case SpaceShape::Interval:
                if (c.space.breakpoints.empty()) return Space::weighted_interval({0.0, 1.0}, {1.0}, cells);
                return Space::weighted_interval(c.space.breakpoints, c.space.weights, cells);
            case SpaceShape::Planar: return Space::planar_grid(cells, cells);
            case SpaceShape::Cantor: return cantor_space(build_cantor_model(depth), cells);
        }
        throw InvalidArgument("unknown space shape");
    };
    Setting s{make_space(), {}, 0.0};
    FunctionSpec spec = c.function;
    if (auto* cp = std::get_if<CantorPrimitive>(&spec); cp && c.axis == SweepAxis::Depth) cp->depth = depth;
    s.f = sample_function(s.space, spec);
    switch (c.energy_source) {
        case EnergySource::Computed: s.energy = energy(s.space, s.f, c.p, c.domain.outer).value; break;
        case EnergySource::Approximant:
            if (c.space.shape != SpaceShape::Cantor) throw ConfigError("approximant energy needs a Cantor space");
            s.energy = audit_cantor(build_cantor_model(depth)).approximant_infimum;
            break;
        case EnergySource::Fixed: s.energy = c.fixed_energy; break;
    }
    return s;
}

std::string format(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_format(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

ConvergenceSeries run_sweep(const ScenarioConfig& config, unsigned workers) {
    if (config.ladder.empty()) throw ConfigError("run_sweep: empty ladder");
    for (std::size_t k = 1; k < config.ladder.size(); ++k)
        if (config.ladder[k] == config.ladder[k - 1]) throw ConfigError("run_sweep: ladder values must be distinct");
    if (config.axis == SweepAxis::Delta && config.functional != FunctionalKind::Lambda)
        throw ConfigError("run_sweep: the delta axis applies to the nonconvex functional only");
    if (config.functional == FunctionalKind::Lambda && config.axis != SweepAxis::Delta &&
        config.axis != SweepAxis::Grid && config.axis != SweepAxis::Depth)
        throw ConfigError("run_sweep: the nonconvex functional sweeps delta, grid or depth");
    if (config.axis == SweepAxis::Depth && config.space.shape != SpaceShape::Cantor)
        throw ConfigError("run_sweep: the depth axis needs a Cantor space");

    ConvergenceSeries series;
    series.config = config;
    EvalOptions opt;
    opt.workers = std::max(1u, workers);
    opt.domain = config.domain;

    std::optional<Setting> shared;
    const bool rebuild = config.axis == SweepAxis::Grid || config.axis == SweepAxis::Depth;
    for (double param : config.ladder) {
        if (rebuild || !shared) {
            std::size_t cells = config.space.cells;
            int depth = config.space.depth;
            if (config.axis == SweepAxis::Grid) cells = static_cast<std::size_t>(param);
            if (config.axis == SweepAxis::Depth) {
                depth = static_cast<int>(param);
                cells = std::max(cells, cantor_min_cells(depth));
            }
            shared.emplace(build_setting(config, cells, depth));
        }
        const Setting& st = *shared;
        SeriesPoint pt;
        pt.param = param;
        pt.grid = st.space.size();
        if (config.functional == FunctionalKind::Lambda) {
            LambdaParams lp;
            lp.p = config.p;
            lp.delta = config.axis == SweepAxis::Delta ? param : config.delta;
            lp.phi = config.phi;
            lp.anchor = config.anchor;
            lp.Q = config.Q;
            pt.value = eval_Lambda(st.space, st.f, lp, opt);
        } else {
            const MollifierSpec kernel = kernel_at(config, param, st.space.dim());
            if (std::isfinite(kernel.support())) check_resolution(config, kernel.support(), st.space.max_spacing());
            const double eps = config.eps_from_radius ? kernel.support() : config.eps;
            const double bq = config.p + config.bound_q_shift;
            std::vector<Channel> channels{functional_channel(config.functional, config.p, eps, config.q)};
            const auto extra = bound_channels(config.p, config.bound_eps, bq);
            channels.insert(channels.end(), extra.begin(), extra.end());
            const ChannelSums sums = evaluate_channels(st.space, st.f, kernel, channels, opt);
            pt.value.which = config.functional;
            pt.value.p = config.p;
            pt.value.eps = config.functional == FunctionalKind::Psi ? eps : 0.0;
            pt.value.q = config.q;
            pt.value.value = functional_from_sum(config.functional, config.p, eps, sums.channels[0].outer_sum);
            pt.value.pair_count = sums.pairs;
            pt.value.diag_excluded = sums.rows;
            pt.bounds = assemble_bounds(config.p, config.bound_eps, bq, sums, 1);
        }
        pt.energy.p = config.p;
        pt.energy.value = st.energy;
        pt.energy.kind = config.p == 1.0 ? EnergyKind::Variation : EnergyKind::PEnergy;
        pt.ratio = st.energy > 0.0 ? pt.value.value / st.energy : std::numeric_limits<double>::quiet_NaN();
        series.points.push_back(pt);
    }

    const auto r = series.ratios();
    series.band_lo = *std::min_element(r.begin(), r.end());
    series.band_hi = *std::max_element(r.begin(), r.end());
    if (r.size() >= 4) {
        series.plateau = estimate_limit(series);
    } else {
        series.plateau.value = r.back();
        series.plateau.status = SeriesStatus::NonPlateau;
    }
    return series;
}

std::vector<BoundCheck> check_bounds(const ConvergenceSeries& series) {
    const ScenarioConfig& c = series.config;
    std::vector<BoundCheck> out;
    for (const auto& pt : series.points) {
        if (!pt.bounds) continue;
        const std::string at = "@" + to_string(c.axis) + "=" + short_format(pt.param);
        out.push_back(make_check("holder" + at, pt.bounds->holder.lhs, pt.bounds->holder.rhs, c.bound_tol));
        out.push_back(make_check("interpolation" + at, pt.bounds->interpolation.lhs, pt.bounds->interpolation.rhs,
                                 c.bound_tol));
    }
    out.push_back(make_check("plateau", series.plateau.half_width, c.plateau_tol * std::abs(series.plateau.value), 0.0));
    out.back().pass = series.plateau.status == SeriesStatus::Converged;
    out.back().proved = false;
    if (c.has_oracle) {
        out.push_back(make_check("oracle-limit", std::abs(series.plateau.value - c.oracle), c.oracle_tol * std::abs(c.oracle),
                                 0.0));
        out.back().proved = false;
    }
    if (c.has_floor) {
        const auto r = series.ratios();
        const std::size_t tail = std::min<std::size_t>(3, r.size());
        const double low = *std::min_element(r.end() - static_cast<std::ptrdiff_t>(tail), r.end());
        out.push_back(make_check("ratio-floor", c.ratio_floor, low, 0.0));
    }
    return out;
}

ConstantComparison compare_constants(const ConvergenceSeries& high, const ConvergenceSeries& low) {
    ConstantComparison out;
    const double high_lo = high.plateau.value - high.plateau.half_width;
    const double low_hi = low.plateau.value + low.plateau.half_width;
    out.separation = make_check("distinct-constants", low_hi, high_lo, 0.0);
    const bool settled = high.plateau.status == SeriesStatus::Converged && low.plateau.status == SeriesStatus::Converged;
    out.separation.pass = out.separation.pass && high_lo > low_hi && settled;
    std::ostringstream s;
    if (out.separation.pass) {
        s << "incompatible: " << high.config.name << " settles at ratio >= " << short_format(high_lo) << " while "
          << low.config.name << " settles at ratio <= " << short_format(low_hi)
          << "; no single constant relates both limits to the variation, so the lower and upper constants differ";
    } else if (!settled) {
        s << "inconclusive: at least one series has not reached a plateau (" << high.config.name << " "
          << to_string(high.plateau.status) << ", " << low.config.name << " " << to_string(low.plateau.status) << ")";
    } else {
        s << "inconclusive: plateau bands overlap ([" << short_format(high_lo) << ", ...] vs [..., "
          << short_format(low_hi) << "])";
    }
    out.conclusion = s.str();
    return out;
}

std::string csv_text(const ConvergenceSeries& series) {
    std::ostringstream s;
    s << "scenario,axis,param,functional,energy,ratio,pairs,seed_grid\n";
    for (const auto& pt : series.points)
        s << series.config.name << ',' << to_string(series.config.axis) << ',' << format(pt.param) << ','
          << format(pt.value.value) << ',' << format(pt.energy.value) << ',' << format(pt.ratio) << ','
          << pt.value.pair_count << ',' << pt.grid << '\n';
    return s.str();
}

std::string summary_text(const ConvergenceSeries& series, const std::vector<BoundCheck>& checks) {
    const ScenarioConfig& c = series.config;
    std::ostringstream s;
    s << "scenario: " << c.name << '\n';
    if (!c.description.empty()) s << "description: " << c.description << '\n';
    s << "functional: " << to_string(c.functional) << " p=" << short_format(c.p);
    if (c.functional == FunctionalKind::Phi) s << " q=" << short_format(c.q);
    if (c.functional == FunctionalKind::Psi)
        s << " eps=" << (c.eps_from_radius ? std::string("radius") : short_format(c.eps));
    s << '\n';
    if (c.functional == FunctionalKind::Lambda)
        s << "profile: " << to_string(c.phi.kind) << ", normalizer " << to_string(c.anchor) << '\n';
    else
        s << "kernel: " << to_string(c.family) << '\n';
    s << "function: " << c.function_label << '\n';
    s << "axis: " << to_string(c.axis) << '\n';
    s << "points:\n";
    for (const auto& pt : series.points)
        s << "  " << short_format(pt.param) << "  value " << short_format(pt.value.value) << "  energy "
          << short_format(pt.energy.value) << "  ratio " << short_format(pt.ratio) << '\n';
    s << "plateau: " << short_format(series.plateau.value) << " +- " << short_format(series.plateau.half_width) << " ("
      << to_string(series.plateau.status) << ")\n";
    s << "ratio band: [" << short_format(series.band_lo) << ", " << short_format(series.band_hi) << "]\n";
    if (c.has_oracle) s << "expected limit: " << short_format(c.oracle) << '\n';
    s << "checks:\n";
    for (const auto& ck : checks)
        s << "  " << (ck.pass ? "PASS " : ck.proved ? "FAIL " : "MISS ") << ck.name << "  lhs " << short_format(ck.lhs) << "  rhs "
          << short_format(ck.rhs) << "  margin " << short_format(ck.margin()) << '\n';
    return s.str();
}

void emit_report(const ConvergenceSeries& series, const std::vector<BoundCheck>& checks, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
    const std::string base = (fs::path(dir) / series.config.name).string();
    const auto write = [](const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
    };
    write(base + ".csv", csv_text(series));
    write(base + ".summary.txt", summary_text(series, checks));
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel '" << to_string(series.config.axis) << "'\n"
       << "set ylabel 'functional / energy'\n"
       << "set logscale x\n"
       << "set terminal pngcairo size 800,500\n"
       << "set output '" << series.config.name << ".png'\n"
       << "plot '" << series.config.name << ".csv' using 3:6 with linespoints title '" << series.config.name << "'";
    if (series.config.has_oracle) gp << ", " << format(series.config.oracle) << " with lines dt 2 title 'expected'";
    gp << '\n';
    write(base + ".gp", gp.str());
}

// ============================================================================
// Presets
// ============================================================================

namespace {

ScenarioConfig smooth_1d(const std::string& name, std::size_t cells) {
    ScenarioConfig c;
    c.name = name;
    c.space.cells = cells;
    c.function = Sine{};
    c.function_label = "sin(2 pi x)";
    c.domain.outer = Region::interval(0.1, 0.9);
    return c;
}

std::map<std::string, ScenarioConfig> build_presets() {
    std::map<std::string, ScenarioConfig> m;

    {
        ScenarioConfig c = smooth_1d("bbm-1d-smooth", 100000);
        c.description = "q-mean of difference quotients against the unit radial kernel on a smooth curve";
        c.functional = FunctionalKind::Phi;
        c.q = 2.0;
        c.family = MollifierFamily::EuclideanRadial;
        c.axis = SweepAxis::Index;
        c.ladder = {125, 250, 500, 1000};
        c.has_oracle = true;
        c.oracle = std::pow(2.0, 1.0 / c.q);
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c;
        c.name = "radial-2d";
        c.description = "quadratic energy of an affine map against the planar radial kernel";
        c.functional = FunctionalKind::I;
        c.p = 2.0;
        c.space.shape = SpaceShape::Planar;
        c.space.cells = 512;
        c.function = Affine{0.0, 1.0, 0.5};
        c.function_label = "x + 0.5 y";
        c.family = MollifierFamily::EuclideanRadial;
        c.axis = SweepAxis::Index;
        c.ladder = {20, 24, 28, 32};
        c.domain.outer = Region::square(0.05, 0.95);
        c.has_oracle = true;
        c.oracle = M_PI;
        c.oracle_tol = 0.03;
        m[c.name] = c;
    }
    {
        ScenarioConfig c;
        c.name = "cantor-gap";
        c.description = "Cantor primitive on the fat Cantor weight, variation from the approximant sequence";
        c.functional = FunctionalKind::Phi;
        c.q = 2.0;
        c.space.shape = SpaceShape::Cantor;
        c.space.depth = 10;
        c.space.cells = cantor_min_cells(10);
        c.function = CantorPrimitive{10};
        c.function_label = "cantor primitive, depth 10";
        c.family = MollifierFamily::EuclideanRadial;
        c.axis = SweepAxis::Index;
        c.ladder = {65536, 131072, 262144, 524288, 1048576};
        c.energy_source = EnergySource::Approximant;
        c.plateau_tol = 0.005;
        c.has_oracle = true;
        c.oracle = std::pow(2.0, 2.0 / c.q) * 4.0 * (0.5 + std::ldexp(1.0, -11));
        c.oracle_tol = 0.03;
        c.has_floor = true;
        c.ratio_floor = std::pow(2.0, 1.0 + 1.0 / c.q);
        m[c.name] = c;
    }
    {
        ScenarioConfig c = m.at("cantor-gap");
        c.name = "bump-f0";
        c.description = "tent supported in the first removed interval of the fat Cantor weight";
        c.function = bump_f0(1.0);
        c.function_label = "tent on (3/8, 5/8)";
        c.ladder = {131072, 262144, 524288, 1048576};
        c.energy_source = EnergySource::Computed;
        c.has_floor = false;
        c.oracle = std::pow(2.0, 1.0 / c.q);
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c;
        c.name = "lambda-1d";
        c.description = "step profile on the identity, normalizer d^Q with Q = 1";
        c.functional = FunctionalKind::Lambda;
        c.space.cells = 20000;
        c.function = Affine{};
        c.function_label = "x";
        c.phi = step_phi(1.0);
        c.anchor = LambdaAnchor::AhlforsPower;
        c.Q = 1.0;
        c.axis = SweepAxis::Delta;
        c.ladder = {4e-3, 2e-3, 1e-3, 5e-4};
        c.has_oracle = true;
        c.oracle = 2.0;
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c;
        c.name = "lambda-2d-step";
        c.description = "step profile on a planar affine map, normalizer d^Q with Q = 2";
        c.functional = FunctionalKind::Lambda;
        c.space.shape = SpaceShape::Planar;
        c.space.cells = 128;
        c.function = Affine{0.0, 1.0, 0.0};
        c.function_label = "x";
        c.phi = step_phi(1.0);
        c.anchor = LambdaAnchor::AhlforsPower;
        c.Q = 2.0;
        c.axis = SweepAxis::Delta;
        // Half-integer multiples of the spacing keep the jump of the profile between node rows.
        c.ladder = {11.5 / 128, 7.5 / 128, 5.5 / 128, 3.5 / 128};
        c.domain.outer = Region::square(0.25, 0.75);
        c.has_oracle = true;
        c.oracle = 4.0;
        c.oracle_tol = 0.05;
        c.plateau_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c;
        c.name = "fractional-lower";
        c.description = "fractional kernel as s tends to 1 on the identity";
        c.functional = FunctionalKind::I;
        c.space.cells = 2000;
        c.function = Affine{};
        c.function_label = "x";
        c.family = MollifierFamily::Fractional;
        c.axis = SweepAxis::Smoothness;
        c.ladder = {0.8, 0.9, 0.95, 0.975, 0.9875, 0.99375};
        c.has_oracle = true;
        c.oracle = 1.0;
        c.oracle_tol = 0.05;
        c.plateau_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c = smooth_1d("window-power", 20000);
        c.description = "window kernel weighted by (d/r)^2, q = 2";
        c.functional = FunctionalKind::Phi;
        c.q = 2.0;
        c.family = MollifierFamily::WindowPower;
        c.kernel_power = 2.0;
        c.axis = SweepAxis::Radius;
        c.ladder = {0.08, 0.04, 0.02, 0.01};
        c.has_oracle = true;
        c.oracle = 1.0 / std::sqrt(3.0);
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c = smooth_1d("flat-window", 20000);
        c.description = "normalized flat window, q = 2";
        c.functional = FunctionalKind::Phi;
        c.q = 2.0;
        c.family = MollifierFamily::FlatWindow;
        c.axis = SweepAxis::Radius;
        c.ladder = {0.08, 0.04, 0.02, 0.01};
        c.has_oracle = true;
        c.oracle = 1.0;
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c = smooth_1d("psi-sweep", 20000);
        c.description = "exponent p + eps with eps equal to the window radius";
        c.functional = FunctionalKind::Psi;
        c.eps_from_radius = true;
        c.family = MollifierFamily::FlatWindow;
        c.axis = SweepAxis::Radius;
        c.ladder = {0.08, 0.04, 0.02, 0.01};
        c.has_oracle = true;
        c.oracle = 1.0;
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    {
        ScenarioConfig c = smooth_1d("phi-sweep", 20000);
        c.description = "q-mean with p = q = 2 on a parabola";
        c.functional = FunctionalKind::Phi;
        c.p = 2.0;
        c.q = 2.0;
        c.function = Polynomial{{0.0, 0.0, 1.0}};
        c.function_label = "x^2";
        c.family = MollifierFamily::FlatWindow;
        c.axis = SweepAxis::Radius;
        c.ladder = {0.08, 0.04, 0.02, 0.01};
        c.has_oracle = true;
        c.oracle = 1.0;
        c.oracle_tol = 0.02;
        m[c.name] = c;
    }
    return m;
}

const std::map<std::string, ScenarioConfig>& presets() {
    static const auto table = build_presets();
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"bbm-1d-smooth", "radial-2d",    "cantor-gap",  "bump-f0",   "lambda-1d",
            "lambda-2d-step", "fractional-lower", "window-power", "flat-window", "psi-sweep",
            "phi-sweep"};
}

ScenarioConfig preset(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second;
}

}  // namespace bbmlab
