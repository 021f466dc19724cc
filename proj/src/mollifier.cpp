#include "bbmlab/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbmlab {

std::string to_string(MollifierFamily family) {
    switch (family) {
        case MollifierFamily::Fractional: return "fractional";
        case MollifierFamily::WindowPower: return "window-power";
        case MollifierFamily::FlatWindow: return "flat-window";
        case MollifierFamily::EuclideanRadial: return "euclidean-radial";
        case MollifierFamily::CustomKernel: return "custom-kernel";
    }
    return "?";
}

MollifierFamily parse_family(const std::string& name) {
    for (auto f : {MollifierFamily::Fractional, MollifierFamily::WindowPower, MollifierFamily::FlatWindow,
                   MollifierFamily::EuclideanRadial, MollifierFamily::CustomKernel})
        if (to_string(f) == name) return f;
    throw InvalidArgument("unknown mollifier family '" + name + "'");
}

double MollifierSpec::support() const {
    switch (family) {
        case MollifierFamily::Fractional: return std::numeric_limits<double>::infinity();
        case MollifierFamily::WindowPower:
        case MollifierFamily::FlatWindow: return r;
        default: return radii.empty() ? 0.0 : radii.back();
    }
}

bool MollifierSpec::ball_normalized() const { return !step_profile(); }

double MollifierSpec::profile(double t) const {
    const auto it = std::upper_bound(radii.begin(), radii.end(), t);
    if (it == radii.end()) return 0.0;
    return heights[static_cast<std::size_t>(it - radii.begin())];
}

MollifierSpec fractional(double s, double p) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("fractional: s must lie in (0,1)");
    if (!(p >= 1.0)) throw InvalidArgument("fractional: p must be at least 1");
    MollifierSpec m;
    m.family = MollifierFamily::Fractional;
    m.s = s;
    m.p = p;
    return m;
}

MollifierSpec window_power(double r, double q) {
    if (!(r > 0.0)) throw InvalidArgument("window_power: r must be positive");
    if (!(q >= 0.0)) throw InvalidArgument("window_power: q must be nonnegative");
    MollifierSpec m;
    m.family = MollifierFamily::WindowPower;
    m.r = r;
    m.q = q;
    return m;
}

MollifierSpec flat_window(double r) {
    if (!(r > 0.0)) throw InvalidArgument("flat_window: r must be positive");
    MollifierSpec m;
    m.family = MollifierFamily::FlatWindow;
    m.r = r;
    return m;
}

namespace {

void check_table(const std::vector<double>& radii, const std::vector<double>& heights, int dim) {
    if (dim != 1 && dim != 2) throw InvalidArgument("radial profile: dimension must be 1 or 2");
    if (radii.empty() || radii.size() != heights.size())
        throw InvalidArgument("radial profile: need one height per radius");
    double prev = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(radii[k] > prev)) throw InvalidArgument("radial profile: radii must be positive and ascending");
        if (!(heights[k] >= 0.0) || !std::isfinite(heights[k]))
            throw InvalidArgument("radial profile: heights must be finite and nonnegative");
        prev = radii[k];
    }
}

double radial_moment(const std::vector<double>& radii, const std::vector<double>& heights, int dim) {
    double total = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        total += heights[k] * (std::pow(radii[k], dim) - std::pow(prev, dim)) / dim;
        prev = radii[k];
    }
    return total;
}

}  // namespace

MollifierSpec radial_profile(std::vector<double> radii, std::vector<double> heights, int dim) {
    check_table(radii, heights, dim);
    const double moment = radial_moment(radii, heights, dim);
    if (std::abs(moment - 1.0) > 1e-6)
        throw InvalidArgument("radial profile: int rho(t) t^{n-1} dt = " + std::to_string(moment) + ", expected 1");
    MollifierSpec m;
    m.family = MollifierFamily::EuclideanRadial;
    m.radii = std::move(radii);
    m.heights = std::move(heights);
    m.dim = dim;
    m.r = m.radii.back();
    return m;
}

MollifierSpec euclidean_radial(double i, int dim) {
    if (!(i > 0.0)) throw InvalidArgument("euclidean_radial: index must be positive");
    const double r = 1.0 / i;
    return radial_profile({r}, {dim / std::pow(r, dim)}, dim);
}

MollifierSpec custom_kernel(std::vector<double> radii, std::vector<double> heights, int dim) {
    check_table(radii, heights, dim);
    MollifierSpec m;
    m.family = MollifierFamily::CustomKernel;
    m.radii = std::move(radii);
    m.heights = std::move(heights);
    m.dim = dim;
    m.r = m.radii.back();
    return m;
}

double eval(const MollifierSpec& spec, const Space& space, std::size_t x, std::size_t y) {
    const double d = space.distance(x, y);
    switch (spec.family) {
        case MollifierFamily::Fractional:
            if (x == y) throw InvalidArgument("eval: fractional kernel is singular on the diagonal");
            return (1.0 - spec.s) * std::pow(d, spec.p * (1.0 - spec.s)) / space.ball_measure(y, d);
        case MollifierFamily::WindowPower:
            return d < spec.r ? std::pow(d / spec.r, spec.q) / space.ball_measure(y, spec.r) : 0.0;
        case MollifierFamily::FlatWindow:
            return d < spec.r ? 1.0 / space.ball_measure(y, spec.r) : 0.0;
        default:
            return spec.profile(d);
    }
}

// ============================================================================
// Audits
// ============================================================================

MinorizeAudit audit_minorize(const MollifierSpec& spec, const Space& space, double p, double r_probe,
                             std::size_t max_centers) {
    if (!(p >= 1.0)) throw InvalidArgument("audit_minorize: p must be at least 1");
    if (!(r_probe > 0.0)) throw InvalidArgument("audit_minorize: probe radius must be positive");
    MinorizeAudit out;
    if (spec.family == MollifierFamily::WindowPower && spec.q > p) out.bounded = false;
    for (std::size_t y : default_sample(space, max_centers).centers) {
        const double norm = space.ball_measure(y, r_probe);
        for (std::size_t x : space.neighbors_within(y, r_probe)) {
            const double d = space.distance(x, y);
            const double lower = std::pow(d / r_probe, p) / norm;
            const double rho = eval(spec, space, x, y);
            ++out.pairs;
            if (lower == 0.0) continue;
            if (!(rho > 0.0)) {
                out.bounded = false;
                out.max_ratio = std::numeric_limits<double>::infinity();
                continue;
            }
            out.max_ratio = std::max(out.max_ratio, lower / rho);
        }
    }
    out.C_rho = std::max(1.0, out.max_ratio);
    return out;
}

std::vector<std::pair<double, MinorizeAudit>> audit_minorize_ladder(const MollifierSpec& spec, const Space& space,
                                                                    double p, const std::vector<double>& probes,
                                                                    std::size_t max_centers) {
    std::vector<std::pair<double, MinorizeAudit>> out;
    for (double r : probes) out.emplace_back(r, audit_minorize(spec, space, p, r, max_centers));
    return out;
}

double DyadicMajorant::tail(int M) const {
    double t = 0.0;
    for (int j = std::max(M, j_min); j <= j_max; ++j) t += at(j);
    return t;
}

namespace {

double min_node_gap(const Space& space) {
    if (space.kind() == SpaceKind::Planar) return std::min(space.hx(), space.hy());
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < space.size(); ++k) g = std::min(g, space.coords()[k] - space.coords()[k - 1]);
    return g;
}

// Exponent j with 2^j <= d < 2^{j+1}.
int dyadic_level(double d) {
    int e = 0;
    const double m = std::frexp(d, &e);  // d = m 2^e, m in [1/2, 1)
    (void)m;
    return e - 1;
}

}  // namespace

DyadicMajorant dyadic_majorant(const MollifierSpec& spec, const Space& space, std::size_t max_centers) {
    if (spec.family != MollifierFamily::WindowPower && spec.family != MollifierFamily::FlatWindow)
        throw InvalidArgument("dyadic_majorant: unsupported for the " + to_string(spec.family) + " family");
    DyadicMajorant out;
    out.j_max = dyadic_level(spec.r);
    out.j_min = std::min(dyadic_level(min_node_gap(space)), out.j_max);

    // Audit the structural constants on balls at the ladder, at r and at every 2^{j+1}.
    RadiusSample sample = default_sample(space, max_centers);
    sample.radii.push_back(spec.r);
    for (int j = out.j_min; j <= out.j_max; ++j) sample.radii.push_back(std::ldexp(1.0, j + 1));
    std::sort(sample.radii.begin(), sample.radii.end());
    sample.radii.erase(std::unique(sample.radii.begin(), sample.radii.end()), sample.radii.end());
    out.C_d = audit_doubling(space, sample).C_d;
    const MassBoundFit fit = audit_upper_mass_bound(space, sample);
    out.C0 = fit.C0;
    out.sigma = fit.sigma;

    for (int j = out.j_min; j <= out.j_max; ++j) {
        const double top = std::ldexp(1.0, j + 1);
        const double dj = spec.family == MollifierFamily::WindowPower
                              ? out.C_d * std::pow(top / spec.r, spec.q)
                              : out.C0 * std::pow(top / spec.r, out.sigma);
        out.d.push_back(dj);
        out.sum += dj;
    }
    out.declared_bound = spec.family == MollifierFamily::WindowPower
                             ? std::pow(2.0, spec.q + 1.0) * out.C_d
                             : out.C0 * std::pow(2.0, out.sigma) / (1.0 - std::pow(2.0, -out.sigma));
    out.worst_excess = -1.0;

    for (std::size_t y : sample.centers)
        for (std::size_t x : space.neighbors_within(y, spec.r)) {
            const double d = space.distance(x, y);
            const int j = dyadic_level(d);
            const double rho = eval(spec, space, x, y);
            const double maj = out.at(j) / space.ball_measure(y, std::ldexp(1.0, j + 1));
            ++out.checked;
            const double excess = maj > 0.0 ? rho / maj - 1.0 : (rho > 0.0 ? INFINITY : 0.0);
            out.worst_excess = std::max(out.worst_excess, excess);
            if (excess > 1e-12) ++out.violations;
        }
    return out;
}

}  // namespace bbmlab
