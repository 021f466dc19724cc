#include "bbmlab/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbmlab/cantor.hpp"
#include "bbmlab/summation.hpp"

namespace bbmlab {

double SampledFunction::derivative(std::size_t k) const {
    if (grad_y.empty()) return std::abs(grad_x[k]);
    return std::sqrt(grad_x[k] * grad_x[k] + grad_y[k] * grad_y[k]);
}

namespace {

[[noreturn]] void undefined(const char* what) {
    throw InvalidArgument(std::string("sample_function: ") + what + " is undefined on planar spaces");
}

void sample_piecewise_linear(const Space& space, const PiecewiseLinear& pl, SampledFunction& out) {
    if (pl.knots.size() < 2 || pl.knots.size() != pl.values.size())
        throw InvalidArgument("sample_function: piecewise-linear needs matching knots and values");
    for (std::size_t i = 1; i < pl.knots.size(); ++i)
        if (!(pl.knots[i] > pl.knots[i - 1]))
            throw InvalidArgument("sample_function: knots must be strictly ascending");
    for (std::size_t k = 0; k < space.size(); ++k) {
        const double x = space.coords()[k];
        if (x <= pl.knots.front()) {
            out.values[k] = pl.values.front();
            continue;
        }
        if (x >= pl.knots.back()) {
            out.values[k] = pl.values.back();
            continue;
        }
        const std::size_t s = static_cast<std::size_t>(
            std::upper_bound(pl.knots.begin(), pl.knots.end(), x) - pl.knots.begin() - 1);
        const double slope = (pl.values[s + 1] - pl.values[s]) / (pl.knots[s + 1] - pl.knots[s]);
        out.values[k] = pl.values[s] + slope * (x - pl.knots[s]);
        out.grad_x[k] = slope;
    }
}

}  // namespace

SampledFunction sample_function(const Space& space, const FunctionSpec& spec) {
    SampledFunction out;
    const std::size_t n = space.size();
    out.values.assign(n, 0.0);
    out.grad_x.assign(n, 0.0);
    const bool planar = space.kind() == SpaceKind::Planar;
    if (planar) out.grad_y.assign(n, 0.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Affine>) {
                for (std::size_t k = 0; k < n; ++k) {
                    const Point p = space.node(k);
                    out.values[k] = s.c0 + s.ax * p[0] + (planar ? s.ay * p[1] : 0.0);
                    out.grad_x[k] = s.ax;
                    if (planar) out.grad_y[k] = s.ay;
                }
            } else if constexpr (std::is_same_v<T, Sine>) {
                for (std::size_t k = 0; k < n; ++k) {
                    const double arg = two_pi * s.frequency * space.node(k)[0] + s.phase;
                    out.values[k] = s.amplitude * std::sin(arg);
                    out.grad_x[k] = s.amplitude * two_pi * s.frequency * std::cos(arg);
                }
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                if (planar) undefined("polynomial");
                if (s.coeffs.empty()) throw InvalidArgument("sample_function: empty polynomial");
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = space.coords()[k];
                    double v = 0.0, d = 0.0;
                    for (std::size_t i = s.coeffs.size(); i-- > 0;) {
                        d = d * x + v;
                        v = v * x + s.coeffs[i];
                    }
                    out.values[k] = v;
                    out.grad_x[k] = d;
                }
            } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
                if (planar) undefined("piecewise-linear");
                sample_piecewise_linear(space, s, out);
            } else if constexpr (std::is_same_v<T, Indicator>) {
                if (planar) undefined("indicator");
                if (!(s.b > s.a)) throw InvalidArgument("sample_function: indicator needs a < b");
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = space.coords()[k];
                    out.values[k] = (x >= s.a && x <= s.b) ? s.height : 0.0;
                }
                for (double pos : {s.a, s.b})
                    if (pos > 0.0 && pos < 1.0 && s.height != 0.0) out.jumps.push_back({pos, std::abs(s.height)});
            } else if constexpr (std::is_same_v<T, CantorPrimitive>) {
                if (planar) undefined("cantor-primitive");
                const CantorModel model = build_cantor_model(s.depth);
                sample_piecewise_linear(space, CantorFunction(model).descriptor(), out);
            } else if constexpr (std::is_same_v<T, Bump>) {
                if (planar) undefined("bump");
                if (!(s.half_width > 0.0)) throw InvalidArgument("sample_function: bump half-width must be positive");
                for (std::size_t k = 0; k < n; ++k) {
                    const double u = (space.coords()[k] - s.center) / s.half_width;
                    if (std::abs(u) < 1.0) {
                        out.values[k] = s.amplitude * (1.0 - std::abs(u));
                        out.grad_x[k] = (u < 0.0 ? 1.0 : -1.0) * s.amplitude / s.half_width;
                    }
                }
            }
        },
        spec);
    return out;
}

EnergyValue energy(const Space& space, const SampledFunction& f, double p, const Region& region) {
    if (!(p >= 1.0)) throw InvalidArgument("energy: exponent must be at least 1");
    if (f.grad_x.size() != space.size()) throw InvalidArgument("energy: missing derivative data");
    CompensatedSum sum;
    const int dim = space.dim();
    for (std::size_t k = 0; k < space.size(); ++k) {
        if (!region.contains(space.node(k), dim)) continue;
        const double g = f.derivative(k);
        // At cell midpoints the density envelope equals the density.
        sum.add((p == 1.0 ? g : std::pow(g, p)) * space.cell_mass(k));
    }
    if (p == 1.0 && dim == 1)
        for (const Jump& j : f.jumps)
            if (region.contains({j.position, 0.0}, 1)) sum.add(j.magnitude * weight_envelope_at(space, j.position));
    EnergyValue e;
    e.p = p;
    e.value = sum.value();
    e.kind = p == 1.0 ? EnergyKind::Variation : EnergyKind::PEnergy;
    return e;
}

std::vector<double> weight_envelope(const Space& space) {
    if (space.kind() != SpaceKind::Interval) throw InvalidArgument("weight_envelope: interval spaces only");
    std::vector<double> out(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) out[k] = weight_envelope_at(space, space.coords()[k]);
    return out;
}

double weight_envelope_at(const Space& space, double x) {
    if (space.kind() != SpaceKind::Interval) throw InvalidArgument("weight_envelope: interval spaces only");
    const auto& e = space.edges();
    const auto it = std::lower_bound(e.begin(), e.end(), x);
    if (it != e.end() && *it == x) {
        const std::size_t j = static_cast<std::size_t>(it - e.begin());
        if (j == 0) return space.density(0);
        if (j == space.size()) return space.density(j - 1);
        return std::min(space.density(j - 1), space.density(j));
    }
    return space.density(space.locate(x));
}

std::vector<double> lip_field(const Space& space, const SampledFunction& f, double r) {
    if (!(r > 0.0)) throw InvalidArgument("lip_field: radius must be positive");
    const std::size_t n = space.size();
    std::vector<double> out(n, 0.0);
    if (space.kind() == SpaceKind::Planar) {
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j : space.neighbors_within(k, r))
                out[k] = std::max(out[k], std::abs(f.values[j] - f.values[k]) / r);
        return out;
    }
    // Sparse tables for range min/max over contiguous neighbour windows.
    std::vector<std::vector<double>> lo{f.values}, hi{f.values};
    for (std::size_t w = 1; 2 * w <= n; w *= 2) {
        const auto& pl = lo.back();
        const auto& ph = hi.back();
        std::vector<double> nl(n - 2 * w + 1), nh(n - 2 * w + 1);
        for (std::size_t i = 0; i + 2 * w <= n; ++i) {
            nl[i] = std::min(pl[i], pl[i + w]);
            nh[i] = std::max(ph[i], ph[i + w]);
        }
        lo.push_back(std::move(nl));
        hi.push_back(std::move(nh));
    }
    for (std::size_t k = 0; k < n; ++k) {
        const IndexRange rg = space.interval_neighbors(space.coords()[k], r);
        const std::size_t len = rg.size();
        std::size_t level = 0;
        while ((std::size_t{2} << level) <= len) ++level;
        const std::size_t w = std::size_t{1} << level;
        const double mn = std::min(lo[level][rg.begin], lo[level][rg.end - w]);
        const double mx = std::max(hi[level][rg.begin], hi[level][rg.end - w]);
        out[k] = std::max(mx - f.values[k], f.values[k] - mn) / r;
    }
    return out;
}

double ball_integral(const Space& space, const SampledFunction& f, const Point& c, double r) {
    if (!(r > 0.0)) throw InvalidArgument("ball_integral: radius must be positive");
    CompensatedSum sum;
    if (space.kind() == SpaceKind::Interval) {
        const std::size_t k0 = space.locate(c[0] - r), k1 = space.locate(c[0] + r);
        for (std::size_t k = k0; k <= k1; ++k) {
            const double a = std::max(space.cell_lo(k), c[0] - r);
            const double b = std::min(space.cell_hi(k), c[0] + r);
            if (!(b > a)) continue;
            const double xk = space.coords()[k];
            const double lin = 0.5 * ((b - xk) * (b - xk) - (a - xk) * (a - xk));
            sum.add(space.density(k) * ((b - a) * f.values[k] + f.grad_x[k] * lin));
        }
        return sum.value();
    }
    const auto span = [](double lo, double h, std::size_t n) {
        const double v = std::floor(lo / h);
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t ix0 = span(c[0] - r, space.hx(), space.nx()), ix1 = span(c[0] + r, space.hx(), space.nx());
    const std::size_t iy0 = span(c[1] - r, space.hy(), space.ny()), iy1 = span(c[1] + r, space.hy(), space.ny());
    for (std::size_t iy = iy0; iy <= iy1; ++iy)
        for (std::size_t ix = ix0; ix <= ix1; ++ix) {
            const std::size_t k = space.index(ix, iy);
            const double w = space.cell_ball_overlap(k, c, r);
            if (w > 0.0) sum.add(w * f.values[k]);
        }
    return sum.value();
}

double ball_average(const Space& space, const SampledFunction& f, const Point& c, double r) {
    return ball_integral(space, f, c, r) / space.ball_measure(c, r);
}

namespace {

// Ball integrals of a cellwise constant g >= 0.
class CellAverager {
public:
    CellAverager(const Space& space, const std::vector<double>& g) : space_(space), g_(g) {
        for (double v : g)
            if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("restricted_maximal: g must be finite and >= 0");
        if (space.kind() == SpaceKind::Interval) {
            prefix_.assign(space.size() + 1, 0.0);
            for (std::size_t k = 0; k < space.size(); ++k) prefix_[k + 1] = prefix_[k] + g[k] * space.cell_mass(k);
        }
    }

    double average(const Point& c, double r) const {
        if (space_.kind() == SpaceKind::Interval) return (primitive(c[0] + r) - primitive(c[0] - r)) / space_.ball_measure(c, r);
        double sum = 0.0;
        const double hx = space_.hx(), hy = space_.hy();
        const std::size_t ix0 = clampi((c[0] - r) / hx, space_.nx()), ix1 = clampi((c[0] + r) / hx, space_.nx());
        const std::size_t iy0 = clampi((c[1] - r) / hy, space_.ny()), iy1 = clampi((c[1] + r) / hy, space_.ny());
        for (std::size_t iy = iy0; iy <= iy1; ++iy)
            for (std::size_t ix = ix0; ix <= ix1; ++ix) {
                const std::size_t k = space_.index(ix, iy);
                sum += g_[k] * space_.cell_ball_overlap(k, c, r);
            }
        return sum / space_.ball_measure(c, r);
    }

    double maximal(std::size_t node, double R) const {
        const Point c = space_.node(node);
        double best = g_[node];  // r -> 0 limit
        best = std::max(best, average(c, R));
        for (double r = R * std::pow(2.0, -0.25); r > 0.25 * space_.max_spacing(); r *= std::pow(2.0, -0.25))
            best = std::max(best, average(c, r));
        if (space_.kind() == SpaceKind::Interval) {
            const auto& e = space_.edges();
            const std::size_t k0 = space_.locate(c[0] - R), k1 = space_.locate(c[0] + R) + 1;
            for (std::size_t j = k0; j <= k1 && j < e.size(); ++j) {
                const double r = std::abs(e[j] - c[0]);
                if (r > 0.0 && r <= R) best = std::max(best, average(c, r));
            }
        }
        return best;
    }

private:
    static std::size_t clampi(double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(n - 1)));
    }

    double primitive(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return prefix_.back();
        const std::size_t k = space_.locate(x);
        return prefix_[k] + g_[k] * space_.density(k) * (x - space_.cell_lo(k));
    }

    const Space& space_;
    const std::vector<double>& g_;
    std::vector<double> prefix_;
};

}  // namespace

double restricted_maximal_at(const Space& space, const std::vector<double>& g, double R, std::size_t node) {
    if (!(R > 0.0)) throw InvalidArgument("restricted_maximal: radius must be positive");
    return CellAverager(space, g).maximal(node, R);
}

std::vector<double> restricted_maximal(const Space& space, const std::vector<double>& g, double R) {
    if (!(R > 0.0)) throw InvalidArgument("restricted_maximal: radius must be positive");
    const CellAverager avg(space, g);
    std::vector<double> out(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) out[k] = avg.maximal(k, R);
    return out;
}

TelescopeAudit audit_telescope(const Space& space, const SampledFunction& f, const std::vector<double>& g,
                               double r, double lambda, double exponent, const std::vector<std::size_t>& nodes) {
    if (space.kind() != SpaceKind::Interval) throw InvalidArgument("audit_telescope: interval spaces only");
    if (!(r > 0.0) || !(lambda >= 1.0) || !(exponent >= 1.0))
        throw InvalidArgument("audit_telescope: need r > 0, lambda >= 1, exponent >= 1");
    std::vector<double> ge(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) ge[k] = std::pow(g[k], exponent);
    const CellAverager avg(space, ge);
    TelescopeAudit out;
    for (std::size_t y : nodes) {
        const double num = std::abs(f.values[y] - ball_average(space, f, space.node(y), r));
        const double m = avg.maximal(y, lambda * r);
        if (!(m > 0.0)) {
            ++out.skipped;
            continue;
        }
        out.constant = std::max(out.constant, num / (r * std::pow(m, 1.0 / exponent)));
        ++out.sampled;
    }
    return out;
}

}  // namespace bbmlab
