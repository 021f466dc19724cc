#include "bbmlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bbmlab {

namespace {

// Cells whose edges fall within this fraction of a cell width of a breakpoint
// are snapped instead of split.
constexpr double kSnapFraction = 1e-9;

// Integral of sqrt(r^2 - t^2) from 0 to x, for |x| <= r.
double chord_primitive(double x, double r) {
    const double u = std::clamp(x / r, -1.0, 1.0);
    const double xs = u * r;
    return 0.5 * (xs * std::sqrt(std::max(0.0, (r - xs) * (r + xs))) + r * r * std::asin(u));
}

// Area of {|z| < r, z_x < X, z_y < Y} for a disc centred at the origin.
double quadrant_area(double X, double Y, double r) {
    if (X <= -r || Y <= -r) return 0.0;
    const double a = std::min(X, r);
    const double s_lo = chord_primitive(-r, r);
    if (Y >= r) return 2.0 * (chord_primitive(a, r) - s_lo);
    const double c = std::sqrt(std::max(0.0, (r - Y) * (r + Y)));
    if (Y >= 0.0) {
        double area = 2.0 * (chord_primitive(std::min(a, -c), r) - s_lo);
        if (a > -c) {
            const double b = std::min(a, c);
            area += Y * (b + c) + chord_primitive(b, r) - chord_primitive(-c, r);
        }
        if (a > c) area += 2.0 * (chord_primitive(a, r) - chord_primitive(c, r));
        return area;
    }
    if (a <= -c) return 0.0;
    const double b = std::min(a, c);
    return Y * (b + c) + chord_primitive(b, r) - chord_primitive(-c, r);
}

}  // namespace

double disc_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1) {
    if (r <= 0.0 || x1 <= x0 || y1 <= y0) return 0.0;
    const double X0 = x0 - cx, X1 = x1 - cx, Y0 = y0 - cy, Y1 = y1 - cy;
    // Nearest and farthest points of the rectangle decide the trivial cases.
    const double nx = std::max({X0, 0.0, -X1});
    const double ny = std::max({Y0, 0.0, -Y1});
    if (nx * nx + ny * ny >= r * r) return 0.0;
    const double fx = std::max(std::abs(X0), std::abs(X1));
    const double fy = std::max(std::abs(Y0), std::abs(Y1));
    if (fx * fx + fy * fy <= r * r) return (x1 - x0) * (y1 - y0);
    const double area = quadrant_area(X1, Y1, r) - quadrant_area(X0, Y1, r) -
                        quadrant_area(X1, Y0, r) + quadrant_area(X0, Y0, r);
    return std::clamp(area, 0.0, (x1 - x0) * (y1 - y0));
}

Space Space::weighted_interval(const std::vector<double>& breakpoints,
                               const std::vector<double>& weights, std::size_t n_cells) {
    if (n_cells < 2) throw InvalidArgument("weighted_interval: need at least 2 cells");
    if (breakpoints.size() < 2 || weights.size() + 1 != breakpoints.size())
        throw InvalidArgument("weighted_interval: need one weight per piece");
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
        throw InvalidArgument("weighted_interval: breakpoints must span [0,1]");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw InvalidArgument("weighted_interval: breakpoints must be strictly ascending");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidArgument("weighted_interval: weights must be positive");

    const double h = 1.0 / static_cast<double>(n_cells);
    std::vector<double> edges;
    edges.reserve(n_cells + breakpoints.size() + 1);
    std::size_t b = 1;  // next interior breakpoint
    for (std::size_t j = 0; j <= n_cells; ++j) {
        const double e = (j == n_cells) ? 1.0 : static_cast<double>(j) * h;
        while (b + 1 < breakpoints.size() && breakpoints[b] < e - kSnapFraction * h) {
            edges.push_back(breakpoints[b]);
            ++b;
        }
        if (b + 1 < breakpoints.size() && std::abs(breakpoints[b] - e) <= kSnapFraction * h) {
            edges.push_back(breakpoints[b]);
            ++b;
            continue;
        }
        edges.push_back(e);
    }

    Space s;
    s.kind_ = SpaceKind::Interval;
    const std::size_t n = edges.size() - 1;
    s.coords_.resize(n);
    s.mass_.resize(n);
    s.density_.resize(n);
    s.cum_.resize(n + 1);
    s.cum_[0] = 0.0;
    std::size_t piece = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double mid = 0.5 * (edges[k] + edges[k + 1]);
        while (piece + 1 < weights.size() && mid > breakpoints[piece + 1]) ++piece;
        s.coords_[k] = mid;
        s.density_[k] = weights[piece];
        s.mass_[k] = weights[piece] * (edges[k + 1] - edges[k]);
        s.cum_[k + 1] = s.cum_[k] + s.mass_[k];
    }
    s.total_mass_ = s.cum_[n];
    s.edges_ = std::move(edges);
    return s;
}

Space Space::planar_grid(std::size_t nx, std::size_t ny) {
    if (nx < 2 || ny < 2) throw InvalidArgument("planar_grid: need at least 2 cells per axis");
    Space s;
    s.kind_ = SpaceKind::Planar;
    s.nx_ = nx;
    s.ny_ = ny;
    s.hx_ = 1.0 / static_cast<double>(nx);
    s.hy_ = 1.0 / static_cast<double>(ny);
    const double m = 1.0 / static_cast<double>(nx * ny);
    s.mass_.assign(nx * ny, m);
    s.density_.assign(nx * ny, 1.0);
    s.total_mass_ = 1.0;
    return s;
}

Point Space::node(std::size_t k) const {
    if (kind_ == SpaceKind::Interval) return {coords_[k], 0.0};
    const std::size_t ix = k % nx_, iy = k / nx_;
    return {(static_cast<double>(ix) + 0.5) * hx_, (static_cast<double>(iy) + 0.5) * hy_};
}

double Space::diameter() const { return kind_ == SpaceKind::Interval ? 1.0 : std::sqrt(2.0); }

double Space::distance(const Point& a, const Point& b) const {
    if (kind_ == SpaceKind::Interval) return std::abs(a[0] - b[0]);
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

double Space::max_spacing() const {
    if (kind_ == SpaceKind::Planar) return std::max(hx_, hy_);
    double h = 0.0;
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k) h = std::max(h, edges_[k + 1] - edges_[k]);
    return h;
}

std::size_t Space::locate(double x) const {
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const std::ptrdiff_t k = (it - edges_.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(size()) - 1));
}

double Space::cumulative_mass(double x) const {
    if (x <= edges_.front()) return 0.0;
    if (x >= edges_.back()) return total_mass_;
    const std::size_t k = locate(x);
    return cum_[k] + density_[k] * (x - edges_[k]);
}

IndexRange Space::interval_neighbors(double c, double r) const {
    const auto lo = std::partition_point(coords_.begin(), coords_.end(),
                                         [&](double x) { return !(c - x < r); });
    const auto hi = std::partition_point(lo, coords_.end(), [&](double x) { return x - c < r; });
    return {static_cast<std::size_t>(lo - coords_.begin()), static_cast<std::size_t>(hi - coords_.begin())};
}

double Space::ball_measure(const Point& center, double r) const {
    if (!(r > 0.0)) throw InvalidArgument("ball_measure: radius must be positive");
    if (kind_ == SpaceKind::Interval) return cumulative_mass(center[0] + r) - cumulative_mass(center[0] - r);
    return disc_rect_area(center[0], center[1], r, 0.0, 1.0, 0.0, 1.0);
}

double Space::cell_ball_overlap(std::size_t k, const Point& center, double r) const {
    if (kind_ == SpaceKind::Interval) {
        const double len = std::min(edges_[k + 1], center[0] + r) - std::max(edges_[k], center[0] - r);
        return len > 0.0 ? density_[k] * len : 0.0;
    }
    const std::size_t ix = k % nx_, iy = k / nx_;
    const double x0 = static_cast<double>(ix) * hx_, y0 = static_cast<double>(iy) * hy_;
    return disc_rect_area(center[0], center[1], r, x0, x0 + hx_, y0, y0 + hy_);
}

std::vector<std::size_t> Space::neighbors_within(std::size_t center, double r) const {
    std::vector<std::size_t> out;
    if (!(r > 0.0)) return out;
    const Point c = node(center);
    if (kind_ == SpaceKind::Interval) {
        const IndexRange range = interval_neighbors(c[0], r);
        for (std::size_t k = range.begin; k < range.end; ++k)
            if (k != center) out.push_back(k);
        return out;
    }
    const auto clamp_index = [](double v, std::size_t n) {
        if (v < 0.0) return std::size_t{0};
        return std::min(static_cast<std::size_t>(v), n - 1);
    };
    const std::size_t iy0 = clamp_index((c[1] - r) / hy_ - 1.0, ny_), iy1 = clamp_index((c[1] + r) / hy_ + 1.0, ny_);
    const std::size_t ix0 = clamp_index((c[0] - r) / hx_ - 1.0, nx_), ix1 = clamp_index((c[0] + r) / hx_ + 1.0, nx_);
    for (std::size_t iy = iy0; iy <= iy1; ++iy)
        for (std::size_t ix = ix0; ix <= ix1; ++ix) {
            const std::size_t k = index(ix, iy);
            if (k != center && distance(node(k), c) < r) out.push_back(k);
        }
    return out;
}

// ============================================================================
// Audits
// ============================================================================

namespace {

std::vector<double> radius_ladder(const Space& space) {
    std::vector<double> radii;
    const double top = 0.5 * space.diameter();
    const double step = std::pow(2.0, 0.25);
    for (double r = 2.0 * space.max_spacing(); r <= top; r *= step) radii.push_back(r);
    if (radii.empty() || radii.back() < top) radii.push_back(top);
    return radii;
}

std::vector<std::size_t> strided(const std::vector<std::size_t>& pool, std::size_t max_centers) {
    if (pool.size() <= max_centers || max_centers < 2) return pool;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < max_centers; ++i)
        out.push_back(pool[(i * (pool.size() - 1)) / (max_centers - 1)]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

RadiusSample default_sample(const Space& space, std::size_t max_centers) {
    return interior_sample(space, 0.0, max_centers);
}

RadiusSample interior_sample(const Space& space, double margin, std::size_t max_centers) {
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < space.size(); ++k) {
        const Point p = space.node(k);
        bool inside = p[0] >= margin && p[0] <= 1.0 - margin;
        if (space.dim() == 2) inside = inside && p[1] >= margin && p[1] <= 1.0 - margin;
        if (inside) pool.push_back(k);
    }
    RadiusSample s;
    s.centers = strided(pool, max_centers);
    s.radii = radius_ladder(space);
    if (margin > 0.0) {
        std::erase_if(s.radii, [&](double r) { return 2.0 * r > margin; });
    }
    return s;
}

DoublingEstimate audit_doubling(const Space& space, const RadiusSample& sample) {
    if (sample.centers.empty() || sample.radii.empty()) throw InvalidArgument("audit_doubling: empty sample");
    DoublingEstimate est;
    const double top = 0.5 * space.diameter();
    for (std::size_t c : sample.centers)
        for (double r : sample.radii) {
            if (!(r > 0.0) || r > top) continue;
            const double ratio = space.ball_measure(c, 2.0 * r) / space.ball_measure(c, r);
            ++est.pairs;
            if (ratio > est.C_d) {
                est.C_d = ratio;
                est.worst_center = c;
                est.worst_radius = r;
            }
        }
    if (est.pairs == 0) throw InvalidArgument("audit_doubling: no admissible radii");
    return est;
}

namespace {

struct MassPair {
    double log_scale;  // log(r/R)
    double log_ratio;  // log(mu(B_r)/mu(B_R))
};

std::vector<MassPair> mass_pairs(const Space& space, const RadiusSample& sample) {
    std::vector<double> radii;
    for (double r : sample.radii)
        if (r > 0.0 && r < 0.5 * space.diameter()) radii.push_back(r);
    std::sort(radii.begin(), radii.end());
    std::vector<MassPair> pairs;
    std::vector<double> measures(radii.size());
    for (std::size_t c : sample.centers) {
        for (std::size_t a = 0; a < radii.size(); ++a) measures[a] = space.ball_measure(c, radii[a]);
        for (std::size_t a = 0; a < radii.size(); ++a)
            for (std::size_t b = a + 1; b < radii.size(); ++b)
                pairs.push_back({std::log(radii[a] / radii[b]), std::log(measures[a] / measures[b])});
    }
    return pairs;
}

}  // namespace

MassBoundFit audit_upper_mass_bound(const Space& space, const RadiusSample& sample) {
    const std::vector<MassPair> pairs = mass_pairs(space, sample);
    if (pairs.size() < 2) throw InvalidArgument("audit_upper_mass_bound: degenerate sample");
    double mx = 0.0, my = 0.0;
    for (const auto& p : pairs) {
        mx += p.log_scale;
        my += p.log_ratio;
    }
    mx /= static_cast<double>(pairs.size());
    my /= static_cast<double>(pairs.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pairs) {
        sxx += (p.log_scale - mx) * (p.log_scale - mx);
        sxy += (p.log_scale - mx) * (p.log_ratio - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("audit_upper_mass_bound: degenerate sample");
    MassBoundFit fit;
    fit.sigma = sxy / sxx;
    const double log_c_ls = my - fit.sigma * mx;
    double worst_env = -INFINITY, worst_ls = -INFINITY;
    for (const auto& p : pairs) {
        const double excess = p.log_ratio - fit.sigma * p.log_scale;
        worst_env = std::max(worst_env, excess);
        worst_ls = std::max(worst_ls, excess - log_c_ls);
    }
    fit.C0 = std::exp(worst_env);
    fit.residual = std::max(0.0, std::expm1(worst_ls));
    fit.pairs = pairs.size();
    return fit;
}

double mass_bound_violation(const Space& space, const RadiusSample& sample, double C0, double sigma) {
    double worst = 0.0;
    for (const auto& p : mass_pairs(space, sample)) {
        const double bound = C0 * std::exp(sigma * p.log_scale);
        worst = std::max(worst, std::exp(p.log_ratio) / bound - 1.0);
    }
    return worst;
}

AhlforsEstimate audit_ahlfors(const Space& space, double Q, const RadiusSample& sample) {
    if (!(Q >= 1.0)) throw InvalidArgument("audit_ahlfors: exponent must be at least 1");
    if (sample.centers.empty() || sample.radii.empty()) throw InvalidArgument("audit_ahlfors: empty sample");
    AhlforsEstimate est;
    est.Q = Q;
    for (std::size_t c : sample.centers)
        for (double r : sample.radii) {
            if (!(r > 0.0)) continue;
            const double m = space.ball_measure(c, r);
            const double rq = std::pow(r, Q);
            est.C_A = std::max({est.C_A, m / rq, rq / m});
            ++est.pairs;
        }
    return est;
}

}  // namespace bbmlab
