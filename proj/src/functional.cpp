#include "bbmlab/functional.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "bbmlab/summation.hpp"

namespace bbmlab {

std::string to_string(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::I: return "I";
        case FunctionalKind::Psi: return "Psi";
        case FunctionalKind::Phi: return "Phi";
        case FunctionalKind::Lambda: return "Lambda";
    }
    return "?";
}

std::string to_string(LambdaAnchor anchor) {
    switch (anchor) {
        case LambdaAnchor::XBall: return "x-ball";
        case LambdaAnchor::YBall: return "y-ball";
        case LambdaAnchor::AhlforsPower: return "ahlfors-power";
    }
    return "?";
}

LambdaAnchor parse_anchor(const std::string& name) {
    for (auto a : {LambdaAnchor::XBall, LambdaAnchor::YBall, LambdaAnchor::AhlforsPower})
        if (to_string(a) == name) return a;
    throw InvalidArgument("unknown anchor '" + name + "'");
}

double circle_moment(double e) {
    return std::tgamma(0.5 * (e + 1.0)) / (std::sqrt(std::numbers::pi) * std::tgamma(0.5 * e + 1.0));
}

namespace {

constexpr std::size_t kBlockRows = 1024;

// ----------------------------------------------------------------------------
// Powers
// ----------------------------------------------------------------------------

template <int TwoE>
inline double half_pow(double t) {
    if constexpr (TwoE == 0) {
        return 1.0;
    } else if constexpr (TwoE % 2 == 0) {
        double r = t;
        for (int k = 1; k < TwoE / 2; ++k) r *= t;
        return r;
    } else {
        double r = std::sqrt(t);
        for (int k = 0; k < TwoE / 2; ++k) r *= t;
        return r;
    }
}

template <int TwoE>
double weighted_power_sum(const double* t, const double* w, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += w[i + l] * half_pow<TwoE>(t[i + l]);
    double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (; i < n; ++i) s += w[i] * half_pow<TwoE>(t[i]);
    return s;
}

double weighted_power_sum_generic(const double* t, const double* w, std::size_t n, double e) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += w[i + l] * std::pow(t[i + l], e);
    double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (; i < n; ++i) s += w[i] * std::pow(t[i], e);
    return s;
}

// Index of e in the half-integer fast paths, or -1.
int half_index(double e) {
    const double twice = 2.0 * e;
    if (twice >= 0.0 && twice <= 16.0 && twice == std::floor(twice)) return static_cast<int>(twice);
    return -1;
}

double weighted_power_sum(const double* t, const double* w, std::size_t n, double e, int fast) {
    switch (fast) {
        case 0: return weighted_power_sum<0>(t, w, n);
        case 1: return weighted_power_sum<1>(t, w, n);
        case 2: return weighted_power_sum<2>(t, w, n);
        case 3: return weighted_power_sum<3>(t, w, n);
        case 4: return weighted_power_sum<4>(t, w, n);
        case 5: return weighted_power_sum<5>(t, w, n);
        case 6: return weighted_power_sum<6>(t, w, n);
        case 7: return weighted_power_sum<7>(t, w, n);
        case 8: return weighted_power_sum<8>(t, w, n);
        default: return weighted_power_sum_generic(t, w, n, e);
    }
}

double power(double x, double e) {
    switch (half_index(e)) {
        case 0: return 1.0;
        case 1: return std::sqrt(x);
        case 2: return x;
        case 3: return x * std::sqrt(x);
        case 4: return x * x;
        case 6: return x * x * x;
        case 8: return (x * x) * (x * x);
        default: return std::pow(x, e);
    }
}

double take_root(double s, double root) {
    if (root == 1.0) return s;
    if (root == 2.0) return std::sqrt(s);
    return std::pow(s, 1.0 / root);
}

// ----------------------------------------------------------------------------
// Deterministic block driver
// ----------------------------------------------------------------------------

struct Scratch {
    std::vector<double> t, w, d;
    std::vector<double> S;
};

struct BlockResult {
    std::vector<CompensatedSum> sums;
    std::vector<double> maxes;
    std::size_t pairs = 0;
};

// Calls row(y, scratch, pairs) which fills scratch.S with one value per channel.
template <class RowFn>
ChannelSums drive(const Space& space, const std::vector<std::size_t>& rows, const std::vector<double>& roots,
                  unsigned workers, RowFn row) {
    const std::size_t n_channels = roots.size();
    const std::size_t n_blocks = (rows.size() + kBlockRows - 1) / kBlockRows;
    std::vector<BlockResult> blocks(n_blocks);
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        Scratch scratch;
        scratch.S.assign(n_channels, 0.0);
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) break;
            BlockResult& out = blocks[b];
            out.sums.assign(n_channels, CompensatedSum());
            out.maxes.assign(n_channels, 0.0);
            const std::size_t end = std::min(rows.size(), (b + 1) * kBlockRows);
            for (std::size_t i = b * kBlockRows; i < end; ++i) {
                const std::size_t y = rows[i];
                std::fill(scratch.S.begin(), scratch.S.end(), 0.0);
                row(y, scratch, out.pairs);
                for (std::size_t c = 0; c < n_channels; ++c) {
                    out.sums[c].add(space.cell_mass(y) * take_root(scratch.S[c], roots[c]));
                    out.maxes[c] = std::max(out.maxes[c], scratch.S[c]);
                }
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_blocks, 1))));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    ChannelSums out;
    out.channels.resize(n_channels);
    std::vector<CompensatedSum> total(n_channels);
    for (const auto& blk : blocks) {
        for (std::size_t c = 0; c < n_channels; ++c) {
            total[c].add(blk.sums[c]);
            out.channels[c].row_max = std::max(out.channels[c].row_max, blk.maxes[c]);
        }
        out.pairs += blk.pairs;
    }
    for (std::size_t c = 0; c < n_channels; ++c) out.channels[c].outer_sum = total[c].value();
    out.rows = rows.size();
    CompensatedSum mass;
    for (std::size_t y : rows) mass.add(space.cell_mass(y));
    out.outer_mass = mass.value();
    return out;
}

std::vector<std::size_t> outer_rows(const Space& space, const Region& outer) {
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (outer.contains(space.node(k), space.dim())) rows.push_back(k);
    return rows;
}

// Nodes of an interval space inside [x0, x1], as an index range.
IndexRange inner_range_1d(const Space& space, const Region& inner) {
    const auto& c = space.coords();
    const auto lo = std::lower_bound(c.begin(), c.end(), inner.x0);
    const auto hi = std::upper_bound(lo, c.end(), inner.x1);
    return {static_cast<std::size_t>(lo - c.begin()), static_cast<std::size_t>(hi - c.begin())};
}

// Column and row index ranges of the grid nodes inside a region.
struct GridRange {
    std::size_t x0, x1, y0, y1;
};

GridRange inner_range_2d(const Space& space, const Region& inner) {
    auto span = [](double a, double b, double h, std::size_t n) {
        std::size_t lo = n, hi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = (static_cast<double>(i) + 0.5) * h;
            if (c >= a && c <= b) {
                lo = std::min(lo, i);
                hi = i + 1;
            }
        }
        if (lo > hi) lo = hi = 0;
        return std::pair{lo, hi};
    };
    const auto [x0, x1] = span(inner.x0, inner.x1, space.hx(), space.nx());
    const auto [y0, y1] = span(inner.y0, inner.y1, space.hy(), space.ny());
    return {x0, x1, y0, y1};
}

bool node_in(const Space& space, const Region& region, std::size_t k) {
    return region.contains(space.node(k), space.dim());
}

// First index of the maximal run of equal values containing each node.
std::vector<std::size_t> constant_runs(const std::vector<double>& v) {
    std::vector<std::size_t> start(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) start[k] = (k > 0 && v[k] == v[k - 1]) ? start[k - 1] : k;
    return start;
}

struct ChannelPlan {
    std::vector<double> exponents;
    std::vector<int> fast;
    std::vector<double> self_factor;  // c_e
    bool has_zero = false;
};

ChannelPlan plan_channels(const std::vector<Channel>& channels, int dim) {
    ChannelPlan plan;
    for (const auto& ch : channels) {
        if (!(ch.exponent >= 0.0) || !(ch.root > 0.0)) throw InvalidArgument("channel: need exponent >= 0 and root > 0");
        plan.exponents.push_back(ch.exponent);
        plan.fast.push_back(half_index(ch.exponent));
        plan.self_factor.push_back(dim == 1 ? 1.0 : circle_moment(ch.exponent));
        plan.has_zero = plan.has_zero || ch.exponent == 0.0;
    }
    return plan;
}

void finish_row(const ChannelPlan& plan, Scratch& s, std::size_t n, double g, double sigma) {
    for (std::size_t c = 0; c < plan.exponents.size(); ++c) {
        const double e = plan.exponents[c];
        const double self = sigma > 0.0 ? plan.self_factor[c] * (e == 0.0 ? 1.0 : power(g, e)) * sigma : 0.0;
        s.S[c] = weighted_power_sum(s.t.data(), s.w.data(), n, e, plan.fast[c]) + self;
    }
}

// Balls and coefficients whose indicator combination gives the kernel shape.
struct BallStack {
    std::vector<double> radii;
    std::vector<double> coef;
};

BallStack ball_stack(const MollifierSpec& k) {
    BallStack b;
    if (k.step_profile()) {
        for (std::size_t i = 0; i < k.radii.size(); ++i) {
            const double next = i + 1 < k.heights.size() ? k.heights[i + 1] : 0.0;
            b.radii.push_back(k.radii[i]);
            b.coef.push_back(k.heights[i] - next);
        }
    } else {
        b.radii.push_back(k.r);
        b.coef.push_back(1.0);
    }
    return b;
}

double interval_overlap(const Space& space, std::size_t x, double c, double r) {
    const double len = std::min(space.cell_hi(x), c + r) - std::max(space.cell_lo(x), c - r);
    return len > 0.0 ? space.density(x) * len : 0.0;
}

// ----------------------------------------------------------------------------
// Interval rows
// ----------------------------------------------------------------------------

ChannelSums channels_1d_window(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                               const std::vector<Channel>& channels, const EvalOptions& opt) {
    const ChannelPlan plan = plan_channels(channels, 1);
    const BallStack balls = ball_stack(kernel);
    const IndexRange inner = inner_range_1d(space, opt.domain.inner);
    const std::vector<std::size_t> runs = constant_runs(f.values);
    const double R = kernel.support();
    const bool is_power = kernel.family == MollifierFamily::WindowPower;
    const int q_fast = half_index(kernel.q);
    const auto& xs = space.coords();
    const auto& fv = f.values;
    std::vector<double> roots;
    for (const auto& ch : channels) roots.push_back(ch.root);

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const double c = xs[y];
        const std::size_t a = space.locate(c - R), b = space.locate(c + R);
        const std::size_t lo = std::max(a, inner.begin), hi = std::min(b + 1, inner.end);
        if (lo >= hi) return;
        const std::size_t n = hi - lo;
        const bool self_inner = y >= lo && y < hi;
        pairs += n - (self_inner ? 1 : 0);
        const double g = f.derivative(y);
        if (!plan.has_zero && g == 0.0 && runs[hi - 1] <= lo && fv[y] == fv[lo]) return;

        s.t.resize(n);
        s.w.assign(n, 0.0);
        for (std::size_t k = 0; k < balls.radii.size(); ++k) {
            const double rk = balls.radii[k], ck = balls.coef[k];
            if (ck == 0.0) continue;
            const std::size_t ak = space.locate(c - rk), bk = space.locate(c + rk);
            const std::size_t full_lo = std::max(ak + 1, lo), full_hi = std::min(bk, hi);
            for (std::size_t x = full_lo; x < full_hi; ++x) s.w[x - lo] += ck * space.cell_mass(x);
            if (ak >= lo && ak < hi) s.w[ak - lo] += ck * interval_overlap(space, ak, c, rk);
            if (bk != ak && bk >= lo && bk < hi) s.w[bk - lo] += ck * interval_overlap(space, bk, c, rk);
        }
        const double fy = fv[y];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t x = lo + i;
            s.t[i] = std::abs(fv[x] - fy) / std::abs(xs[x] - c);
        }
        double sigma = 0.0;
        if (self_inner) {
            sigma = s.w[y - lo];
            s.w[y - lo] = 0.0;
            s.t[y - lo] = 0.0;
        }
        const double norm = kernel.ball_normalized() ? 1.0 / space.ball_measure(y, kernel.r) : 1.0;
        if (is_power) {
            const double inv_r = 1.0 / kernel.r;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = std::abs(xs[lo + i] - c) * inv_r;
                s.w[i] *= norm * (q_fast >= 0 ? power(u, kernel.q) : std::pow(u, kernel.q));
            }
            if (self_inner) {
                const double half = std::min(0.5 * (space.cell_hi(y) - space.cell_lo(y)), kernel.r);
                sigma = space.density(y) * 2.0 * std::pow(half, kernel.q + 1.0) /
                        ((kernel.q + 1.0) * std::pow(kernel.r, kernel.q));
            }
        } else if (norm != 1.0) {
            for (std::size_t i = 0; i < n; ++i) s.w[i] *= norm;
        }
        sigma *= norm;
        finish_row(plan, s, n, g, sigma);
    };
    return drive(space, outer_rows(space, opt.domain.outer), roots, opt.workers, row);
}

ChannelSums channels_1d_fractional(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                                   const std::vector<Channel>& channels, const EvalOptions& opt) {
    const ChannelPlan plan = plan_channels(channels, 1);
    const IndexRange inner = inner_range_1d(space, opt.domain.inner);
    const double expo = kernel.p * (1.0 - kernel.s);
    const auto& xs = space.coords();
    std::vector<double> roots;
    for (const auto& ch : channels) roots.push_back(ch.root);

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const double c = xs[y];
        const std::size_t n = inner.size();
        s.t.assign(n, 0.0);
        s.w.assign(n, 0.0);
        bool self_inner = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t x = inner.begin + i;
            if (x == y) {
                self_inner = true;
                continue;
            }
            const double d = std::abs(xs[x] - c);
            s.t[i] = std::abs(f.values[x] - f.values[y]) / d;
            s.w[i] = space.cell_mass(x) * (1.0 - kernel.s) * std::pow(d, expo) / space.ball_measure(y, d);
            ++pairs;
        }
        const double half = 0.5 * (space.cell_hi(y) - space.cell_lo(y));
        const double sigma = self_inner ? std::pow(half, expo) / kernel.p : 0.0;
        finish_row(plan, s, n, f.derivative(y), sigma);
    };
    return drive(space, outer_rows(space, opt.domain.outer), roots, opt.workers, row);
}

// ----------------------------------------------------------------------------
// Grid rows
// ----------------------------------------------------------------------------

struct StencilRow {
    int dy = 0;
    int dx0 = 0;  // first offset
    std::vector<double> w, inv_d;
};

ChannelSums channels_2d_window(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                               const std::vector<Channel>& channels, const EvalOptions& opt) {
    const ChannelPlan plan = plan_channels(channels, 2);
    const BallStack balls = ball_stack(kernel);
    const double hx = space.hx(), hy = space.hy();
    const double R = kernel.support();
    const int Kx = static_cast<int>(std::ceil(R / hx)) + 1, Ky = static_cast<int>(std::ceil(R / hy)) + 1;
    const bool is_power = kernel.family == MollifierFamily::WindowPower;

    // Kernel integrated over each offset cell, before per-row normalization.
    std::vector<StencilRow> stencil;
    double self_overlap = 0.0;
    for (int dy = -Ky; dy <= Ky; ++dy) {
        StencilRow sr;
        sr.dy = dy;
        std::vector<double> w, inv;
        int first = 0, last = -1;
        for (int dx = -Kx; dx <= Kx; ++dx) {
            const double x0 = (dx - 0.5) * hx, y0 = (dy - 0.5) * hy;
            double v = 0.0;
            for (std::size_t k = 0; k < balls.radii.size(); ++k)
                v += balls.coef[k] * disc_rect_area(0.0, 0.0, balls.radii[k], x0, x0 + hx, y0, y0 + hy);
            const double d = std::hypot(dx * hx, dy * hy);
            if (dx == 0 && dy == 0) {
                self_overlap = v;
                v = 0.0;
            } else if (is_power) {
                v *= std::pow(d / kernel.r, kernel.q);
            }
            w.push_back(v);
            inv.push_back(d > 0.0 ? 1.0 / d : 0.0);
            if (v > 0.0 || (dx == 0 && dy == 0 && self_overlap > 0.0)) {
                if (last < first) first = dx + Kx;
                last = dx + Kx;
            }
        }
        if (last < first) continue;
        sr.dx0 = first - Kx;
        sr.w.assign(w.begin() + first, w.begin() + last + 1);
        sr.inv_d.assign(inv.begin() + first, inv.begin() + last + 1);
        stencil.push_back(std::move(sr));
    }
    double self_mass = self_overlap;
    if (is_power) {
        const double a = std::min(std::sqrt(hx * hy / std::numbers::pi), kernel.r);
        self_mass = 2.0 * std::numbers::pi * std::pow(a, kernel.q + 2.0) / ((kernel.q + 2.0) * std::pow(kernel.r, kernel.q));
    }

    const GridRange inner = inner_range_2d(space, opt.domain.inner);
    const std::size_t nx = space.nx();
    const auto& fv = f.values;
    std::vector<double> roots;
    for (const auto& ch : channels) roots.push_back(ch.root);

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const long ix = static_cast<long>(y % nx), iy = static_cast<long>(y / nx);
        const double fy = fv[y];
        s.t.clear();
        s.w.clear();
        bool self_inner = false;
        for (const auto& sr : stencil) {
            const long yy = iy + sr.dy;
            if (yy < static_cast<long>(inner.y0) || yy >= static_cast<long>(inner.y1)) continue;
            const long len = static_cast<long>(sr.w.size());
            const long j0 = std::max<long>(0, static_cast<long>(inner.x0) - (ix + sr.dx0));
            const long j1 = std::min<long>(len, static_cast<long>(inner.x1) - (ix + sr.dx0));
            if (j0 >= j1) continue;
            const std::size_t base = static_cast<std::size_t>(yy) * nx + static_cast<std::size_t>(ix + sr.dx0);
            const std::size_t off = s.t.size();
            s.t.resize(off + static_cast<std::size_t>(j1 - j0));
            s.w.resize(off + static_cast<std::size_t>(j1 - j0));
            for (long j = j0; j < j1; ++j) {
                const std::size_t o = off + static_cast<std::size_t>(j - j0);
                s.t[o] = std::abs(fv[base + static_cast<std::size_t>(j)] - fy) * sr.inv_d[static_cast<std::size_t>(j)];
                s.w[o] = sr.w[static_cast<std::size_t>(j)];
            }
            pairs += static_cast<std::size_t>(j1 - j0);
            if (sr.dy == 0 && -sr.dx0 >= j0 && -sr.dx0 < j1) {
                self_inner = true;
                --pairs;
            }
        }
        const double norm = kernel.ball_normalized() ? 1.0 / space.ball_measure(y, kernel.r) : 1.0;
        if (norm != 1.0)
            for (double& w : s.w) w *= norm;
        finish_row(plan, s, s.t.size(), f.derivative(y), self_inner ? self_mass * norm : 0.0);
    };
    return drive(space, outer_rows(space, opt.domain.outer), roots, opt.workers, row);
}

ChannelSums channels_2d_fractional(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                                   const std::vector<Channel>& channels, const EvalOptions& opt) {
    const ChannelPlan plan = plan_channels(channels, 2);
    const double expo = kernel.p * (1.0 - kernel.s);
    std::vector<std::size_t> inner;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (node_in(space, opt.domain.inner, k)) inner.push_back(k);
    std::vector<double> roots;
    for (const auto& ch : channels) roots.push_back(ch.root);
    const double a = std::sqrt(space.hx() * space.hy() / std::numbers::pi);

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const Point py = space.node(y);
        s.t.assign(inner.size(), 0.0);
        s.w.assign(inner.size(), 0.0);
        bool self_inner = false;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            const std::size_t x = inner[i];
            if (x == y) {
                self_inner = true;
                continue;
            }
            const double d = space.distance(space.node(x), py);
            s.t[i] = std::abs(f.values[x] - f.values[y]) / d;
            s.w[i] = space.cell_mass(x) * (1.0 - kernel.s) * std::pow(d, expo) / space.ball_measure(py, d);
            ++pairs;
        }
        finish_row(plan, s, inner.size(), f.derivative(y), self_inner ? 2.0 * std::pow(a, expo) / kernel.p : 0.0);
    };
    return drive(space, outer_rows(space, opt.domain.outer), roots, opt.workers, row);
}

// ----------------------------------------------------------------------------
// Lambda rows
// ----------------------------------------------------------------------------

// mu([0, v)) with a cell cursor that moves monotonically between calls.
class MassCursor {
public:
    explicit MassCursor(const Space& space) : space_(space) {}
    double at(double v) {
        const auto& e = space_.edges();
        if (v <= e.front()) return 0.0;
        if (v >= e.back()) return space_.total_mass();
        while (k_ + 1 < space_.size() && e[k_ + 1] <= v) ++k_;
        while (k_ > 0 && e[k_] > v) --k_;
        return space_.cumulative_at_edge(k_) + space_.density(k_) * (v - e[k_]);
    }

private:
    const Space& space_;
    std::size_t k_ = 0;
};

ChannelSums lambda_1d(const Space& space, const SampledFunction& f, const LambdaParams& lp, const EvalOptions& opt) {
    const IndexRange inner = inner_range_1d(space, opt.domain.inner);
    const auto& xs = space.coords();
    const double dp = std::pow(lp.delta, lp.p);
    const double inv_delta = 1.0 / lp.delta;
    // Half-extent of |f(z) - f(x_k)| / delta across cell k.
    std::vector<double> spread(space.size());
    for (std::size_t k = 0; k < space.size(); ++k)
        spread[k] = f.derivative(k) * 0.5 * (space.cell_hi(k) - space.cell_lo(k)) * inv_delta;

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const double c = xs[y], fy = f.values[y];
        CompensatedSum sum;
        // Walk outward on each side so the cursors move monotonically.
        for (int side = 0; side < 2; ++side) {
            MassCursor near(space), far(space);
            const auto term = [&](std::size_t x) {
                const double d = std::abs(xs[x] - c);
                const double phibar = lp.phi.mean_abs((f.values[x] - fy) * inv_delta, spread[x]);
                if (phibar == 0.0) return 0.0;
                double norm = 0.0;
                switch (lp.anchor) {
                    case LambdaAnchor::AhlforsPower: norm = power(d, lp.Q); break;
                    case LambdaAnchor::YBall: norm = far.at(c + d) - near.at(c - d); break;
                    case LambdaAnchor::XBall: norm = far.at(xs[x] + d) - near.at(xs[x] - d); break;
                }
                return space.cell_mass(x) * dp * phibar / (norm * power(d, lp.p));
            };
            if (side == 0) {
                for (std::size_t x = std::max(y + 1, inner.begin); x < inner.end; ++x) {
                    sum.add(term(x));
                    ++pairs;
                }
            } else {
                for (std::size_t x = std::min(y, inner.end); x-- > inner.begin;) {
                    sum.add(term(x));
                    ++pairs;
                }
            }
        }
        s.S[0] = sum.value();
    };
    return drive(space, outer_rows(space, opt.domain.outer), {1.0}, opt.workers, row);
}

ChannelSums lambda_2d(const Space& space, const SampledFunction& f, const LambdaParams& lp, const EvalOptions& opt) {
    std::vector<std::size_t> inner;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (node_in(space, opt.domain.inner, k)) inner.push_back(k);
    const double dp = std::pow(lp.delta, lp.p);
    const double inv_delta = 1.0 / lp.delta;

    auto row = [&](std::size_t y, Scratch& s, std::size_t& pairs) {
        const Point py = space.node(y);
        const double fy = f.values[y];
        CompensatedSum sum;
        for (std::size_t x : inner) {
            if (x == y) continue;
            ++pairs;
            const double ph = lp.phi((f.values[x] - fy) * inv_delta);
            if (ph == 0.0) continue;
            const Point px = space.node(x);
            const double d = space.distance(px, py);
            double norm = 0.0;
            switch (lp.anchor) {
                case LambdaAnchor::AhlforsPower: norm = power(d, lp.Q); break;
                case LambdaAnchor::YBall: norm = space.ball_measure(py, d); break;
                case LambdaAnchor::XBall: norm = space.ball_measure(px, d); break;
            }
            sum.add(space.cell_mass(x) * dp * ph / (norm * power(d, lp.p)));
        }
        s.S[0] = sum.value();
    };
    return drive(space, outer_rows(space, opt.domain.outer), {1.0}, opt.workers, row);
}

}  // namespace

// ============================================================================
// Public entry points
// ============================================================================

ChannelSums evaluate_channels(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                              const std::vector<Channel>& channels, const EvalOptions& options) {
    if (f.size() != space.size()) throw InvalidArgument("evaluate_channels: function does not match the space");
    if (channels.empty()) throw InvalidArgument("evaluate_channels: no channels requested");
    if (kernel.step_profile() && kernel.dim != space.dim())
        throw InvalidArgument("evaluate_channels: radial profile dimension does not match the space");
    const bool planar = space.kind() == SpaceKind::Planar;
    if (kernel.family == MollifierFamily::Fractional)
        return planar ? channels_2d_fractional(space, f, kernel, channels, options)
                      : channels_1d_fractional(space, f, kernel, channels, options);
    return planar ? channels_2d_window(space, f, kernel, channels, options)
                  : channels_1d_window(space, f, kernel, channels, options);
}

namespace {

FunctionalValue make_value(FunctionalKind which, const ChannelSums& sums) {
    FunctionalValue v;
    v.which = which;
    v.pair_count = sums.pairs;
    v.diag_excluded = sums.rows;
    return v;
}

void check_p(double p) {
    if (!(p >= 1.0)) throw InvalidArgument("functional: p must be at least 1");
}

}  // namespace

FunctionalValue eval_I(const Space& space, const SampledFunction& f, double p, const MollifierSpec& kernel,
                       const EvalOptions& options) {
    check_p(p);
    const ChannelSums sums = evaluate_channels(space, f, kernel, {{p, 1.0}}, options);
    FunctionalValue v = make_value(FunctionalKind::I, sums);
    v.p = p;
    v.value = sums.channels[0].outer_sum;
    return v;
}

FunctionalValue eval_Psi(const Space& space, const SampledFunction& f, double p, double eps,
                         const MollifierSpec& kernel, const EvalOptions& options) {
    check_p(p);
    if (!(eps >= 0.0)) throw InvalidArgument("eval_Psi: eps must be nonnegative");
    const ChannelSums sums = evaluate_channels(space, f, kernel, {{p + eps, 1.0}}, options);
    FunctionalValue v = make_value(FunctionalKind::Psi, sums);
    v.p = p;
    v.eps = eps;
    v.value = functional_from_sum(FunctionalKind::Psi, p, eps, sums.channels[0].outer_sum);
    return v;
}

FunctionalValue eval_Phi(const Space& space, const SampledFunction& f, double p, double q,
                         const MollifierSpec& kernel, const EvalOptions& options) {
    check_p(p);
    if (!(q >= 1.0)) throw InvalidArgument("eval_Phi: q must be at least 1");
    const ChannelSums sums = evaluate_channels(space, f, kernel, {{p * q, q}}, options);
    FunctionalValue v = make_value(FunctionalKind::Phi, sums);
    v.p = p;
    v.q = q;
    v.value = sums.channels[0].outer_sum;
    return v;
}

FunctionalValue eval_Lambda(const Space& space, const SampledFunction& f, const LambdaParams& params,
                            const EvalOptions& options) {
    check_p(params.p);
    if (!(params.delta > 0.0)) throw InvalidArgument("eval_Lambda: delta must be positive");
    if (params.anchor == LambdaAnchor::AhlforsPower && !(params.Q > 0.0))
        throw InvalidArgument("eval_Lambda: ahlfors-power exponent must be positive");
    if (f.size() != space.size()) throw InvalidArgument("eval_Lambda: function does not match the space");
    const ChannelSums sums = space.kind() == SpaceKind::Interval ? lambda_1d(space, f, params, options)
                                                                 : lambda_2d(space, f, params, options);
    FunctionalValue v = make_value(FunctionalKind::Lambda, sums);
    v.p = params.p;
    v.delta = params.delta;
    v.value = sums.channels[0].outer_sum;
    return v;
}

std::vector<Channel> bound_channels(double p, double eps, double q) {
    return {{p, 1.0}, {p + eps, 1.0}, {q, 1.0}, {0.0, 1.0}};
}

BoundBundle assemble_bounds(double p, double eps, double q, const ChannelSums& sums, std::size_t first) {
    if (sums.channels.size() < first + 4) throw InvalidArgument("assemble_bounds: missing channels");
    const auto& ch = sums.channels;
    BoundBundle b;
    b.p = p;
    b.eps = eps;
    b.q = q;
    b.I_p = ch[first].outer_sum;
    b.Psi = std::pow(ch[first + 1].outer_sum, p / (p + eps));
    b.I_q = ch[first + 2].outer_sum;
    b.C_rho = ch[first + 3].row_max;
    b.outer_mass = sums.outer_mass;
    b.pairs = sums.pairs;
    b.holder.lhs = std::pow(b.C_rho * b.outer_mass, -eps / (p + eps)) * b.I_p;
    b.holder.rhs = b.Psi;
    const double a = (q - p - eps) * p / ((q - p) * (p + eps));
    const double c = eps * p / ((q - p) * (p + eps));
    b.interpolation.lhs = b.Psi;
    b.interpolation.rhs = std::pow(b.I_p, a) * std::pow(b.I_q, c);
    return b;
}

BoundBundle eval_bounds(const Space& space, const SampledFunction& f, double p, double eps, double q,
                        const MollifierSpec& kernel, const EvalOptions& options) {
    check_p(p);
    if (!(eps >= 0.0) || !(q > p + eps)) throw InvalidArgument("eval_bounds: need eps >= 0 and q > p + eps");
    return assemble_bounds(p, eps, q, evaluate_channels(space, f, kernel, bound_channels(p, eps, q), options));
}

Channel functional_channel(FunctionalKind kind, double p, double eps, double q) {
    switch (kind) {
        case FunctionalKind::I: return {p, 1.0};
        case FunctionalKind::Psi: return {p + eps, 1.0};
        case FunctionalKind::Phi: return {p * q, q};
        case FunctionalKind::Lambda: break;
    }
    throw InvalidArgument("functional_channel: the nonconvex functional has no kernel channel");
}

double functional_from_sum(FunctionalKind kind, double p, double eps, double outer_sum) {
    if (kind == FunctionalKind::Psi && eps != 0.0) return std::pow(outer_sum, p / (p + eps));
    return outer_sum;
}

}  // namespace bbmlab
