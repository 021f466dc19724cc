#include "bbmlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbmlab/functional.hpp"
#include "bbmlab/mollifier.hpp"
#include "bbmlab/summation.hpp"

namespace bbmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist_to_box(const Point& p, const Region& box, int dim) {
    const double dx = std::max({box.x0 - p[0], 0.0, p[0] - box.x1});
    if (dim == 1) return dx;
    const double dy = std::max({box.y0 - p[1], 0.0, p[1] - box.y1});
    return std::hypot(dx, dy);
}

// Distance from p to the part of the unit cell outside omega (inf if omega is everything).
double dist_to_complement(const Point& p, const Region& omega, int dim) {
    double d = kInf;
    if (omega.x0 > 0.0) d = std::min(d, p[0] - omega.x0);
    if (omega.x1 < 1.0) d = std::min(d, omega.x1 - p[0]);
    if (dim == 2) {
        if (omega.y0 > 0.0) d = std::min(d, p[1] - omega.y0);
        if (omega.y1 < 1.0) d = std::min(d, omega.y1 - p[1]);
    }
    return d;
}

// Gap between U and the complement of omega, per axis.
double separation(const Region& U, const Region& omega, int dim) {
    if (U.x0 < omega.x0 || U.x1 > omega.x1 || (dim == 2 && (U.y0 < omega.y0 || U.y1 > omega.y1)))
        throw InvalidArgument("build_cover: U must lie inside Omega");
    double d = kInf;
    if (omega.x0 > 0.0) d = std::min(d, U.x0 - omega.x0);
    if (omega.x1 < 1.0) d = std::min(d, omega.x1 - U.x1);
    if (dim == 2) {
        if (omega.y0 > 0.0) d = std::min(d, U.y0 - omega.y0);
        if (omega.y1 < 1.0) d = std::min(d, omega.y1 - U.y1);
    }
    return d;
}

// Centers within `radius` of node x (strictly), ascending by center index.
std::vector<std::size_t> centers_near(const Space& space, const Cover& cover, std::size_t x, double radius) {
    std::vector<std::size_t> out;
    const Point px = space.node(x);
    if (space.kind() == SpaceKind::Interval) {
        const auto& xs = space.coords();
        const auto lo = std::partition_point(cover.centers.begin(), cover.centers.end(),
                                             [&](std::size_t c) { return !(px[0] - xs[c] < radius); });
        for (auto it = lo; it != cover.centers.end() && xs[*it] - px[0] < radius; ++it)
            out.push_back(static_cast<std::size_t>(it - cover.centers.begin()));
        return out;
    }
    for (std::size_t j = 0; j < cover.centers.size(); ++j)
        if (space.distance(space.node(cover.centers[j]), px) < radius) out.push_back(j);
    return out;
}

double tent(const Space& space, const Cover& cover, std::size_t j, std::size_t x) {
    const double d = space.distance(cover.centers[j], x);
    return std::max(0.0, 1.0 - d / (2.0 * cover.s));
}

// Gradient of tent_j at node x (zero at the apex and outside the support).
Point tent_gradient(const Space& space, const Cover& cover, std::size_t j, std::size_t x) {
    const Point px = space.node(x), pc = space.node(cover.centers[j]);
    const double d = space.distance(px, pc);
    if (d <= 0.0 || d >= 2.0 * cover.s) return {0.0, 0.0};
    const double k = -1.0 / (2.0 * cover.s * d);
    return {k * (px[0] - pc[0]), space.dim() == 2 ? k * (px[1] - pc[1]) : 0.0};
}

}  // namespace

Cover build_cover(const Space& space, const Region& U, double s, const Region& omega) {
    const int dim = space.dim();
    if (!(s > 0.0)) throw InvalidArgument("build_cover: s must be positive");
    const double limit = omega.is_whole() ? space.diameter() : separation(U, omega, dim);
    if (!(s < limit / 10.0))
        throw InvalidArgument("build_cover: s = " + std::to_string(s) + " must stay below " + std::to_string(limit / 10.0));
    Cover cover;
    cover.s = s;
    cover.U = U;
    cover.omega = omega;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (dist_to_box(space.node(k), U, dim) < 5.0 * s) cover.neighborhood.push_back(k);

    std::vector<char> chosen(space.size(), 0);
    for (std::size_t k : cover.neighborhood) {
        bool separated = true;
        if (dim == 1) {
            separated = cover.centers.empty() || space.distance(cover.centers.back(), k) >= s;
        } else {
            for (std::size_t n : space.neighbors_within(k, s))
                if (chosen[n]) {
                    separated = false;
                    break;
                }
        }
        if (!separated) continue;
        chosen[k] = 1;
        if (dist_to_complement(space.node(k), omega, dim) < 5.0 * s) {
            ++cover.discarded;
            continue;
        }
        cover.centers.push_back(k);
    }
    if (cover.centers.empty()) throw InvalidArgument("build_cover: no admissible centers");

    std::vector<std::size_t> count(space.size(), 0);
    for (std::size_t c : cover.centers) {
        ++count[c];
        for (std::size_t n : space.neighbors_within(c, 5.0 * s)) ++count[n];
    }
    cover.overlap_bound = *std::max_element(count.begin(), count.end());
    return cover;
}

double PartitionOfUnity::value(const Space& space, std::size_t j, std::size_t x) const {
    if (!(tent_sum[x] > 0.0)) return 0.0;
    return tent(space, *cover, j, x) / tent_sum[x];
}

PartitionOfUnity build_pou(const Space& space, const Cover& cover) {
    PartitionOfUnity pou;
    pou.cover = &cover;
    pou.tent_sum.assign(space.size(), 0.0);
    const double reach = 2.0 * cover.s;
    for (std::size_t x = 0; x < space.size(); ++x)
        for (std::size_t j : centers_near(space, cover, x, reach)) pou.tent_sum[x] += tent(space, cover, j, x);

    const int dim = space.dim();
    for (std::size_t x = 0; x < space.size(); ++x) {
        const double S = pou.tent_sum[x];
        if (!(S > 0.0)) continue;
        const auto near = centers_near(space, cover, x, reach);
        Point gS{0.0, 0.0};
        for (std::size_t j : near) {
            const Point g = tent_gradient(space, cover, j, x);
            gS[0] += g[0];
            gS[1] += g[1];
        }
        double sum = 0.0;
        std::size_t support = 0;
        for (std::size_t j : near) {
            const double t = tent(space, cover, j, x);
            const Point g = tent_gradient(space, cover, j, x);
            const double gx = (g[0] * S - t * gS[0]) / (S * S), gy = (g[1] * S - t * gS[1]) / (S * S);
            pou.lip_const = std::max(pou.lip_const, std::hypot(gx, gy));
            sum += t / S;
            if (t > 0.0) ++support;
        }
        if (cover.U.contains(space.node(x), dim)) {
            if (support == 0) throw InvalidArgument("build_pou: partition degenerates inside U");
            pou.max_sum_error = std::max(pou.max_sum_error, std::abs(sum - 1.0));
            pou.max_support_count = std::max(pou.max_support_count, support);
        }
    }
    for (std::size_t x : cover.U.is_whole() ? std::vector<std::size_t>{} : cover.neighborhood)
        if (cover.U.contains(space.node(x), dim) && !(pou.tent_sum[x] > 0.0))
            throw InvalidArgument("build_pou: partition degenerates inside U");

    if (space.kind() == SpaceKind::Interval) {
        for (std::size_t x = 0; x + 1 < space.size(); ++x) {
            if (!(pou.tent_sum[x] > 0.0) || !(pou.tent_sum[x + 1] > 0.0)) continue;
            const double d = space.distance(x, x + 1);
            auto near = centers_near(space, cover, x, reach);
            const auto more = centers_near(space, cover, x + 1, reach);
            near.insert(near.end(), more.begin(), more.end());
            for (std::size_t j : near)
                pou.lip_adjacent = std::max(pou.lip_adjacent, std::abs(pou.value(space, j, x + 1) - pou.value(space, j, x)) / d);
        }
    }
    return pou;
}

Convolution discrete_convolution(const Space& space, const SampledFunction& f, const Cover& cover,
                                 const PartitionOfUnity& pou) {
    Convolution out;
    for (std::size_t c : cover.centers) out.ball_means.push_back(ball_average(space, f, space.node(c), cover.s));
    const std::size_t n = space.size();
    out.h.values = f.values;
    out.h.grad_x.assign(n, 0.0);
    if (space.dim() == 2) out.h.grad_y.assign(n, 0.0);
    out.lip.assign(n, 0.0);
    const double reach = 2.0 * cover.s;
    for (std::size_t x = 0; x < n; ++x) {
        const double S = pou.tent_sum[x];
        if (!(S > 0.0)) continue;
        const auto near = centers_near(space, cover, x, reach);
        double h = 0.0;
        for (std::size_t j : near) h += out.ball_means[j] * tent(space, cover, j, x);
        h /= S;
        Point g{0.0, 0.0};
        for (std::size_t j : near) {
            const Point gt = tent_gradient(space, cover, j, x);
            g[0] += (out.ball_means[j] - h) * gt[0] / S;
            g[1] += (out.ball_means[j] - h) * gt[1] / S;
        }
        out.h.values[x] = h;
        out.h.grad_x[x] = g[0];
        if (space.dim() == 2) out.h.grad_y[x] = g[1];
        out.lip[x] = std::hypot(g[0], g[1]);
    }
    CompensatedSum l1;
    for (std::size_t x = 0; x < n; ++x) {
        if (!cover.U.contains(space.node(x), space.dim())) continue;
        const double e = std::abs(out.h.values[x] - f.values[x]);
        l1.add(e * space.cell_mass(x));
        out.sup_error = std::max(out.sup_error, e);
    }
    out.l1_error = l1.value();
    return out;
}

LipChainReport lip_chain_report(const Space& space, const SampledFunction& f, const Cover& cover,
                                const PartitionOfUnity& pou, double p, double q, std::size_t audit_pairs) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("lip_chain_report: need p >= 1 and q >= 1");
    LipChainReport rep;
    const Convolution conv = discrete_convolution(space, f, cover, pou);
    CompensatedSum lhs;
    for (std::size_t x = 0; x < space.size(); ++x)
        if (cover.U.contains(space.node(x), space.dim())) lhs.add(std::pow(conv.lip[x], p) * space.cell_mass(x));
    rep.lhs = lhs.value();
    rep.C_d = audit_doubling(space, default_sample(space)).C_d;
    EvalOptions opt;
    opt.domain.outer = cover.omega;
    opt.domain.inner = cover.omega;
    rep.functional = eval_Phi(space, f, p, q, window_power(10.0 * cover.s, p * q), opt).value;
    rep.constant = std::pow(60.0 * std::pow(rep.C_d, 37.0), p);
    rep.rhs = rep.constant * rep.functional;
    rep.holds = rep.lhs <= rep.rhs;
    rep.chain_slack = kInf;
    rep.majorant_slack = kInf;
    if (space.kind() != SpaceKind::Interval) return rep;

    const double s = cover.s;
    const double majorant_factor = 6.0 * std::pow(rep.C_d, 19.0);
    std::vector<IndexRange> balls;
    std::size_t total = 0;
    for (std::size_t c : cover.centers) {
        balls.push_back(space.interval_neighbors(space.coords()[c], s));
        const std::size_t m = balls.back().size();
        total += m * (m - 1) / 2;
    }
    const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(audit_pairs, 1));
    std::size_t counter = 0;
    const auto& xs = space.coords();
    for (std::size_t j = 0; j < cover.centers.size(); ++j) {
        const IndexRange ball = balls[j];
        // Chain weight sum_k |f_Bk - f_Bj| over balls whose tents reach B_j.
        double chain = 0.0;
        for (std::size_t k : centers_near(space, cover, cover.centers[j], 3.0 * s))
            chain += std::abs(conv.ball_means[k] - conv.ball_means[j]);
        double avg = -1.0;  // double average over 5B_j, computed on demand
        for (std::size_t x = ball.begin; x < ball.end; ++x)
            for (std::size_t y = x + 1; y < ball.end; ++y) {
                if (counter++ % stride != 0) continue;
                if (avg < 0.0) {
                    const IndexRange big = space.interval_neighbors(xs[cover.centers[j]], 5.0 * s);
                    CompensatedSum num, mass;
                    for (std::size_t z = big.begin; z < big.end; ++z) {
                        mass.add(space.cell_mass(z));
                        for (std::size_t w = big.begin; w < big.end; ++w)
                            num.add(space.cell_mass(z) * space.cell_mass(w) * std::abs(f.values[z] - f.values[w]));
                    }
                    avg = num.value() / (mass.value() * mass.value());
                }
                const double d = xs[y] - xs[x];
                const double diff = std::abs(conv.h.values[x] - conv.h.values[y]);
                const double chain_bound = pou.lip_adjacent * d * chain;
                const double majorant_bound = majorant_factor * (d / s) * avg;
                const double tol = 1e-12 * std::max(1.0, std::abs(conv.h.values[x]));
                ++rep.pairs;
                if (diff > chain_bound + tol) ++rep.chain_violations;
                if (diff > majorant_bound + tol) ++rep.majorant_violations;
                if (diff > 0.0) {
                    rep.chain_slack = std::min(rep.chain_slack, chain_bound / diff);
                    rep.majorant_slack = std::min(rep.majorant_slack, majorant_bound / diff);
                }
            }
    }
    return rep;
}

}  // namespace bbmlab
