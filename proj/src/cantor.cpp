#include "bbmlab/cantor.hpp"

#include <algorithm>
#include <sstream>

namespace bbmlab {

CantorModel build_cantor_model(int depth) {
    if (depth < 1 || depth > kMaxCantorDepth)
        throw InvalidArgument("build_cantor_model: depth must lie in [1, " + std::to_string(kMaxCantorDepth) + "]");
    CantorModel m;
    m.depth = depth;
    m.levels.push_back({{Dyadic::integer(0), Dyadic::integer(1)}});
    m.L.push_back(Dyadic::integer(1));
    for (int i = 1; i <= depth; ++i) {
        const Dyadic half = Dyadic::pow2(-2 * i - 1);
        std::vector<DyadicInterval> next, gaps;
        next.reserve(2 * m.levels.back().size());
        for (const auto& comp : m.levels.back()) {
            const Dyadic c = comp.midpoint();
            gaps.push_back({c - half, c + half});
            next.push_back({comp.lo, c - half});
            next.push_back({c + half, comp.hi});
        }
        Dyadic total;
        for (const auto& comp : next) total += comp.length();
        m.levels.push_back(std::move(next));
        m.removed.push_back(std::move(gaps));
        m.L.push_back(total);
    }
    return m;
}

std::size_t cantor_min_cells(int depth) { return std::size_t{1} << (2 * depth + 3); }

Space cantor_space(const CantorModel& model, std::size_t n_cells) {
    const std::size_t need = cantor_min_cells(model.depth);
    if (n_cells < need)
        throw ResolutionError("cantor_space: " + std::to_string(n_cells) + " cells cannot resolve depth " +
                                  std::to_string(model.depth) + "; need at least " + std::to_string(need),
                              need);
    std::vector<double> breaks{0.0};
    std::vector<double> weights;
    const auto& comps = model.components();
    for (std::size_t k = 0; k < comps.size(); ++k) {
        if (k > 0) {
            breaks.push_back(comps[k].lo.to_double());
            weights.push_back(1.0);
        }
        breaks.push_back(comps[k].hi.to_double());
        weights.push_back(2.0);
    }
    return Space::weighted_interval(breaks, weights, n_cells);
}

// ============================================================================
// CantorFunction
// ============================================================================

namespace {

std::vector<Dyadic> length_prefix(const std::vector<DyadicInterval>& list) {
    std::vector<Dyadic> prefix{Dyadic()};
    for (const auto& iv : list) prefix.push_back(prefix.back() + iv.length());
    return prefix;
}

// int_0^x chi of a sorted disjoint interval list with its length prefix.
Dyadic covered_length(const std::vector<DyadicInterval>& list, const std::vector<Dyadic>& prefix,
                      const Dyadic& x) {
    const auto it = std::lower_bound(list.begin(), list.end(), x,
                                     [](const DyadicInterval& iv, const Dyadic& v) { return iv.lo < v; });
    const std::size_t k = static_cast<std::size_t>(it - list.begin());
    if (k == 0) return Dyadic();
    const auto& last = list[k - 1];
    return prefix[k - 1] + ((x < last.hi ? x : last.hi) - last.lo);
}

bool in_closure(const std::vector<DyadicInterval>& list, const Dyadic& x) {
    const auto it = std::upper_bound(list.begin(), list.end(), x,
                                     [](const Dyadic& v, const DyadicInterval& iv) { return v < iv.lo; });
    if (it == list.begin()) return false;
    const auto& iv = *(it - 1);
    return iv.lo <= x && x <= iv.hi;
}

}  // namespace

CantorFunction::CantorFunction(const CantorModel& model) : model_(&model) {
    component_prefix_ = length_prefix(model.components());
    for (const auto& gaps : model.removed) removed_prefix_.push_back(length_prefix(gaps));
}

Dyadic CantorFunction::truncated(const Dyadic& x) const {
    return covered_length(model_->components(), component_prefix_, x).scaled(1);
}

Dyadic CantorFunction::limit(const Dyadic& x) const {
    if (x <= Dyadic::integer(0)) return Dyadic();
    if (x >= Dyadic::integer(1)) return Dyadic::integer(1);
    for (int k = 1; k <= model_->depth; ++k) {
        if (!in_closure(model_->removed[k - 1], x)) continue;
        const auto& comps = model_->levels[k];
        const auto it = std::upper_bound(comps.begin(), comps.end(), x,
                                         [](const Dyadic& v, const DyadicInterval& iv) { return v < iv.hi; });
        return Dyadic(static_cast<std::int64_t>(it - comps.begin()), k);
    }
    throw InvalidArgument("CantorFunction::limit: point lies inside A_m");
}

Dyadic CantorFunction::approximant(int i, const Dyadic& x) const {
    if (i < 1 || i > model_->depth) throw InvalidArgument("CantorFunction::approximant: index out of range");
    return covered_length(model_->removed[i - 1], removed_prefix_[i - 1], x).scaled(i + 1);
}

Dyadic CantorFunction::approximant_mass(int i) const { return approximant(i, Dyadic::integer(1)); }

PiecewiseLinear CantorFunction::descriptor() const {
    PiecewiseLinear pl;
    Dyadic acc;
    pl.knots.push_back(0.0);
    pl.values.push_back(0.0);
    for (const auto& comp : model_->components()) {
        if (comp.lo.to_double() > pl.knots.back()) {
            pl.knots.push_back(comp.lo.to_double());
            pl.values.push_back(acc.to_double());
        }
        acc += comp.length().scaled(1);
        pl.knots.push_back(comp.hi.to_double());
        pl.values.push_back(acc.to_double());
    }
    return pl;
}

FunctionSpec bump_f0(double amplitude) {
    if (amplitude == 0.0) throw InvalidArgument("bump_f0: amplitude must be nonzero");
    return Bump{0.5, 0.125, amplitude};
}

// ============================================================================
// Audit
// ============================================================================

CantorReport audit_cantor(const CantorModel& model) {
    CantorReport rep;
    rep.depth = model.depth;
    const int m = model.depth;
    const CantorFunction fn(model);
    const auto add = [&](std::string name, bool pass, std::string detail) {
        rep.checks.push_back({std::move(name), pass, std::move(detail)});
    };

    {
        bool ok = true;
        for (int i = 1; i <= m; ++i) ok = ok && model.L[i] == model.L[i - 1] - Dyadic::pow2(-i - 1);
        add("length recurrence L_i = L_{i-1} - 2^{-i-1}", ok, "i = 1.." + std::to_string(m));
        const Dyadic closed = Dyadic(1, 1) + Dyadic::pow2(-m - 1);
        add("closed form L_m = 1/2 + 2^{-m-1}", model.L[m] == closed, model.L[m].str());
    }
    {
        bool ok = true;
        for (int i = 1; i <= m; ++i) {
            const auto& gaps = model.removed[i - 1];
            const auto& parents = model.levels[i - 1];
            ok = ok && gaps.size() == (std::size_t{1} << (i - 1)) && gaps.size() == parents.size();
            for (std::size_t k = 0; ok && k < gaps.size(); ++k)
                ok = gaps[k].length() == Dyadic::pow2(-2 * i) && gaps[k].midpoint() == parents[k].midpoint();
        }
        add("generation i removes 2^{i-1} centred intervals of length 2^{-2i}", ok, "");
    }
    {
        const auto& comps = model.components();
        bool ok = comps.size() == (std::size_t{1} << m);
        const Dyadic len = model.L[m].scaled(-m);
        for (const auto& c : comps) ok = ok && c.length() == len;
        add("A_m has 2^m components of length L_m / 2^m", ok, len.str());
    }
    {
        bool ok = true;
        for (int i = 1; i <= m; ++i) ok = ok && fn.approximant_mass(i) == Dyadic::integer(1);
        add("int g_i = 1", ok, "i = 1.." + std::to_string(m));
    }
    {
        const Dyadic f1 = fn.truncated(Dyadic::integer(1));
        add("f(1) = 2 L_m", f1 == model.L[m].scaled(1), f1.str());
        bool ok = true;
        const Dyadic per = model.L[m].scaled(1 - m);
        for (const auto& c : model.components()) ok = ok && fn.truncated(c.hi) - fn.truncated(c.lo) == per;
        add("each A_m component carries slope mass 2 L_m / 2^m", ok, per.str());
    }

    // Points of X \ A_i for every i <= m: endpoints and midpoints of all gaps.
    struct GapPoint {
        Dyadic x;
        int generation;
    };
    std::vector<GapPoint> points;
    for (int k = 1; k <= m; ++k)
        for (const auto& g : model.removed[k - 1]) {
            points.push_back({g.lo, k});
            points.push_back({g.midpoint(), k});
            points.push_back({g.hi, k});
        }
    {
        bool ok = true;
        std::size_t checked = 0;
        for (int i = 1; i < m && ok; ++i)
            for (const auto& pt : points) {
                if (pt.generation > i) continue;
                ok = fn.approximant(i + 1, pt.x) == fn.limit(pt.x);
                ++checked;
                if (!ok) break;
            }
        add("f_{i+1} = f off A_i", ok, std::to_string(checked) + " gap points");
    }
    {
        bool ok = true;
        for (int i = 1; i < m && ok; ++i) {
            const Dyadic bound = Dyadic::pow2(-i);
            for (const auto& comp : model.levels[i]) {
                // Both functions are nondecreasing and gain exactly 2^-i across comp.
                ok = ok && fn.approximant(i + 1, comp.hi) - fn.approximant(i + 1, comp.lo) == bound;
                ok = ok && fn.limit(comp.hi) - fn.limit(comp.lo) == bound;
            }
            for (const auto& pt : points)
                if (pt.generation > i) ok = ok && abs(fn.approximant(i + 1, pt.x) - fn.limit(pt.x)) <= bound;
        }
        add("sup |f_{i+1} - f| <= 2^{-i}", ok, "monotone increments and interior gap points");
    }

    rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CantorCheck& c) { return c.pass; });
    const double Lm = model.L[m].to_double();
    rep.total_mass = 1.0 + Lm;
    rep.f_at_one = 2.0 * Lm;
    rep.envelope_variation = 4.0 * Lm;
    rep.limit_envelope_variation = 2.0 * Lm;
    rep.approximant_infimum = fn.approximant_mass(1).to_double();
    for (int i = 2; i <= m; ++i) rep.approximant_infimum = std::min(rep.approximant_infimum, fn.approximant_mass(i).to_double());
    return rep;
}

}  // namespace bbmlab
