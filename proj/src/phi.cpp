#include "bbmlab/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbmlab/errors.hpp"

namespace bbmlab {

std::string to_string(PhiKind kind) {
    switch (kind) {
        case PhiKind::Step: return "step";
        case PhiKind::ClampedPower: return "clamped-power";
        case PhiKind::Table: return "table";
    }
    return "?";
}

PhiSpec step_phi(double height) {
    if (!(height >= 0.0) || !std::isfinite(height)) throw InvalidArgument("step_phi: height must be finite and >= 0");
    PhiSpec s;
    s.kind = PhiKind::Step;
    s.height = height;
    return s;
}

PhiSpec clamped_power_phi(double kappa) {
    if (!(kappa > 0.0)) throw InvalidArgument("clamped_power_phi: exponent must be positive");
    PhiSpec s;
    s.kind = PhiKind::ClampedPower;
    s.kappa = kappa;
    return s;
}

PhiSpec table_phi(std::vector<double> knots, std::vector<double> values, double kappa) {
    if (knots.empty() || knots.size() != values.size()) throw InvalidArgument("table_phi: need one value per knot");
    if (!(knots.front() > 0.0)) throw InvalidArgument("table_phi: first knot must be positive");
    if (!(kappa > 0.0)) throw InvalidArgument("table_phi: head exponent must be positive");
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (!std::isfinite(values[k]) || values[k] < 0.0) throw InvalidArgument("table_phi: values must be finite and >= 0");
        if (k > 0 && !(knots[k] > knots[k - 1])) throw InvalidArgument("table_phi: knots must be ascending");
        if (k > 0 && values[k] < values[k - 1]) throw InvalidArgument("table_phi: values must be nondecreasing");
    }
    PhiSpec s;
    s.kind = PhiKind::Table;
    s.knots = std::move(knots);
    s.values = std::move(values);
    s.kappa = kappa;
    return s;
}

double PhiSpec::operator()(double t) const {
    t = std::abs(t);
    switch (kind) {
        case PhiKind::Step: return t > 1.0 ? height : 0.0;
        case PhiKind::ClampedPower: return std::pow(std::min(t, 1.0), kappa);
        case PhiKind::Table: {
            if (t <= knots.front()) return values.front() * std::pow(t / knots.front(), kappa);
            if (t >= knots.back()) return values.back();
            const std::size_t k = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin());
            const double u = (t - knots[k - 1]) / (knots[k] - knots[k - 1]);
            return values[k - 1] + u * (values[k] - values[k - 1]);
        }
    }
    return 0.0;
}

double PhiSpec::primitive(double v) const {
    if (v < 0.0) return -primitive(-v);
    switch (kind) {
        case PhiKind::Step: return v > 1.0 ? height * (v - 1.0) : 0.0;
        case PhiKind::ClampedPower:
            return v <= 1.0 ? std::pow(v, kappa + 1.0) / (kappa + 1.0) : 1.0 / (kappa + 1.0) + (v - 1.0);
        case PhiKind::Table: {
            const double t0 = knots.front();
            if (v <= t0) return values.front() * t0 / (kappa + 1.0) * std::pow(v / t0, kappa + 1.0);
            double acc = values.front() * t0 / (kappa + 1.0);
            for (std::size_t k = 1; k < knots.size(); ++k) {
                const double hi = std::min(v, knots[k]);
                const double len = hi - knots[k - 1];
                const double slope = (values[k] - values[k - 1]) / (knots[k] - knots[k - 1]);
                acc += len * (values[k - 1] + 0.5 * slope * len);
                if (v <= knots[k]) return acc;
            }
            return acc + values.back() * (v - knots.back());
        }
    }
    return 0.0;
}

double PhiSpec::mean_abs(double c, double a) const {
    if (a <= 0.0) return (*this)(c);
    const double lo = std::abs(c) - a, hi = std::abs(c) + a;
    if (kind == PhiKind::Step) {
        // The interval [c-a, c+a] meets the jump at |v| = 1 only when lo < 1 < hi.
        if (lo >= 1.0) return height;
        if (hi <= 1.0 && lo >= -1.0) return 0.0;
    }
    return (primitive(c + a) - primitive(c - a)) / (2.0 * a);
}

double PhiSpec::bound() const {
    switch (kind) {
        case PhiKind::Step: return height;
        case PhiKind::ClampedPower: return 1.0;
        case PhiKind::Table: return values.back();
    }
    return 0.0;
}

namespace {

// int_a^b (alpha + beta t) t^{-1-p} dt.
double linear_moment(double alpha, double beta, double a, double b, double p) {
    const double first = alpha * (std::pow(a, -p) - std::pow(b, -p)) / p;
    const double second = p == 1.0 ? beta * std::log(b / a) : beta * (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / (1.0 - p);
    return first + second;
}

}  // namespace

PhiAudit audit_phi(const PhiSpec& spec, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("audit_phi: p must be at least 1");
    PhiAudit out;
    out.monotone = true;
    out.b = spec.bound();
    switch (spec.kind) {
        case PhiKind::Step:
            out.integral = spec.height / p;
            break;
        case PhiKind::ClampedPower:
            if (spec.kappa <= p) {
                out.divergent = true;
                out.note = "min(t,1)^kappa needs kappa > p for the integral to converge at 0";
            } else {
                out.integral = 1.0 / (spec.kappa - p) + 1.0 / p;
            }
            break;
        case PhiKind::Table: {
            for (std::size_t k = 1; k < spec.values.size(); ++k)
                out.monotone = out.monotone && spec.values[k] >= spec.values[k - 1];
            const double t0 = spec.knots.front();
            double I = 0.0;
            if (spec.values.front() > 0.0) {
                if (spec.kappa <= p) {
                    out.divergent = true;
                    out.note = "head exponent must exceed p for the integral to converge at 0";
                } else {
                    I += spec.values.front() * std::pow(t0, -p) / (spec.kappa - p);
                }
            }
            for (std::size_t k = 1; k < spec.knots.size(); ++k) {
                const double a = spec.knots[k - 1], b = spec.knots[k];
                const double beta = (spec.values[k] - spec.values[k - 1]) / (b - a);
                I += linear_moment(spec.values[k - 1] - beta * a, beta, a, b, p);
            }
            I += spec.values.back() * std::pow(spec.knots.back(), -p) / p;
            if (!out.divergent) out.integral = I;
            break;
        }
    }
    if (out.divergent) {
        out.integral = std::numeric_limits<double>::infinity();
        out.C_phi = std::numeric_limits<double>::infinity();
    } else if (out.integral > 0.0) {
        out.C_phi = std::max(out.integral, 1.0 / out.integral);
    } else {
        out.C_phi = std::numeric_limits<double>::infinity();
        out.note = "integral vanishes; no finite constant";
    }
    out.feasible = out.monotone && std::isfinite(out.b) && std::isfinite(out.C_phi);
    return out;
}

}  // namespace bbmlab
