#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "bbmlab/space.hpp"

namespace bbmlab {

/// Jump discontinuity of a 1D function: position and |f(x+) - f(x-)|.
struct Jump {
    double position = 0.0;
    double magnitude = 0.0;
};

/**
 * Function sampled on the nodes of a Space.
 *
 * `grad_x` holds the signed derivative in 1D and the x-component of the
 * gradient in 2D; `grad_y` is empty on interval spaces. The gradient is the
 * absolutely continuous part only; jumps are listed separately.
 */
struct SampledFunction {
    std::vector<double> values;
    std::vector<double> grad_x;
    std::vector<double> grad_y;
    std::vector<Jump> jumps;

    std::size_t size() const { return values.size(); }
    /// |f'| in 1D, |grad f| in 2D.
    double derivative(std::size_t k) const;
};

// Analytic descriptors accepted by sample_function. Planar spaces accept
// Affine and Sine (a function of the first coordinate); the rest are 1D only.

/// c0 + ax*x + ay*y.
struct Affine {
    double c0 = 0.0, ax = 1.0, ay = 0.0;
};
/// amplitude * sin(2*pi*frequency*x + phase).
struct Sine {
    double amplitude = 1.0, frequency = 1.0, phase = 0.0;
};
/// sum_k coeffs[k] x^k.
struct Polynomial {
    std::vector<double> coeffs;
};
/// Linear interpolation of (knots, values), constant outside the knot range.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;
};
/// height on [a, b], 0 elsewhere.
struct Indicator {
    double a = 0.0, b = 0.5, height = 1.0;
};
/// Primitive of 2*chi_{A_m} for the depth-m fat Cantor set.
struct CantorPrimitive {
    int depth = 1;
};
/// Tent of the given amplitude supported in (center - half_width, center + half_width).
struct Bump {
    double center = 0.5, half_width = 0.125, amplitude = 1.0;
};

using FunctionSpec = std::variant<Affine, Sine, Polynomial, PiecewiseLinear, Indicator, CantorPrimitive, Bump>;

SampledFunction sample_function(const Space& space, const FunctionSpec& spec);

enum class EnergyKind { Variation, PEnergy };

struct EnergyValue {
    double p = 1.0;
    double value = 0.0;
    EnergyKind kind = EnergyKind::Variation;
};

/**
 * E_p of f over the nodes inside `region`.
 *
 * p > 1: sum of |grad f|^p times cell mass. p = 1 on intervals: |f'| weighted by
 * the density envelope times cell length, plus jumps weighted by the envelope
 * at the jump. p = 1 on the grid: |grad f| times cell area.
 */
EnergyValue energy(const Space& space, const SampledFunction& f, double p,
                   const Region& region = Region::whole());

/// Essential lower envelope of the density at each node (interval spaces).
std::vector<double> weight_envelope(const Space& space);

/// Envelope at an arbitrary position: min of the adjacent densities on a cell edge.
double weight_envelope_at(const Space& space, double x);

/// Lip_r f at each node: max over nodes y with d(x,y) < r of |f(y) - f(x)| / r.
std::vector<double> lip_field(const Space& space, const SampledFunction& f, double r);

/// Integral of f over B(c, r) with linear reconstruction inside each cell.
double ball_integral(const Space& space, const SampledFunction& f, const Point& c, double r);

/// mu-average of f over B(c, r).
double ball_average(const Space& space, const SampledFunction& f, const Point& c, double r);

/**
 * Restricted maximal function M_R g at one node, g cellwise constant and >= 0.
 *
 * On intervals the ball average is monotone in r between radii where y +- r
 * crosses a cell edge, so the supremum over those radii, R itself and the
 * r -> 0 limit is exact. On the grid a geometric ladder of ratio 2^(1/4) is used.
 */
double restricted_maximal_at(const Space& space, const std::vector<double>& g, double R, std::size_t node);

std::vector<double> restricted_maximal(const Space& space, const std::vector<double>& g, double R);

struct TelescopeAudit {
    double constant = 0.0;   // max of |f(y) - f_B| / (r (M g^e)^(1/e))
    std::size_t sampled = 0;
    std::size_t skipped = 0; // maximal function vanished
};

/**
 * Measures |f(y) - f_{B(y,r)}| / (r * (M_{lambda r} g^e (y))^{1/e}) over the
 * given nodes. g is a per-node upper gradient of f (interval spaces).
 */
TelescopeAudit audit_telescope(const Space& space, const SampledFunction& f, const std::vector<double>& g,
                               double r, double lambda, double exponent, const std::vector<std::size_t>& nodes);

}  // namespace bbmlab
