#pragma once

#include <string>
#include <vector>

namespace bbmlab {

enum class PhiKind { Step, ClampedPower, Table };

/**
 * Nondecreasing bounded profile for the nonconvex functional.
 *
 * step:          height * chi_{t > 1}
 * clamped-power: min(t, 1)^kappa
 * table:         linear through (knots, values), values[0] (t/knots[0])^kappa
 *                below the first knot and constant past the last one.
 */
struct PhiSpec {
    PhiKind kind = PhiKind::Step;
    double height = 1.0;
    double kappa = 2.0;
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double t) const;
    /// int_0^v phi(|u|) du, odd in v.
    double primitive(double v) const;
    /// Mean of phi(|v|) over v in [c - a, c + a]; a >= 0.
    double mean_abs(double c, double a) const;
    /// sup phi.
    double bound() const;
};

PhiSpec step_phi(double height = 1.0);
PhiSpec clamped_power_phi(double kappa);
PhiSpec table_phi(std::vector<double> knots, std::vector<double> values, double kappa = 2.0);

std::string to_string(PhiKind kind);

struct PhiAudit {
    bool monotone = false;
    double b = 0.0;
    double integral = 0.0;  // int_0^inf phi(t) t^{-1-p} dt
    double C_phi = 0.0;     // max(I, 1/I)
    bool divergent = false;
    bool feasible = false;  // monotone, bounded, 0 < I < inf
    std::string note;
};

PhiAudit audit_phi(const PhiSpec& spec, double p);

}  // namespace bbmlab
