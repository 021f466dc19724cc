#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bbmlab/space.hpp"

namespace bbmlab {

enum class MollifierFamily { Fractional, WindowPower, FlatWindow, EuclideanRadial, CustomKernel };

std::string to_string(MollifierFamily family);
MollifierFamily parse_family(const std::string& name);

/**
 * Kernel rho(x, y) of one family.
 *
 * fractional:  (1-s) d^{p(1-s)} / mu(B(y,d))
 * window-power: (d/r)^q chi_{d<r} / mu(B(y,r))
 * flat-window:  chi_{d<r} / mu(B(y,r))
 * euclidean-radial / custom-kernel: step profile heights[k] on
 *   [radii[k-1], radii[k]) with radii[-1] = 0, no measure normalization.
 *
 * Ball normalizations are always centred at the second argument.
 */
struct MollifierSpec {
    MollifierFamily family = MollifierFamily::FlatWindow;
    double p = 1.0;
    double s = 0.5;
    double r = 0.1;
    double q = 1.0;
    std::vector<double> radii;
    std::vector<double> heights;
    int dim = 1;

    /// Radius beyond which the kernel vanishes; +inf for the fractional family.
    double support() const;
    bool ball_normalized() const;
    bool step_profile() const {
        return family == MollifierFamily::EuclideanRadial || family == MollifierFamily::CustomKernel;
    }
    /// Step-profile value at distance t (0 outside the table).
    double profile(double t) const;
};

MollifierSpec fractional(double s, double p);
MollifierSpec window_power(double r, double q);
MollifierSpec flat_window(double r);
/// i * chi_[0,1/i] in 1D; the height making int rho(t) t^{n-1} dt = 1 in dimension n.
MollifierSpec euclidean_radial(double i, int dim = 1);
/// Step radial profile; must satisfy int rho(t) t^{dim-1} dt = 1 within 1e-6.
MollifierSpec radial_profile(std::vector<double> radii, std::vector<double> heights, int dim);
/// Unnormalized step profile table.
MollifierSpec custom_kernel(std::vector<double> radii, std::vector<double> heights, int dim);

/// rho(x, y) at two nodes. Throws for x == y on the fractional family.
double eval(const MollifierSpec& spec, const Space& space, std::size_t x, std::size_t y);

struct MinorizeAudit {
    double C_rho = 0.0;   // max(1, sampled ratio)
    double max_ratio = 0.0;
    bool bounded = true;  // false when the ratio is unbounded near the diagonal
    std::size_t pairs = 0;
};

/**
 * Smallest C with (d/r)^p / mu(B(y,r)) <= C rho(x,y) for sampled pairs at
 * d(x,y) < r_probe.
 */
MinorizeAudit audit_minorize(const MollifierSpec& spec, const Space& space, double p, double r_probe,
                             std::size_t max_centers = 65);

/// Smallest C with rho(x,y) >= (d/r)^p / (C mu(B(y,r))) over a ladder of probe radii.
std::vector<std::pair<double, MinorizeAudit>> audit_minorize_ladder(const MollifierSpec& spec, const Space& space,
                                                                    double p, const std::vector<double>& probes,
                                                                    std::size_t max_centers = 65);

struct DyadicMajorant {
    int j_min = 0, j_max = 0;
    std::vector<double> d;   // d[j - j_min]
    double sum = 0.0;
    double declared_bound = 0.0;  // family bound on the sum from the audited constants
    double C_d = 0.0;             // audited constants the sequence is built from
    double C0 = 0.0, sigma = 0.0;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0;    // max rho / majorant - 1 over checked pairs

    double at(int j) const { return j < j_min || j > j_max ? 0.0 : d[static_cast<std::size_t>(j - j_min)]; }
    /// sum over j >= M.
    double tail(int M) const;
};

/**
 * Dyadic annulus majorant of a window kernel and its pointwise check
 * rho(x,y) <= sum_j d_j chi_{2^j <= d < 2^{j+1}} / mu(B(y, 2^{j+1})).
 * Throws InvalidArgument for the families without a finite-support majorant.
 */
DyadicMajorant dyadic_majorant(const MollifierSpec& spec, const Space& space, std::size_t max_centers = 65);

}  // namespace bbmlab
