#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "bbmlab/errors.hpp"

namespace bbmlab {

enum class SpaceKind { Interval, Planar };

using Point = std::array<double, 2>;

/// Half-open node index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool empty() const { return end <= begin; }
};

/**
 * Axis-aligned box selecting the nodes whose coordinates lie in it (closed).
 * The second axis is ignored on interval spaces.
 */
struct Region {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;

    static Region whole() { return {}; }
    static Region interval(double a, double b) { return {a, b, 0.0, 1.0}; }
    static Region square(double a, double b) { return {a, b, a, b}; }

    bool contains(const Point& p, int dim) const {
        const bool in_x = p[0] >= x0 && p[0] <= x1;
        return dim == 1 ? in_x : in_x && p[1] >= y0 && p[1] <= y1;
    }
    bool is_whole() const { return x0 <= 0.0 && x1 >= 1.0 && y0 <= 0.0 && y1 >= 1.0; }
};

/**
 * Discretized metric measure space.
 *
 * Interval spaces live on [0,1] with cells delimited by `edges()`, a node at
 * each cell midpoint and a piecewise constant density. Planar spaces are the
 * unit square split into an nx-by-ny grid with density 1, nodes at cell centres
 * indexed row-major (k = iy*nx + ix).
 *
 * Ball measures are exact integrals of the density over B(c,r) intersected
 * with the domain, never node sums. Instances are immutable.
 */
class Space {
public:
    static Space weighted_interval(const std::vector<double>& breakpoints,
                                   const std::vector<double>& weights,
                                   std::size_t n_cells);
    static Space planar_grid(std::size_t nx, std::size_t ny);

    SpaceKind kind() const { return kind_; }
    int dim() const { return kind_ == SpaceKind::Interval ? 1 : 2; }
    std::size_t size() const { return mass_.size(); }

    Point node(std::size_t k) const;
    double cell_mass(std::size_t k) const { return mass_[k]; }
    double density(std::size_t k) const { return density_[k]; }
    const std::vector<double>& masses() const { return mass_; }
    const std::vector<double>& densities() const { return density_; }
    double total_mass() const { return total_mass_; }
    double diameter() const;
    double distance(const Point& a, const Point& b) const;
    double distance(std::size_t a, std::size_t b) const { return distance(node(a), node(b)); }
    /// Largest cell extent along any axis.
    double max_spacing() const;

    // Interval spaces.
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& coords() const { return coords_; }
    double cell_lo(std::size_t k) const { return edges_[k]; }
    double cell_hi(std::size_t k) const { return edges_[k + 1]; }
    /// Cell containing x, with x clamped into the domain.
    std::size_t locate(double x) const;
    /// mu([0, x)), clamped to the domain.
    double cumulative_mass(double x) const;
    /// mu([0, edges()[k])).
    double cumulative_at_edge(std::size_t k) const { return cum_[k]; }
    /// Nodes with |x_k - c| < r, as a contiguous range (may include c's node).
    IndexRange interval_neighbors(double c, double r) const;

    // Planar spaces.
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }

    double ball_measure(const Point& center, double r) const;
    double ball_measure(std::size_t center, double r) const { return ball_measure(node(center), r); }
    /// mu(cell_k intersected with B(center, r)).
    double cell_ball_overlap(std::size_t k, const Point& center, double r) const;
    /// Nodes other than `center` at distance strictly below r, ascending.
    std::vector<std::size_t> neighbors_within(std::size_t center, double r) const;

private:
    Space() = default;

    SpaceKind kind_ = SpaceKind::Interval;
    std::vector<double> edges_;
    std::vector<double> coords_;
    std::vector<double> cum_;
    std::vector<double> mass_;
    std::vector<double> density_;
    double total_mass_ = 0.0;
    std::size_t nx_ = 0, ny_ = 0;
    double hx_ = 0.0, hy_ = 0.0;
};

/// Area of the disc B((cx,cy), r) intersected with [x0,x1] x [y0,y1].
double disc_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1);

// ============================================================================
// Audits
// ============================================================================

/// Centers and radii over which the structural audits take their suprema.
struct RadiusSample {
    std::vector<std::size_t> centers;
    std::vector<double> radii;
};

/**
 * Evenly strided centers (endpoints included) and a geometric radius ladder
 * with ratio 2^(1/4) running from two cell widths up to diam/2.
 */
RadiusSample default_sample(const Space& space, std::size_t max_centers = 257);

/// Same ladder, restricted to centers at distance >= margin from the boundary.
RadiusSample interior_sample(const Space& space, double margin, std::size_t max_centers = 257);

struct DoublingEstimate {
    double C_d = 0.0;
    std::size_t worst_center = 0;
    double worst_radius = 0.0;
    std::size_t pairs = 0;
};

/// max over the sample of mu(B(x,2r)) / mu(B(x,r)), radii restricted to (0, diam/2].
DoublingEstimate audit_doubling(const Space& space, const RadiusSample& sample);

struct MassBoundFit {
    double C0 = 0.0;
    double sigma = 0.0;
    /// Largest relative excess of the least-squares line over the sample.
    double residual = 0.0;
    std::size_t pairs = 0;
};

/**
 * Fits mu(B(x,r))/mu(B(x,R)) <= C0 (r/R)^sigma over r <= R < diam/2.
 * sigma is the least-squares slope in log coordinates; C0 is then raised to
 * the envelope so the fitted pair has no violations.
 */
MassBoundFit audit_upper_mass_bound(const Space& space, const RadiusSample& sample);

/// Largest relative violation of the mass bound with the given constants (0 if feasible).
double mass_bound_violation(const Space& space, const RadiusSample& sample, double C0, double sigma);

struct AhlforsEstimate {
    double C_A = 0.0;
    double Q = 0.0;
    std::size_t pairs = 0;
};

/// Smallest C_A with r^Q / C_A <= mu(B(x,r)) <= C_A r^Q over the sample.
AhlforsEstimate audit_ahlfors(const Space& space, double Q, const RadiusSample& sample);

}  // namespace bbmlab
