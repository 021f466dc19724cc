#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bbmlab/config.hpp"
#include "bbmlab/funcspace.hpp"
#include "bbmlab/functional.hpp"

namespace bbmlab {

enum class SeriesStatus { Converged, NonPlateau, Diverging };

std::string to_string(SeriesStatus status);

struct SeriesPoint {
    double param = 0.0;
    FunctionalValue value;
    EnergyValue energy;
    double ratio = 0.0;
    std::size_t grid = 0;               // node count of the space used
    std::optional<BoundBundle> bounds;  // kernel functionals only
};

struct PlateauEstimate {
    double value = 0.0;
    double half_width = 0.0;
    SeriesStatus status = SeriesStatus::NonPlateau;
};

struct ConvergenceSeries {
    ScenarioConfig config;
    std::vector<SeriesPoint> points;
    PlateauEstimate plateau;  // of the ratio column
    double band_lo = 0.0;     // empirical constants: min and max ratio along the sweep
    double band_hi = 0.0;

    std::vector<double> ratios() const;
};

/**
 * Plateau of a sequence ordered along the sweep: the last value, with
 * half-width (max - min)/2 over the last three. Converged when the half-width
 * is within tol |value|; diverging when the last three increments share a sign
 * and grow in size. Needs at least four values.
 */
PlateauEstimate estimate_limit(const std::vector<double>& values, double tol);
PlateauEstimate estimate_limit(const ConvergenceSeries& series);

struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 1e-9;  // relative to |rhs|
    bool pass = false;
    bool proved = true;       // false for expectations (plateau reached, oracle matched)

    double margin() const { return rhs - lhs; }
};

BoundCheck make_check(std::string name, double lhs, double rhs, double tolerance);

/// True unless a proved inequality failed; expectations never fail a run.
bool proved_checks_pass(const std::vector<BoundCheck>& checks);

/// Thrown before evaluation when a kernel radius is below min_cells_per_radius cells.
void check_resolution(const ScenarioConfig& config, double radius, double spacing);

/// The kernel at one sweep parameter.
MollifierSpec kernel_at(const ScenarioConfig& config, double param, int dim);

/// Evaluates the functional along the ladder. Points come out in ladder order.
ConvergenceSeries run_sweep(const ScenarioConfig& config, unsigned workers = 1);

/// Holder and interpolation per point and the ratio floor (proved); plateau status and oracle (expectations).
std::vector<BoundCheck> check_bounds(const ConvergenceSeries& series);

/**
 * Two sweeps whose plateau ratios cannot share one constant: passes when
 * the lower series' upper bound stays below the higher one's lower bound
 * (plateau values widened by their half-widths).
 */
struct ConstantComparison {
    BoundCheck separation;
    std::string conclusion;
};

ConstantComparison compare_constants(const ConvergenceSeries& high, const ConvergenceSeries& low);

/// CSV (`<name>.csv`), summary (`<name>.summary.txt`) and gnuplot script (`<name>.gp`) in dir.
void emit_report(const ConvergenceSeries& series, const std::vector<BoundCheck>& checks, const std::string& dir);

std::string csv_text(const ConvergenceSeries& series);
std::string summary_text(const ConvergenceSeries& series, const std::vector<BoundCheck>& checks);

/// Shipped scenario names and their configurations.
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

}  // namespace bbmlab
