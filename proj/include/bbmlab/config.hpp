#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bbmlab/funcspace.hpp"
#include "bbmlab/functional.hpp"
#include "bbmlab/mollifier.hpp"
#include "bbmlab/phi.hpp"
#include "bbmlab/space.hpp"

namespace bbmlab {

enum class SpaceShape { Interval, Planar, Cantor };

struct SpaceConfig {
    SpaceShape shape = SpaceShape::Interval;
    std::size_t cells = 1000;          // interval and Cantor cell count; grid side for planar
    std::vector<double> breakpoints;   // weighted interval: density pieces
    std::vector<double> weights;
    int depth = 0;                     // Cantor depth
};

/// Parameter swept along a series.
enum class SweepAxis { Index, Radius, Smoothness, Delta, Grid, Depth };

std::string to_string(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

/// Where the denominator of the ratio column comes from.
enum class EnergySource { Computed, Approximant, Fixed };

struct ScenarioConfig {
    std::string name = "custom";
    std::string description;
    FunctionalKind functional = FunctionalKind::I;
    double p = 1.0;
    double q = 2.0;
    double eps = 0.0;
    bool eps_from_radius = false;  // Psi: eps follows the kernel radius along the sweep

    SpaceConfig space;
    FunctionSpec function = Affine{};
    std::string function_label = "affine";

    MollifierFamily family = MollifierFamily::FlatWindow;
    double index = 10.0;        // radial index i
    double radius = 0.1;        // window radius r
    double smoothness = 0.5;    // fractional s
    double kernel_power = 1.0;  // window-power exponent
    std::vector<double> radii, heights;  // custom kernel table

    PhiSpec phi = step_phi();
    LambdaAnchor anchor = LambdaAnchor::YBall;
    double Q = 1.0;
    double delta = 0.01;

    Domain domain;

    SweepAxis axis = SweepAxis::Index;
    std::vector<double> ladder;

    EnergySource energy_source = EnergySource::Computed;
    double fixed_energy = 1.0;

    // Checks.
    double plateau_tol = 0.01;
    double oracle = 0.0;          // expected ratio limit; unused when has_oracle is false
    bool has_oracle = false;
    double oracle_tol = 0.02;
    double ratio_floor = 0.0;     // lower bound the plateau must reach; unused when has_floor is false
    bool has_floor = false;
    double bound_tol = 1e-9;
    double bound_eps = 0.5;       // Psi exponent shift in the bound bundle
    double bound_q_shift = 1.0;   // bundle q = p + bound_q_shift (must exceed bound_eps)
    double min_cells_per_radius = 8.0;
};

/// Reads an INI scenario file. Throws ConfigError on unknown sections, keys or malformed values.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

/// Replaces the resolution: cell count on intervals and Cantor spaces, side on grids.
void override_grid(ScenarioConfig& config, std::size_t n);

}  // namespace bbmlab
