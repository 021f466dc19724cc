#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bbmlab/dyadic.hpp"
#include "bbmlab/funcspace.hpp"
#include "bbmlab/space.hpp"

namespace bbmlab {

struct DyadicInterval {
    Dyadic lo, hi;
    Dyadic length() const { return hi - lo; }
    Dyadic midpoint() const { return (lo + hi).scaled(-1); }
};

/**
 * Fat Cantor construction truncated at depth m.
 *
 * Generation i removes from every component of A_{i-1} the open interval of
 * length 2^-2i centred at its midpoint. levels[i] lists the components of A_i
 * and removed[i-1] the intervals taken out at generation i.
 */
struct CantorModel {
    int depth = 0;
    std::vector<std::vector<DyadicInterval>> levels;
    std::vector<std::vector<DyadicInterval>> removed;
    std::vector<Dyadic> L;  // L[i] = length of A_i

    const std::vector<DyadicInterval>& components() const { return levels.back(); }
};

constexpr int kMaxCantorDepth = 24;

CantorModel build_cantor_model(int depth);

/// Smallest cell count whose spacing resolves the finest removed interval eight times over.
std::size_t cantor_min_cells(int depth);

/// Interval space with density 2 on A_m and 1 elsewhere. Throws ResolutionError if too coarse.
Space cantor_space(const CantorModel& model, std::size_t n_cells);

/**
 * Exact evaluators for the Cantor primitive and its approximants.
 *
 * truncated(x) = int_0^x 2 chi_{A_m}; limit(x) is the primitive of 2 chi_A
 * for the full construction, available at points outside the interior of A_m;
 * approximant(i, x) = int_0^x g_i with g_i = chi_{D_i} / (L_{i-1} - L_i).
 */
class CantorFunction {
public:
    explicit CantorFunction(const CantorModel& model);

    Dyadic truncated(const Dyadic& x) const;
    Dyadic limit(const Dyadic& x) const;
    Dyadic approximant(int i, const Dyadic& x) const;
    /// int_0^1 g_i.
    Dyadic approximant_mass(int i) const;
    /// Knots and values of the truncated primitive.
    PiecewiseLinear descriptor() const;

private:
    const CantorModel* model_;
    std::vector<Dyadic> component_prefix_;
    std::vector<std::vector<Dyadic>> removed_prefix_;
};

/// Tent of the given amplitude supported in (3/8, 5/8).
FunctionSpec bump_f0(double amplitude);

struct CantorCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CantorReport {
    int depth = 0;
    std::vector<CantorCheck> checks;
    bool all_pass = false;
    double total_mass = 0.0;          // 1 + L_m
    double f_at_one = 0.0;            // 2 L_m
    double envelope_variation = 0.0;  // finite depth: density 2 on A_m, 4 L_m
    double limit_envelope_variation = 0.0;  // envelope 1 on A: 2 L_m, tends to 1
    double approximant_infimum = 0.0;       // inf_i int g_i dmu = 1
};

/// Verifies every construction identity in exact dyadic arithmetic.
CantorReport audit_cantor(const CantorModel& model);

}  // namespace bbmlab
