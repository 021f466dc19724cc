#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bbmlab/funcspace.hpp"
#include "bbmlab/mollifier.hpp"
#include "bbmlab/phi.hpp"
#include "bbmlab/space.hpp"

namespace bbmlab {

/// y ranges over `outer`, x over `inner`.
struct Domain {
    Region outer = Region::whole();
    Region inner = Region::whole();
};

struct EvalOptions {
    unsigned workers = 1;
    Domain domain;
};

/**
 * One power of the difference quotient accumulated per row.
 *
 * For a node y of the outer region the row sum is
 *
 *   S_e(y) = sum_{x != y} w(x,y) t(x,y)^e + c_e g(y)^e sigma(y)
 *
 * with t = |f(x) - f(y)| / d(x,y) over inner nodes x, and the channel value is
 * sum_y mu_y S_e(y)^{1/root}. The weights w(x,y) integrate the kernel over the
 * cell of x: exact overlaps of the cell with the kernel's balls, times the
 * power factor (d/r)^q at the node distance for the window-power family, and
 * mu_x rho(x,y) for the fractional family. sigma(y) is the kernel mass of y's
 * own cell, g(y) = |f'(y)| or |grad f(y)|, and c_e is the mean of |cos|^e over
 * the circle in 2D (1 in 1D).
 */
struct Channel {
    double exponent = 1.0;
    double root = 1.0;
};

struct ChannelResult {
    double outer_sum = 0.0;  // sum_y mu_y S_e(y)^{1/root}
    double row_max = 0.0;    // max_y S_e(y)
};

struct ChannelSums {
    std::vector<ChannelResult> channels;
    std::size_t pairs = 0;
    std::size_t rows = 0;
    double outer_mass = 0.0;
};

ChannelSums evaluate_channels(const Space& space, const SampledFunction& f, const MollifierSpec& kernel,
                              const std::vector<Channel>& channels, const EvalOptions& options = {});

enum class FunctionalKind { I, Psi, Phi, Lambda };

std::string to_string(FunctionalKind kind);

struct FunctionalValue {
    FunctionalKind which = FunctionalKind::I;
    double value = 0.0;
    double p = 1.0;
    double eps = 0.0;
    double q = 1.0;
    double delta = 0.0;
    std::size_t pair_count = 0;
    std::size_t diag_excluded = 0;
};

/// sum_y mu_y S_p(y).
FunctionalValue eval_I(const Space& space, const SampledFunction& f, double p, const MollifierSpec& kernel,
                       const EvalOptions& options = {});
/// (sum_y mu_y S_{p+eps}(y))^{p/(p+eps)}.
FunctionalValue eval_Psi(const Space& space, const SampledFunction& f, double p, double eps,
                         const MollifierSpec& kernel, const EvalOptions& options = {});
/// sum_y mu_y S_{pq}(y)^{1/q}.
FunctionalValue eval_Phi(const Space& space, const SampledFunction& f, double p, double q,
                         const MollifierSpec& kernel, const EvalOptions& options = {});

enum class LambdaAnchor { XBall, YBall, AhlforsPower };

std::string to_string(LambdaAnchor anchor);
LambdaAnchor parse_anchor(const std::string& name);

struct LambdaParams {
    double p = 1.0;
    double delta = 0.01;
    PhiSpec phi;
    LambdaAnchor anchor = LambdaAnchor::YBall;
    double Q = 1.0;  // exponent of the ahlfors-power normalizer d^Q
};

/**
 * sum_y mu_y sum_{x != y} mu_x delta^p phibar(x,y) / (N(x,y) d^p).
 *
 * N is mu(B(x,d)), mu(B(y,d)) or d^Q. On intervals phibar averages
 * phi(|f(z) - f(y)| / delta) over the cell of x using the linear
 * reconstruction of f there; on the grid it is phi at the node.
 */
FunctionalValue eval_Lambda(const Space& space, const SampledFunction& f, const LambdaParams& params,
                            const EvalOptions& options = {});

struct BoundTerm {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin() const { return rhs - lhs; }
};

/**
 * I_p, Psi_{p,eps} and I_q from one pass, with
 * holder:        (C_rho mu(U))^{-eps/(p+eps)} I_p <= Psi
 * interpolation: Psi <= I_p^a I_q^b, a = (q-p-eps)p/((q-p)(p+eps)), b = eps p/((q-p)(p+eps))
 * C_rho is the largest row kernel mass and mu(U) the outer mass.
 */
struct BoundBundle {
    double p = 1.0, eps = 0.0, q = 2.0;
    double I_p = 0.0, Psi = 0.0, I_q = 0.0;
    double C_rho = 0.0;
    double outer_mass = 0.0;
    BoundTerm holder;
    BoundTerm interpolation;
    std::size_t pairs = 0;
};

BoundBundle eval_bounds(const Space& space, const SampledFunction& f, double p, double eps, double q,
                        const MollifierSpec& kernel, const EvalOptions& options = {});

/// The four channels eval_bounds consumes, in order.
std::vector<Channel> bound_channels(double p, double eps, double q);
/// Bundle from sums whose channels [first, first + 4) are bound_channels(p, eps, q).
BoundBundle assemble_bounds(double p, double eps, double q, const ChannelSums& sums, std::size_t first = 0);

/// Channel behind I, Psi or Phi, and the map from its outer sum to the functional value.
Channel functional_channel(FunctionalKind kind, double p, double eps, double q);
double functional_from_sum(FunctionalKind kind, double p, double eps, double outer_sum);

/// Mean of |cos theta|^e over the circle.
double circle_moment(double e);

}  // namespace bbmlab
