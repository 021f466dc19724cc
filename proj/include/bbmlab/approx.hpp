#pragma once

#include <cstddef>
#include <vector>

#include "bbmlab/funcspace.hpp"
#include "bbmlab/space.hpp"

namespace bbmlab {

/**
 * Balls B(x_j, s) with centers forming an s-separated net of the nodes of
 * U(5s) = {x : dist(x, U) < 5s}. Centers whose 5-ball leaves Omega are
 * dropped and counted.
 */
struct Cover {
    double s = 0.0;
    Region U;
    Region omega;
    std::vector<std::size_t> centers;
    std::vector<std::size_t> neighborhood;  // nodes of U(5s), ascending
    std::size_t discarded = 0;
    std::size_t overlap_bound = 0;          // max multiplicity of the 5-balls over all nodes
};

Cover build_cover(const Space& space, const Region& U, double s, const Region& omega = Region::whole());

/**
 * Tents max(0, 1 - d(x, x_j)/(2s)) normalized by their sum.
 * lip_const is the largest |grad phi_j| at a node; on intervals
 * lip_adjacent is the largest difference quotient of any phi_j between
 * adjacent nodes, which bounds |phi_j(x) - phi_j(y)| / d(x,y) for all node pairs.
 */
struct PartitionOfUnity {
    const Cover* cover = nullptr;
    double lip_const = 0.0;
    double lip_adjacent = 0.0;
    double max_sum_error = 0.0;      // max |sum_j phi_j - 1| over U nodes
    std::size_t max_support_count = 0;
    std::vector<double> tent_sum;    // sum_j tent_j per node; phi_j is defined where it is positive

    /// phi_j at node x.
    double value(const Space& space, std::size_t j, std::size_t x) const;
};

PartitionOfUnity build_pou(const Space& space, const Cover& cover);

struct Convolution {
    SampledFunction h;                // values and exact gradients on U(5s) nodes
    std::vector<double> ball_means;   // f_{B_j}
    std::vector<double> lip;          // |grad h| per node (0 off U(5s))
    double l1_error = 0.0;            // ||h - f||_{L^1(mu, U)}
    double sup_error = 0.0;           // max |h - f| on U
};

/// h = sum_j f_{B_j} phi_j with exact ball averages.
Convolution discrete_convolution(const Space& space, const SampledFunction& f, const Cover& cover,
                                 const PartitionOfUnity& pou);

struct LipChainReport {
    double lhs = 0.0;          // int_U (Lip h)^p dmu
    double functional = 0.0;   // Phi_{p,q} with the window-power kernel of exponent pq at radius 10s
    double constant = 0.0;     // (60 C_d^37)^p
    double rhs = 0.0;          // constant * functional
    double C_d = 0.0;
    bool holds = false;
    // Pointwise audit of |h(x) - h(y)| on pairs inside a common ball.
    std::size_t pairs = 0;
    std::size_t chain_violations = 0;     // against L d sum_k |f_Bk - f_Bj|
    std::size_t majorant_violations = 0;  // against 6 C_d^19 (d/s) double average over 5B_j
    double chain_slack = 0.0;             // min over pairs of bound / |h(x) - h(y)| (inf if all zero)
    double majorant_slack = 0.0;
};

/// Interval spaces only for the pointwise audit; the integral terms work on both.
LipChainReport lip_chain_report(const Space& space, const SampledFunction& f, const Cover& cover,
                                const PartitionOfUnity& pou, double p, double q, std::size_t audit_pairs = 10000);

}  // namespace bbmlab
