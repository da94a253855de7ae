#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rmp/domain.hpp"

namespace rmp::refine {

struct Sample {
    std::vector<double> x;
    double value = 0.0;
};

// Minimum of the polynomial with coefficients `coef` over the closed cell
// center +- half, found by recursive subdivision. Sampling includes cell
// corners, so zeros sitting on the domain boundary are reached exactly.
// `branch` children per axis and `depth` levels; the two best children are
// explored at the top levels to reduce greedy misses.
Sample cell_min(const BasisSystem& basis, const Eigen::VectorXd& coef,
                const std::vector<double>& center, const std::vector<double>& half, int depth,
                int branch = 2);

struct RatioIntegralOptions {
    int max_depth = 12;
    double rel_tol = 1e-9;    // per-cell stop on the scalar ratio estimate
    double abs_tol = 1e-14;   // absolute floor for the stop test
    // |P| at a non-positive denominator below this (relative to p_scale)
    // counts as a removable 0/0 and contributes nothing.
    double zero_ratio_rel = 1e-9;
    double p_scale = 1.0;
    double q_scale = 1.0;
};

// Integral over the cell of alpha_k(x) * P(x)/Q(x) dx for every k, by
// adaptive midpoint subdivision (split 4 per axis in 1-d, 2 per axis
// otherwise, Richardson-accelerated). Adds wscale * integral into acc.
// Throws InfeasibleDenominator when Q < 0 in a region where P carries mass.
void cell_ratio_integral(const BasisSystem& basis, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q, const std::vector<double>& center,
                         const std::vector<double>& half, const RatioIntegralOptions& opt,
                         double wscale, Eigen::VectorXd& acc);

}  // namespace rmp::refine
