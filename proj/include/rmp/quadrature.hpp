#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rmp/domain.hpp"
#include "rmp/kernels.hpp"
#include "rmp/refine.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

struct QuadratureOptions {
    // Cells whose node denominator is below trigger_rel * max_j Q_j are
    // re-integrated adaptively (midpoint rule only).
    double trigger_rel = 5e-2;
    int refine_depth = 12;
    double cell_rel_tol = 1e-9;
    bool allow_refinement = true;
    kernels::Kind kernel = kernels::Kind::Auto;
};

// f^p(q): integrals of alpha_k * P/Q against the reference measure, with
// adaptive local refinement where Q is small. Throws InfeasibleDenominator
// when Q <= 0 at a node carrying numerator mass, and DomainError when p is
// identically zero on the grid.
MomentVector moment_map(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                        const QuadratureOptions& opt = {});

struct ObjectiveReport {
    double value = 0.0;  // +inf when infeasible
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // empty unless requested
    bool feasible = true;
    std::size_t worst_node = 0;  // node of the violating denominator
    double min_q = 0.0;          // min Q over nodes carrying numerator mass
};

// Dual objective <c,q> - sum_j w_j P_j log Q_j on the tableau grid, with
// gradient c - f^p(q) (unrefined grid sums; the refined moment map is a
// separate evaluation). Infeasible q yields value = +inf and no derivatives.
ObjectiveReport objective(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                          const CoefVector& q, bool want_hessian = false,
                          kernels::Kind kernel = kernels::Kind::Auto);

Eigen::MatrixXd hessian_only(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                             kernels::Kind kernel = kernels::Kind::Auto);

enum class DivergenceVerdict { Divergent, Convergent, Inconclusive };

struct DivergenceReport {
    DivergenceVerdict verdict = DivergenceVerdict::Inconclusive;
    std::vector<double> estimates;  // integral of 1/Q at doubling resolutions
};

// Grid estimates of the mass integral of 1/Q at doubling resolutions.
// Growth by >= growth_factor at every step reads as divergent; agreement of
// the last two steps within stabilize_rel reads as convergent (needs at
// least two refinements).
DivergenceReport divergence_diagnostic(const BasisSystem& basis, const CoefVector& q,
                                       std::vector<int> base_resolution, int refinements = 2,
                                       double growth_factor = 1.5, double stabilize_rel = 1e-2);

}  // namespace rmp
