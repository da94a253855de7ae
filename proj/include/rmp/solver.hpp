#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "rmp/cones.hpp"
#include "rmp/domain.hpp"
#include "rmp/quadrature.hpp"
#include "rmp/recovery.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

struct SolverOptions {
    int max_iters = 200;
    double grad_tol_rel = 1e-9;  // gradient tolerance, scaled by 1 + |c|
    double armijo_c = 1e-4;
    double shrink = 0.5;  // backtracking factor
    int max_backtracks = 60;
    // Refined min Q / |Q|_inf below this flags a boundary minimizer.
    double tau_boundary = 1e-5;
    double tikhonov_rel = 1e-12;  // ridge seed, relative to trace(H)/n
    double cond_limit = 1e14;
    int cond_patience = 3;  // consecutive over-limit Hessians tolerated
    bool polish = true;     // null-space Newton on the detected zero constraints
    int zero_refine_depth = 10;
    double constraint_rank_rel = 1e-4;  // singular value cut for the zero constraints
    kernels::Kind kernel = kernels::Kind::Auto;
    std::optional<Eigen::VectorXd> q0;  // custom start; must be node-feasible
};

struct IterRecord {
    int iter = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;   // accepted step length
    double min_q = 0.0;  // min node Q over nodes carrying numerator mass
    double max_q = 0.0;  // max node |Q|
};

struct KktRecord {
    bool feasibility_ok = false;
    double moment_residual_norm = 0.0;
    double slackness = 0.0;
};

struct SolveOutcome {
    CoefVector q_hat;
    bool converged = false;
    int iterations = 0;
    double objective_value = 0.0;
    MomentVector gradient_residual;  // c - f^p(q_hat); the singular-part candidate
    double gradient_norm = 0.0;
    bool boundary = false;
    ZeroSet zero_set;  // empty when interior
    KktRecord kkt;
    bool polished = false;        // boundary stationarity re-solved on the zero constraints
    bool split_residual = false;  // residual read off the near-zero nodes (polish fallback)
    std::vector<std::string> warnings;
    std::vector<IterRecord> trace;
};

// Damped Newton minimization of <c,q> - sum_j w_j P_j log Q(x_j) over the
// node-feasible cone. The node log terms act as an intrinsic barrier;
// boundary minimizers show up as a refined min of Q below tau_boundary and
// are finished by a reduced Newton step on the null space of the zero-set
// constraints. Non-convergence is reported in the outcome, not thrown; an
// exhausted Hessian regularization budget away from the boundary throws
// IllConditionedError.
SolveOutcome solve_dual(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                        const SolverOptions& opts = {});

struct KktReport {
    bool feasibility_ok = false;  // q_hat stays nonnegative over K (refined)
    double min_q_value = 0.0;
    double moment_residual_norm = 0.0;  // |c - f^p(q_hat) - chat|
    bool moment_ok = false;
    double slackness = 0.0;  // <chat, q_hat>
    bool slackness_ok = false;
    ConeRegion residual_region = ConeRegion::Exterior;
    bool residual_ok = false;  // chat sits on the moment cone boundary (or is 0)
    bool all_ok = false;
};

// Recomputes the optimality system from scratch: cone membership of q_hat,
// the moment identity against a fresh tableau evaluation, complementary
// slackness, and the cone position of the residual.
KktReport kkt_verify(const GridTableau& t, const SolveOutcome& outcome, const MomentVector& c,
                     const CoefVector& p);

// Forward map (grid sums, no refinement) then inverse solve; returns the
// recovered denominator coefficients.
CoefVector roundtrip(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                     const SolverOptions& opts = {});

struct ProbeRow {
    double t = 0.0;
    CoefVector q_hat;
    double drift = 0.0;  // |q_hat(t) - q_hat(0)|_inf
};

struct ProbeTable {
    std::vector<ProbeRow> rows;
    bool truncated = false;  // a probed numerator left the cone
};

// Solves with numerator p + t*direction for t = 0 and each probe value,
// stopping early (flagged) if the perturbed numerator leaves the cone.
ProbeTable continuity_probe(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                            const CoefVector& direction, const std::vector<double>& steps,
                            const SolverOptions& opts = {});

}  // namespace rmp
