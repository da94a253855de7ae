#pragma once

#include <optional>
#include <vector>

#include "rmp/recovery.hpp"
#include "rmp/solver.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

// Candidate measure dm = Phi dx + atoms in its Lebesgue decomposition. The
// two parts are stored separately; nothing is inferred between them.
struct DensityOnGrid {
    std::vector<double> values;          // Phi at the grid nodes
    std::optional<AtomicPart> singular;  // optional atomic part
};

// Entropy-like primal objective sum_j w_j P_j log Phi_j. Nodes with zero
// numerator weight contribute nothing (x log x -> 0 convention); a
// nonpositive Phi under positive numerator weight yields -inf. The atomic
// part never enters.
double primal_objective(const GridTableau& t, const CoefVector& p, const DensityOnGrid& density);

// sum_j w_j P_j log(P_j / Phi_j) with 0 log(0/.) := 0. Returns +inf when
// Phi vanishes where P does not. Can be negative: Phi need not integrate
// to one.
double kl_divergence(const GridTableau& t, const CoefVector& p, const DensityOnGrid& density);

// Moments of the candidate measure: sum_j w_j Phi_j alpha(x_j) plus the
// atomic contributions.
MomentVector density_moments(const GridTableau& t, const DensityOnGrid& density);

// |I_p(P/Q-hat) - J(q-hat) - sum_j w_j P_j (log P_j - 1)|. Zero in exact
// arithmetic at the dual minimizer up to the complementary slackness term;
// all three pieces use the same node sums, so the value reflects optimality
// rather than quadrature error. Nodes where P and Q-hat both vanish are
// excluded with their zero weight.
double duality_gap(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                   const SolveOutcome& outcome);

}  // namespace rmp
