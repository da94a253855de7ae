#pragma once

#include <vector>

#include "rmp/domain.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

enum class SupportKind { Points, SampledCurve };

struct ZeroSet {
    std::vector<std::vector<double>> points;  // cluster representatives, lexicographic
    std::vector<double> q_values;             // refined Q at each representative
    SupportKind kind = SupportKind::Points;
    std::size_t flagged_cells = 0;            // grid cells scoring below the flag threshold
};

// Zero set of the denominator polynomial. Each grid cell is scored by the
// minimum of Q over its center and 2^d corners, so zeros sitting exactly on
// cell edges or domain corners are caught even when no node value is small.
// Cells scoring below flag_rel * |Q|_inf seed a corner-inclusive descent and
// the refined points are clustered at radius cluster_rel * diam(K). A
// connected flagged component larger than 3n cells reads as a sampled curve
// rather than isolated points. Node-bound bases degrade to a node-value scan.
ZeroSet find_zero_set(const GridTableau& t, const CoefVector& qhat, double flag_rel = 1e-5,
                      double cluster_rel = 1e-4, int refine_depth = 10);

enum class Uniqueness { Unique, NonUnique, Undetermined };

struct AtomicPart {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    double residual = 0.0;  // |chat - sum_i a_i alpha(z_i)|_2
    // Unique requires isolated points, at most n atoms, and independent
    // dictionary columns at the atoms; curve support or rank deficiency is
    // NonUnique.
    Uniqueness uniqueness = Uniqueness::Undetermined;
};

// Nonnegative atomic decomposition of the singular moment vector over the
// zero-set dictionary, solved by active-set NNLS with lowest-index
// tie-breaking. Atoms with mass below prune_rel times the total are dropped.
// Throws RecoveryError when the residual exceeds
// residual_tol_rel * (1 + |chat|).
AtomicPart recover_atoms(const GridTableau& t, const MomentVector& chat, const ZeroSet& zeros,
                         double residual_tol_rel = 1e-6, double prune_rel = 1e-10);

struct DiscreteMeasure {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    double residual = 0.0;
};

// Representation of c by finitely many atoms: at most n for interior c
// (atoms drawn from the grid, minimum total mass, basic solution), at most
// n-1 for boundary c when the boundary witness is supplied (atoms drawn from
// the witness's refined zero set, and the system is solved in the hyperplane
// orthogonal to the witness). Throws RecoveryError when no atomic
// representation reproduces c within tolerance.
DiscreteMeasure discrete_measure(const GridTableau& t, const MomentVector& c,
                                 const CoefVector* boundary_witness = nullptr);

}  // namespace rmp
