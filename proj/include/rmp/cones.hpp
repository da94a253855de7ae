#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmp/domain.hpp"
#include "rmp/lp.hpp"
#include "rmp/tableau.hpp"

namespace rmp {

enum class ConeRegion { Interior, Boundary, Exterior };

std::string region_name(ConeRegion r);

struct ConeOptions {
    // |V| below tol_rel * (1 + |c|_inf) reads as boundary.
    double tol_rel = 1e-8;
    int exchange_rounds = 10;
    // Scan/refine parameters for the witness positivity check.
    int scan_per_axis = 0;  // 0: use the tableau grid resolution
    int refine_depth = 6;
    double exchange_tol_rel = 1e-9;
    lp::Options lp;
};

struct ConeReport {
    ConeRegion region = ConeRegion::Exterior;
    double value = 0.0;   // V: min <c,p> over unit-mass nonneg polynomials
    CoefVector witness;   // attaining p, normalized to <c0,p> = 1
    double witness_min = 0.0;  // refined min of the witness over K
    std::vector<std::vector<double>> added_points;  // exchange-round columns
    int rounds = 0;
    int lp_iterations = 0;
    std::optional<double> lambda_hat;  // filled by dual_lambda callers
};

// Distance-like positioning of c against the moment cone: V > 0 interior,
// V = 0 boundary, V < 0 exterior. Semi-infinite LP solved on the tableau
// grid with an exchange loop that appends refined violation points of the
// current witness until the witness is nonnegative on K. c0 defaults to the
// tableau's reference-measure moments.
ConeReport classify_moment(const GridTableau& t, const MomentVector& c,
                           const ConeOptions& opt = {});
ConeReport classify_moment(const GridTableau& t, const MomentVector& c, const MomentVector& c0,
                           const ConeOptions& opt = {});

struct PolyMin {
    double value = 0.0;
    std::vector<double> point;
};

// Global minimum of the coefficient polynomial over K by a coarse scan plus
// corner-inclusive cell descent on the most promising cells.
PolyMin polynomial_min(const BasisSystem& basis, const CoefVector& p,
                       const std::vector<int>& scan_resolution, int depth = 6);

struct PolyCheck {
    ConeRegion region = ConeRegion::Interior;
    double min_value = 0.0;
    std::vector<double> argmin;
};

// Sign classification of Q over K: node scan plus corner-inclusive local
// refinement of the low cells. Interior if the refined min exceeds
// tol_rel * |Q|_inf, exterior if it falls below the negative of that, else
// boundary.
PolyCheck polynomial_cone_check(const GridTableau& t, const CoefVector& q, double tol_rel = 1e-9,
                                int refine_depth = 6);

// Largest shift along -c0 keeping c - lambda*c0 out of the exterior,
// located by bisection on classification flags alone (never on V values).
// Agrees with classify_moment(...).value when the pairing has no gap.
// Throws DomainError when [lo, hi] fails to bracket the crossing.
double dual_lambda(const GridTableau& t, const MomentVector& c, const ConeOptions& opt = {},
                   double lo = -1e6, double hi = 1e6, double tol = 1e-6);
double dual_lambda(const GridTableau& t, const MomentVector& c, const MomentVector& c0,
                   const ConeOptions& opt = {}, double lo = -1e6, double hi = 1e6,
                   double tol = 1e-6);

// Independent verdict for the 1-d cosine family with contiguous indices
// 0..n-1: eigenvalue sign of the symmetric Toeplitz matrix built from c.
// nullopt when the family does not match that shape.
std::optional<ConeRegion> toeplitz_cross_check(const BasisSystem& basis, const MomentVector& c,
                                               double tol_rel = 1e-10);

}  // namespace rmp
