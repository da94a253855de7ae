#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rmp::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Options {
    int max_iters = 50000;
    double feas_tol = 1e-9;    // phase-1 residual threshold, relative to 1 + |b|_1
    double cost_tol = 1e-9;    // reduced-cost threshold, relative to 1 + |c|_inf
    double pivot_tol = 1e-10;  // minimum acceptable pivot magnitude
};

struct Result {
    Status status = Status::IterationLimit;
    double objective = 0.0;
    Eigen::VectorXd x;       // primal solution, one entry per column of A
    Eigen::VectorXd y;       // row multipliers solving B' y = c_B at termination
    std::vector<int> basis;  // final basic column indices (artificials excluded, -1)
    int iterations = 0;
};

// min c'x subject to A x = b, x >= 0, by two-phase revised simplex with a
// dense refreshed basis factorization. Sized for few rows and possibly many
// columns. Deterministic: entering ties break toward the lowest column
// index, leaving ties toward the lowest basic column index, and persistent
// degeneracy switches pricing to Bland's rule.
Result solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
             const Options& opt = {});

}  // namespace rmp::lp
