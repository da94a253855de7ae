#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rmp::nnls {

struct Result {
    Eigen::VectorXd x;        // x >= 0 minimizing |A x - b|
    double residual = 0.0;    // |A x - b|_2 at the solution
    std::vector<int> active;  // indices with x > 0, ascending
    int iterations = 0;
    bool converged = true;
};

// Nonnegative least squares by active-set descent. Deterministic: the most
// violating gradient entry enters, ties break toward the lowest index.
Result solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double grad_tol = -1.0,
             int max_iters = -1);

}  // namespace rmp::nnls
