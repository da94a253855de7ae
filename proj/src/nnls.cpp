#include "rmp/nnls.hpp"

#include <cmath>
#include <limits>

namespace rmp::nnls {

Result solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double grad_tol, int max_iters) {
    const int m = static_cast<int>(A.rows());
    const int N = static_cast<int>(A.cols());
    Result res;
    res.x = Eigen::VectorXd::Zero(N);
    if (max_iters < 0) max_iters = 3 * std::max(N, 8);
    if (grad_tol < 0.0) grad_tol = 1e-12 * (1.0 + (A.transpose() * b).cwiseAbs().maxCoeff());

    std::vector<char> passive(N, 0);
    Eigen::VectorXd resid = b;

    auto passive_solve = [&](Eigen::VectorXd& z) {
        std::vector<int> idx;
        for (int j = 0; j < N; ++j)
            if (passive[j]) idx.push_back(j);
        Eigen::MatrixXd Ap(m, static_cast<int>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<int>(k)) = A.col(idx[k]);
        Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        z.setZero(N);
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<int>(k)];
    };

    while (res.iterations < max_iters) {
        ++res.iterations;
        Eigen::VectorXd w = A.transpose() * resid;
        int enter = -1;
        double best = grad_tol;
        for (int j = 0; j < N; ++j)
            if (!passive[j] && w[j] > best) {
                best = w[j];
                enter = j;
            }
        if (enter < 0) break;  // KKT satisfied
        passive[enter] = 1;

        Eigen::VectorXd z;
        passive_solve(z);
        // Inner loop: walk back until the passive solution is nonnegative.
        while (true) {
            int worst = -1;
            double alpha = 1.0;
            for (int j = 0; j < N; ++j) {
                if (!passive[j] || z[j] > 0.0) continue;
                const double denom = res.x[j] - z[j];
                const double a = (denom > 0.0) ? res.x[j] / denom : 0.0;
                if (worst < 0 || a < alpha) {
                    alpha = a;
                    worst = j;
                }
            }
            if (worst < 0) break;
            res.x += alpha * (z - res.x);
            for (int j = 0; j < N; ++j)
                if (passive[j] && res.x[j] <= 0.0) {
                    res.x[j] = 0.0;
                    passive[j] = 0;
                }
            if (!passive[enter] && res.x[enter] <= 0.0) break;  // entering column rejected
            passive_solve(z);
        }
        if (passive[enter]) res.x = z;
        resid = b - A * res.x;
    }

    Eigen::VectorXd w = A.transpose() * resid;
    bool done = true;
    for (int j = 0; j < N; ++j)
        if (!passive[j] && w[j] > grad_tol) done = false;
    res.converged = done;
    res.residual = resid.norm();
    for (int j = 0; j < N; ++j)
        if (res.x[j] > 0.0) res.active.push_back(j);
    return res;
}

}  // namespace rmp::nnls
