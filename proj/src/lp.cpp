#include "rmp/lp.hpp"

#include <cmath>
#include <limits>

#include "rmp/errors.hpp"

namespace rmp::lp {
namespace {

// Working problem: original columns 0..N-1, artificials N..N+m-1. Rows are
// pre-flipped so b >= 0 and the artificial block is the identity.
struct Work {
    const Eigen::MatrixXd& A;
    Eigen::VectorXd b;
    int m, N;
    std::vector<int> basis;  // size m, values in [0, N+m)
    Eigen::VectorXd xB;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;

    // Expects rows pre-flipped so b >= 0.
    explicit Work(const Eigen::MatrixXd& A_, const Eigen::VectorXd& b_)
        : A(A_), b(b_), m(static_cast<int>(A_.rows())), N(static_cast<int>(A_.cols())) {
        basis.resize(m);
        for (int i = 0; i < m; ++i) basis[i] = N + i;
        xB = b;
    }

    Eigen::VectorXd column(int j) const {
        if (j < N) return A.col(j);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[j - N] = 1.0;
        return e;
    }

    void refactor() {
        Eigen::MatrixXd B(m, m);
        for (int i = 0; i < m; ++i) B.col(i) = column(basis[i]);
        lu.compute(B);
        xB = lu.solve(b);
    }
};

// One simplex phase on the given costs. Columns with allow[j] == false never
// enter. Returns the terminal status of the phase.
Status run_phase(Work& w, const Eigen::VectorXd& cost, const std::vector<char>& allow,
                 const Options& opt, int& iters) {
    const int total = w.N + w.m;
    const double rtol = opt.cost_tol * (1.0 + cost.cwiseAbs().maxCoeff());
    int degenerate_streak = 0;
    const int bland_after = 2 * w.m + 10;

    while (iters < opt.max_iters) {
        ++iters;
        w.refactor();

        Eigen::VectorXd cB(w.m);
        for (int i = 0; i < w.m; ++i) cB[i] = cost[w.basis[i]];
        Eigen::VectorXd y = w.lu.transpose().solve(cB);

        const bool bland = degenerate_streak > bland_after;
        int enter = -1;
        double best = -rtol;
        for (int j = 0; j < total; ++j) {
            if (!allow[j]) continue;
            bool basic = false;
            for (int i = 0; i < w.m; ++i)
                if (w.basis[i] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            const double rj = cost[j] - w.column(j).dot(y);
            if (bland) {
                if (rj < -rtol) {
                    enter = j;
                    break;
                }
            } else if (rj < best) {
                best = rj;
                enter = j;
            }
        }
        if (enter < 0) return Status::Optimal;

        Eigen::VectorXd d = w.lu.solve(w.column(enter));

        // Ratio test; basic artificials that would grow are forced out first.
        int leave = -1;
        double step = std::numeric_limits<double>::infinity();
        for (int i = 0; i < w.m; ++i) {
            if (w.basis[i] >= w.N && d[i] < -opt.pivot_tol) {
                leave = i;
                step = 0.0;
                break;
            }
        }
        if (leave < 0) {
            for (int i = 0; i < w.m; ++i) {
                if (d[i] <= opt.pivot_tol) continue;
                const double ratio = std::max(w.xB[i], 0.0) / d[i];
                if (ratio < step - 1e-15 ||
                    (ratio < step + 1e-15 && (leave < 0 || w.basis[i] < w.basis[leave]))) {
                    step = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return Status::Unbounded;

        degenerate_streak = (step <= opt.pivot_tol) ? degenerate_streak + 1 : 0;
        w.basis[leave] = enter;
    }
    return Status::IterationLimit;
}

}  // namespace

Result solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
             const Options& opt) {
    const int m = static_cast<int>(A.rows());
    const int N = static_cast<int>(A.cols());
    if (b.size() != m || c.size() != N)
        throw DomainError("linear program shape mismatch");

    // Flip rows with negative right-hand side so artificials start feasible.
    Eigen::MatrixXd Aw = A;
    Eigen::VectorXd bw = b;
    for (int i = 0; i < m; ++i)
        if (bw[i] < 0.0) {
            bw[i] = -bw[i];
            Aw.row(i) = -Aw.row(i);
        }

    Work w(Aw, bw);
    Result res;
    res.x = Eigen::VectorXd::Zero(N);
    res.y = Eigen::VectorXd::Zero(m);

    // Phase 1: drive sum of artificials to zero.
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(N + m);
    for (int i = 0; i < m; ++i) cost1[N + i] = 1.0;
    std::vector<char> allow(N + m, 1);
    Status s1 = run_phase(w, cost1, allow, opt, res.iterations);
    if (s1 == Status::IterationLimit) {
        res.status = s1;
        return res;
    }
    w.refactor();
    double art_sum = 0.0;
    for (int i = 0; i < w.m; ++i)
        if (w.basis[i] >= N) art_sum += std::max(w.xB[i], 0.0);
    if (art_sum > opt.feas_tol * (1.0 + bw.lpNorm<1>())) {
        res.status = Status::Infeasible;
        return res;
    }

    // Pivot residual artificials out where a usable pivot exists; rows that
    // offer none are redundant and keep a zero-level artificial whose cost
    // stays zero in phase 2.
    for (int i = 0; i < w.m; ++i) {
        if (w.basis[i] < N) continue;
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(w.m);
        ei[i] = 1.0;
        Eigen::VectorXd u = w.lu.transpose().solve(ei);
        int found = -1;
        for (int j = 0; j < N && found < 0; ++j) {
            bool basic = false;
            for (int k = 0; k < w.m; ++k)
                if (w.basis[k] == j) {
                    basic = true;
                    break;
                }
            if (!basic && std::fabs(u.dot(Aw.col(j))) > opt.pivot_tol) found = j;
        }
        if (found >= 0) {
            w.basis[i] = found;
            w.refactor();
        }
    }

    // Phase 2 on the true costs; artificials may stay basic at level zero
    // but never enter.
    Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(N + m);
    cost2.head(N) = c;
    for (int j = N; j < N + m; ++j) allow[j] = 0;
    Status s2 = run_phase(w, cost2, allow, opt, res.iterations);
    res.status = s2;
    if (s2 != Status::Optimal && s2 != Status::Unbounded) return res;

    w.refactor();
    res.basis.assign(w.m, -1);
    for (int i = 0; i < w.m; ++i) {
        if (w.basis[i] < N) {
            res.basis[i] = w.basis[i];
            res.x[w.basis[i]] = std::max(w.xB[i], 0.0);
        }
    }
    Eigen::VectorXd cB(w.m);
    for (int i = 0; i < w.m; ++i) cB[i] = cost2[w.basis[i]];
    Eigen::VectorXd yw = w.lu.transpose().solve(cB);
    // Undo the row flips so multipliers refer to the caller's rows.
    for (int i = 0; i < m; ++i) res.y[i] = (b[i] < 0.0) ? -yw[i] : yw[i];
    res.objective = c.dot(res.x);
    return res;
}

}  // namespace rmp::lp
