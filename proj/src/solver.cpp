#include "rmp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "rmp/errors.hpp"
#include "rmp/lp.hpp"

namespace rmp {
namespace {

constexpr double kTiny = 1e-300;

struct NodeData {
    std::vector<double> P;     // numerator at nodes
    std::vector<double> mask;  // w_j * P_j, the barrier mask
    double eps_p = 0.0;        // sum_j w_j P_j
};

NodeData numerator_table(const GridTableau& t, const CoefVector& p, const kernels::Ops& ops) {
    NodeData nd;
    nd.P.resize(t.node_count);
    t.eval_poly(p.v, nd.P.data(), ops);
    nd.mask.resize(t.node_count);
    for (std::size_t j = 0; j < t.node_count; ++j) nd.mask[j] = t.weights[j] * nd.P[j];
    nd.eps_p = ops.sum(nd.mask.data(), t.node_count);
    return nd;
}

double masked_min_q(const GridTableau& t, const Eigen::VectorXd& q, const NodeData& nd,
                    const kernels::Ops& ops, std::vector<double>& scratch) {
    scratch.resize(t.node_count);
    t.eval_poly(q, scratch.data(), ops);
    std::size_t arg = 0;
    return ops.masked_min(scratch.data(), nd.mask.data(), t.node_count, &arg);
}

// alpha(x) for constraint rows; node-bound families look the point up on
// their grid.
void eval_alpha(const GridTableau& t, const std::vector<double>& x, double* out) {
    if (t.basis->off_grid_capable()) {
        t.basis->evaluate(x.data(), out);
        return;
    }
    std::size_t j = 0;
    for (int a = 0; a < t.dim(); ++a) {
        const auto& [lo, hi] = t.basis->box().bounds[a];
        const double h = (hi - lo) / t.resolution[a];
        long i = std::lround((x[a] - lo) / h - 0.5);
        i = std::max(0l, std::min(static_cast<long>(t.resolution[a]) - 1, i));
        j = j * static_cast<std::size_t>(t.resolution[a]) + static_cast<std::size_t>(i);
    }
    for (int k = 0; k < t.n; ++k) out[k] = t.cols[k][j];
}

// Direction maximizing the worst masked node value of Q within the column
// span of B, normalized to <r, u> = 1. Solved through the (k+1)-row dual
// program; the primal direction is read off the row multipliers. Empty when
// the program fails or the best margin is not positive.
std::optional<Eigen::VectorXd> max_margin_direction(const GridTableau& t, const Eigen::MatrixXd& B,
                                                    const Eigen::VectorXd& r, const NodeData& nd) {
    const int k = static_cast<int>(B.cols());
    if (k == 0 || r.lpNorm<Eigen::Infinity>() <= 0.0) return std::nullopt;
    std::vector<std::size_t> nodes;
    for (std::size_t j = 0; j < t.node_count; ++j)
        if (nd.mask[j] > 0.0) nodes.push_back(j);
    if (nodes.empty()) return std::nullopt;

    const int NC = static_cast<int>(nodes.size());
    Eigen::MatrixXd A(k + 1, NC + 2);
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(NC + 2);
    Eigen::VectorXd alpha(t.n);
    for (int i = 0; i < NC; ++i) {
        for (int kk = 0; kk < t.n; ++kk) alpha[kk] = t.cols[kk][nodes[i]];
        A.col(i).head(k) = B.transpose() * alpha;
        A(k, i) = 1.0;
    }
    A.col(NC).head(k) = -r;
    A(k, NC) = 0.0;
    A.col(NC + 1).head(k) = r;
    A(k, NC + 1) = 0.0;
    cost[NC] = 1.0;
    cost[NC + 1] = -1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
    b[k] = 1.0;

    lp::Result sol = lp::solve(A, b, cost);
    if (sol.status != lp::Status::Optimal) return std::nullopt;
    if (!(sol.objective > 0.0)) return std::nullopt;  // no strictly positive direction
    Eigen::VectorXd u = -sol.y.head(k);
    const double s = r.dot(u);
    if (!(std::fabs(s) > 1e-12)) return std::nullopt;
    u /= s;
    return u;
}

enum class StopReason { GradConverged, Stall, IllConditioned, MaxIters };

struct NewtonState {
    Eigen::VectorXd u;    // coordinates in the B-parameterization
    ObjectiveReport rep;  // full-space report at B*u
    StopReason reason = StopReason::MaxIters;
    double last_cond = 0.0;
    double reduced_grad_norm = 0.0;
};

// Damped Newton on J(B*u). The node log terms keep iterates strictly
// feasible; the Armijo test rejects any trial that crosses a masked node.
NewtonState newton_minimize(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                            const Eigen::MatrixXd& B, Eigen::VectorXd u0, double gtol,
                            const SolverOptions& opts, const kernels::Ops& ops,
                            std::vector<IterRecord>& trace, int& iter_counter) {
    const int k = static_cast<int>(B.cols());
    if (k == 0) throw DomainError("Newton parameterization has no degrees of freedom");
    NewtonState st;
    st.u = std::move(u0);
    std::vector<double> scratch(t.node_count);

    auto eval_full = [&](const Eigen::VectorXd& u, bool hess) {
        return objective(t, c, p, CoefVector(B * u), hess, opts.kernel);
    };
    auto record = [&](double step_len) {
        IterRecord row;
        row.iter = iter_counter++;
        row.objective = st.rep.value;
        row.grad_norm = (B.transpose() * st.rep.gradient).norm();
        row.step = step_len;
        row.min_q = st.rep.min_q;
        t.eval_poly(B * st.u, scratch.data(), ops);
        row.max_q = ops.max_abs(scratch.data(), t.node_count);
        trace.push_back(row);
    };

    st.rep = eval_full(st.u, true);
    if (!st.rep.feasible) throw DomainError("Newton start is infeasible on the grid");
    record(0.0);

    int ill_streak = 0;
    for (int it = 0; it < opts.max_iters; ++it) {
        Eigen::VectorXd g = B.transpose() * st.rep.gradient;
        st.reduced_grad_norm = g.norm();
        if (st.reduced_grad_norm <= gtol) {
            st.reason = StopReason::GradConverged;
            return st;
        }

        Eigen::MatrixXd H = B.transpose() * st.rep.hessian * B;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success)
            throw IllConditionedError("Newton system eigendecomposition failed",
                                      std::numeric_limits<double>::infinity());
        const Eigen::VectorXd& lam = es.eigenvalues();
        const double lmax = lam[k - 1];
        const double lmin = lam[0];
        st.last_cond = lmax / std::max(lmin, kTiny);
        const double floor_ev = std::max(lmax, kTiny) / opts.cond_limit;
        double ridge = 0.0;
        if (lmin <= floor_ev) {
            ridge = std::max(opts.tikhonov_rel * std::max(H.trace(), kTiny) / k,
                             floor_ev - lmin);
            ++ill_streak;
            if (ill_streak > opts.cond_patience) {
                st.reason = StopReason::IllConditioned;
                return st;
            }
        } else {
            ill_streak = 0;
        }

        Eigen::VectorXd gz = es.eigenvectors().transpose() * g;
        for (int i = 0; i < k; ++i) gz[i] = -gz[i] / (lam[i] + ridge);
        Eigen::VectorXd delta = es.eigenvectors() * gz;
        double gd = g.dot(delta);
        if (!(gd < 0.0)) {
            delta = -g / std::max(lmax, kTiny);  // curvature fallback
            gd = g.dot(delta);
        }

        double s = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt, s *= opts.shrink) {
            ObjectiveReport trial = eval_full(st.u + s * delta, false);
            if (!trial.feasible) continue;
            if (trial.value <= st.rep.value + opts.armijo_c * s * gd) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            st.reason = StopReason::Stall;
            return st;
        }
        st.u += s * delta;
        st.rep = eval_full(st.u, true);
        record(s);
        if (s * delta.lpNorm<Eigen::Infinity>() <=
            1e-13 * (1.0 + st.u.lpNorm<Eigen::Infinity>())) {
            st.reduced_grad_norm = (B.transpose() * st.rep.gradient).norm();
            st.reason = StopReason::Stall;
            return st;
        }
    }
    st.reduced_grad_norm = (B.transpose() * st.rep.gradient).norm();
    st.reason = StopReason::MaxIters;
    return st;
}

Eigen::VectorXd least_squares_constant(const GridTableau& t, const kernels::Ops& ops) {
    const int n = t.n;
    Eigen::MatrixXd G(n, n);
    Eigen::VectorXd rhs(n);
    std::vector<double> ones(t.node_count, 1.0);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            G(a, b) = ops.dot(t.cols[a].data(), t.cols[b].data(), t.node_count);
            G(b, a) = G(a, b);
        }
        rhs[a] = ops.dot(t.cols[a].data(), ones.data(), t.node_count);
    }
    return G.ldlt().solve(rhs);
}

// Singular moment mass read directly off the near-zero nodes; used when the
// null-space polish is unavailable.
Eigen::VectorXd split_residual_estimate(const GridTableau& t, const Eigen::VectorXd& q,
                                        const NodeData& nd, const kernels::Ops& ops,
                                        double band_rel) {
    std::vector<double> Q(t.node_count);
    t.eval_poly(q, Q.data(), ops);
    const double qmax = ops.max_abs(Q.data(), t.node_count);
    const double band = band_rel * qmax;
    Eigen::VectorXd chat = Eigen::VectorXd::Zero(t.n);
    for (std::size_t j = 0; j < t.node_count; ++j) {
        if (nd.mask[j] <= 0.0 || Q[j] >= band || Q[j] <= 0.0) continue;
        const double s = nd.mask[j] / Q[j];
        for (int k = 0; k < t.n; ++k) chat[k] += s * t.cols[k][j];
    }
    return chat;
}

}  // namespace

SolveOutcome solve_dual(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                        const SolverOptions& opts) {
    if (c.size() != t.n || p.size() != t.n)
        throw DomainError("moment or coefficient vector length does not match the basis size");
    const auto& ops = kernels::select(opts.kernel);
    if (p.v.lpNorm<Eigen::Infinity>() == 0.0)
        throw DomainError("numerator coefficients are all zero");
    {
        PolyCheck pc = polynomial_cone_check(t, p);
        if (pc.region == ConeRegion::Exterior)
            throw DomainError("numerator polynomial is negative somewhere on K");
    }

    SolveOutcome out;
    if (c.v.dot(p.v) <= 0.0)
        out.warnings.push_back(
            "pairing <c,p> is not positive; c is unlikely to be an interior moment vector");

    NodeData nd = numerator_table(t, p, ops);
    if (!(nd.eps_p > 0.0)) throw DomainError("numerator vanishes on the whole grid");
    const double gtol = opts.grad_tol_rel * (1.0 + c.v.norm());
    std::vector<double> scratch;

    // Initialization: prefer a direction with Q roughly constant, fall back
    // to the numerator itself, then to a max-margin direction. The scale
    // t* = eps_p / <c,u> minimizes the objective along the ray t*u.
    Eigen::VectorXd q_init;
    if (opts.q0) {
        if (opts.q0->size() != t.n)
            throw DomainError("custom start length does not match the basis size");
        if (!(masked_min_q(t, *opts.q0, nd, ops, scratch) > 0.0))
            throw DomainError("custom start is infeasible on the grid");
        q_init = *opts.q0;
    } else {
        std::vector<Eigen::VectorXd> candidates;
        {
            Eigen::VectorXd u = least_squares_constant(t, ops);
            if (u.allFinite() && masked_min_q(t, u, nd, ops, scratch) > 0.5) candidates.push_back(u);
        }
        if (masked_min_q(t, p.v, nd, ops, scratch) > 0.0) candidates.push_back(p.v);
        if (candidates.empty() || c.v.dot(candidates.front()) <= 0.0) {
            auto u = max_margin_direction(t, Eigen::MatrixXd::Identity(t.n, t.n),
                                          t.basis_moments, nd);
            if (u) candidates.push_back(*u);
        }
        bool placed = false;
        for (const Eigen::VectorXd& u : candidates) {
            const double cu = c.v.dot(u);
            if (cu <= 0.0) continue;
            q_init = (nd.eps_p / cu) * u;
            placed = true;
            break;
        }
        if (!placed) {
            if (candidates.empty())
                throw DomainError("no strictly feasible starting denominator found");
            throw DomainError(
                "the objective is unbounded below along a feasible ray: c does not pair "
                "positively with any starting direction");
        }
    }

    int iter_counter = 0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(t.n, t.n);
    NewtonState s1 =
        newton_minimize(t, c, p, I, q_init, gtol, opts, ops, out.trace, iter_counter);

    // Boundary detection: refined minimum of the current denominator.
    scratch.resize(t.node_count);
    t.eval_poly(s1.u, scratch.data(), ops);
    double qmax = ops.max_abs(scratch.data(), t.node_count);
    PolyCheck chk = polynomial_cone_check(t, CoefVector(s1.u), 1e-12, opts.zero_refine_depth);
    const bool flag_boundary = chk.min_value < opts.tau_boundary * std::max(qmax, kTiny);

    if (!flag_boundary) {
        out.q_hat = CoefVector(s1.u);
        out.iterations = iter_counter;
        out.objective_value = s1.rep.value;
        out.gradient_residual = MomentVector(s1.rep.gradient);
        out.gradient_norm = s1.rep.gradient.norm();
        out.boundary = false;
        out.converged = s1.reason == StopReason::GradConverged;
        if (s1.reason == StopReason::IllConditioned)
            throw IllConditionedError(
                "Newton system condition exceeded the limit away from the cone boundary; a "
                "finer grid may be needed",
                s1.last_cond);
        if (s1.reason == StopReason::Stall)
            out.warnings.push_back("line search stalled before reaching the gradient tolerance");
        if (s1.reason == StopReason::MaxIters)
            out.warnings.push_back("iteration limit reached; gradient norm " +
                                   std::to_string(s1.reduced_grad_norm) + ", min node Q " +
                                   std::to_string(s1.rep.min_q));
        out.kkt.feasibility_ok = chk.min_value >= -1e-9 * std::max(qmax, 1.0);
        out.kkt.moment_residual_norm = 0.0;
        out.kkt.slackness = out.gradient_residual.v.dot(out.q_hat.v);
        return out;
    }

    // Boundary path: constrain the refined zeros of Q-hat to exact zero and
    // re-solve in the null space of those constraints.
    out.boundary = true;
    ZeroSet zeros1 =
        find_zero_set(t, CoefVector(s1.u), opts.tau_boundary, 1e-4, opts.zero_refine_depth);

    bool adopted_polish = false;
    if (opts.polish && !zeros1.points.empty()) {
        // The flag threshold admits near-miss cells whose refined Q stays
        // well above the depth the iterate actually reached; constraining
        // those would tilt the null space off the active facet. Keep only
        // representatives within a few multiples of that depth, and snap
        // row entries below it to exact zero: at this resolution they are
        // indistinguishable from a vanishing basis value.
        const double depth = 4.0 * std::fabs(chk.min_value);
        std::vector<std::size_t> keep;
        if (zeros1.q_values.size() == zeros1.points.size()) {
            for (std::size_t i = 0; i < zeros1.points.size(); ++i)
                if (zeros1.q_values[i] <= depth) keep.push_back(i);
        }
        if (keep.empty()) {
            keep.resize(zeros1.points.size());
            for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
        }
        const int Z = static_cast<int>(keep.size());
        const double snap = depth / std::max(s1.u.lpNorm<Eigen::Infinity>(), 1e-300);
        Eigen::MatrixXd C(Z, t.n);
        std::vector<double> alpha(t.n);
        for (int i = 0; i < Z; ++i) {
            eval_alpha(t, zeros1.points[keep[static_cast<std::size_t>(i)]], alpha.data());
            for (int k = 0; k < t.n; ++k)
                C(i, k) = std::fabs(alpha[k]) <= snap ? 0.0 : alpha[k];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
        const Eigen::VectorXd& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > opts.constraint_rank_rel * sv[0]) ++rank;
        const int freedom = t.n - rank;
        if (freedom > 0) {
            Eigen::MatrixXd N = svd.matrixV().rightCols(freedom);
            // Feasibility restoration: project the stage-1 iterate onto the
            // null space; if the projection crosses a masked node, take the
            // max-margin direction instead.
            bool restored = false;
            Eigen::VectorXd q_r = N * (N.transpose() * s1.u);
            if (masked_min_q(t, q_r, nd, ops, scratch) > 0.0 && c.v.dot(q_r) > 0.0) {
                restored = true;
            } else {
                Eigen::VectorXd r = N.transpose() * t.basis_moments;
                if (r.lpNorm<Eigen::Infinity>() <= 1e-14) r = N.transpose() * c.v;
                auto u = max_margin_direction(t, N, r, nd);
                if (u) {
                    Eigen::VectorXd dir = N * (*u);
                    const double cu = c.v.dot(dir);
                    if (cu > 0.0) {
                        q_r = (nd.eps_p / cu) * dir;
                        restored = true;
                    }
                }
            }
            if (restored) {
                NewtonState s2 = newton_minimize(t, c, p, N, N.transpose() * q_r, gtol, opts,
                                                 ops, out.trace, iter_counter);
                if (s2.reason == StopReason::GradConverged) {
                    adopted_polish = true;
                    Eigen::VectorXd q_hat = N * s2.u;
                    out.q_hat = CoefVector(q_hat);
                    out.iterations = iter_counter;
                    out.objective_value = s2.rep.value;
                    out.gradient_residual = MomentVector(s2.rep.gradient);
                    out.gradient_norm = s2.reduced_grad_norm;
                    out.converged = true;
                    out.polished = true;
                    out.zero_set = find_zero_set(t, out.q_hat, opts.tau_boundary, 1e-4,
                                                 opts.zero_refine_depth);
                    t.eval_poly(q_hat, scratch.data(), ops);
                    qmax = ops.max_abs(scratch.data(), t.node_count);
                    PolyCheck chk2 =
                        polynomial_cone_check(t, out.q_hat, 1e-12, opts.zero_refine_depth);
                    out.kkt.feasibility_ok = chk2.min_value >= -1e-9 * std::max(qmax, 1.0);
                    out.kkt.moment_residual_norm = 0.0;
                    out.kkt.slackness = out.gradient_residual.v.dot(out.q_hat.v);
                } else {
                    out.warnings.push_back("zero-constrained polish did not converge");
                }
            } else {
                out.warnings.push_back("no feasible restoration inside the zero constraints");
            }
        } else {
            out.warnings.push_back("zero constraints leave no degrees of freedom");
        }
    } else if (zeros1.points.empty()) {
        out.warnings.push_back("boundary flagged but no zero-set candidates were found");
    }

    if (!adopted_polish) {
        // Fallback: keep the stage-1 iterate and read the singular mass off
        // the near-zero nodes.
        out.q_hat = CoefVector(s1.u);
        out.iterations = iter_counter;
        out.objective_value = s1.rep.value;
        Eigen::VectorXd chat =
            split_residual_estimate(t, s1.u, nd, ops, std::sqrt(opts.tau_boundary));
        out.gradient_residual = MomentVector(chat);
        out.gradient_norm = s1.reduced_grad_norm;
        out.converged = false;
        out.split_residual = true;
        out.zero_set = zeros1;
        out.warnings.push_back(
            "singular part estimated from near-zero nodes; treat the residual as approximate");
        out.kkt.feasibility_ok = chk.min_value >= -1e-9 * std::max(qmax, 1.0);
        out.kkt.moment_residual_norm = (s1.rep.gradient - chat).norm();
        out.kkt.slackness = chat.dot(s1.u);
    }
    return out;
}

KktReport kkt_verify(const GridTableau& t, const SolveOutcome& outcome, const MomentVector& c,
                     const CoefVector& p) {
    if (outcome.q_hat.size() != t.n || outcome.gradient_residual.size() != t.n)
        throw DomainError("outcome vectors do not match the basis size");
    const auto& ops = kernels::scalar_ops();
    KktReport r;

    std::vector<double> Q(t.node_count);
    t.eval_poly(outcome.q_hat.v, Q.data(), ops);
    const double qmax = ops.max_abs(Q.data(), t.node_count);
    PolyCheck chk = polynomial_cone_check(t, outcome.q_hat, 1e-12, 8);
    r.min_q_value = chk.min_value;
    r.feasibility_ok = chk.min_value >= -1e-9 * std::max(qmax, 1.0);

    ObjectiveReport rep = objective(t, c, p, outcome.q_hat);
    if (rep.feasible) {
        r.moment_residual_norm = (rep.gradient - outcome.gradient_residual.v).norm();
        r.moment_ok = r.moment_residual_norm <= 1e-6 * (1.0 + c.v.norm());
    } else {
        r.moment_residual_norm = std::numeric_limits<double>::infinity();
        r.moment_ok = false;
    }

    r.slackness = outcome.gradient_residual.v.dot(outcome.q_hat.v);
    r.slackness_ok =
        std::fabs(r.slackness) <= 1e-6 * (1.0 + c.v.norm() * outcome.q_hat.v.norm());

    ConeReport cr = classify_moment(t, outcome.gradient_residual);
    r.residual_region = cr.region;
    r.residual_ok = cr.region == ConeRegion::Boundary;

    r.all_ok = r.feasibility_ok && r.moment_ok && r.slackness_ok && r.residual_ok;
    return r;
}

CoefVector roundtrip(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                     const SolverOptions& opts) {
    QuadratureOptions qo;
    qo.allow_refinement = false;  // grid-consistent: both directions use node sums
    qo.kernel = opts.kernel;
    MomentVector c = moment_map(t, p, q, qo);
    return solve_dual(t, c, p, opts).q_hat;
}

ProbeTable continuity_probe(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                            const CoefVector& direction, const std::vector<double>& steps,
                            const SolverOptions& opts) {
    if (direction.size() != t.n) throw DomainError("direction length does not match the basis");
    ProbeTable table;
    SolveOutcome base = solve_dual(t, c, p, opts);
    table.rows.push_back({0.0, base.q_hat, 0.0});
    for (double s : steps) {
        CoefVector ps(p.v + s * direction.v);
        if (ps.v.lpNorm<Eigen::Infinity>() == 0.0 ||
            polynomial_cone_check(t, ps).region == ConeRegion::Exterior) {
            table.truncated = true;
            break;
        }
        SolveOutcome o = solve_dual(t, c, ps, opts);
        table.rows.push_back(
            {s, o.q_hat, (o.q_hat.v - base.q_hat.v).lpNorm<Eigen::Infinity>()});
    }
    return table;
}

}  // namespace rmp
