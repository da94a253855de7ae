#include "rmp/quadrature.hpp"

#include <cmath>
#include <limits>

#include "rmp/errors.hpp"

namespace rmp {
namespace {

void check_shapes(const GridTableau& t, const Eigen::VectorXd& v, const char* what) {
    if (v.size() != t.n)
        throw DomainError(std::string(what) + " length does not match the basis size");
}

struct NodeEval {
    std::vector<double> P, Q;
    double max_abs_p = 0.0, max_q = 0.0;
};

NodeEval eval_pq(const GridTableau& t, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                 const kernels::Ops& ops) {
    NodeEval e;
    e.P.resize(t.node_count);
    e.Q.resize(t.node_count);
    t.eval_poly(p, e.P.data(), ops);
    t.eval_poly(q, e.Q.data(), ops);
    e.max_abs_p = ops.max_abs(e.P.data(), t.node_count);
    e.max_q = ops.max_abs(e.Q.data(), t.node_count);
    return e;
}

}  // namespace

MomentVector moment_map(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                        const QuadratureOptions& opt) {
    check_shapes(t, p.v, "p");
    check_shapes(t, q.v, "q");
    const auto& ops = kernels::select(opt.kernel);
    NodeEval e = eval_pq(t, p.v, q.v, ops);
    if (e.max_abs_p == 0.0)
        throw DomainError("numerator coefficients are identically zero on the grid");

    // Feasibility: Q must be positive wherever the numerator carries weight.
    std::vector<double> wp(t.node_count);
    for (std::size_t j = 0; j < t.node_count; ++j) wp[j] = t.weights[j] * e.P[j];
    std::size_t worst = 0;
    const double min_q = ops.masked_min(e.Q.data(), wp.data(), t.node_count, &worst);
    if (worst < t.node_count && min_q <= 0.0)
        throw InfeasibleDenominator("moment map denominator must be positive where the "
                                    "numerator carries weight",
                                    worst, min_q);

    std::vector<double> r(t.node_count);
    ops.ratio_weights(t.weights.data(), e.P.data(), e.Q.data(), r.data(), t.node_count);
    Eigen::VectorXd f(t.n);
    for (int k = 0; k < t.n; ++k) f[k] = ops.dot(t.cols[k].data(), r.data(), t.node_count);

    const bool refinable = opt.allow_refinement && t.rule == QuadRule::Midpoint &&
                           t.basis->off_grid_capable();
    if (refinable) {
        const double trigger = opt.trigger_rel * e.max_q;
        const int d = t.dim();
        std::vector<double> center(d), half(d);
        for (int a = 0; a < d; ++a) half[a] = t.cell_halfwidth(a);
        const double wscale = t.basis->box().normalize ? 1.0 / t.basis->box().volume() : 1.0;
        refine::RatioIntegralOptions ropt;
        ropt.max_depth = opt.refine_depth;
        ropt.rel_tol = opt.cell_rel_tol;
        ropt.p_scale = e.max_abs_p;
        ropt.q_scale = e.max_q;
        Eigen::VectorXd correction = Eigen::VectorXd::Zero(t.n);
        for (std::size_t j = 0; j < t.node_count; ++j) {
            if (e.Q[j] >= trigger) continue;
            // Remove the coarse contribution of this cell, add the refined one.
            if (e.P[j] != 0.0) {
                const double coarse = t.weights[j] * e.P[j] / e.Q[j];
                for (int k = 0; k < t.n; ++k) correction[k] -= coarse * t.cols[k][j];
            }
            t.node(j, center.data());
            refine::cell_ratio_integral(*t.basis, p.v, q.v, center, half, ropt, wscale,
                                        correction);
        }
        f += correction;
    }
    return MomentVector(f);
}

ObjectiveReport objective(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                          const CoefVector& q, bool want_hessian, kernels::Kind kernel) {
    check_shapes(t, c.v, "c");
    check_shapes(t, p.v, "p");
    check_shapes(t, q.v, "q");
    const auto& ops = kernels::select(kernel);
    NodeEval e = eval_pq(t, p.v, q.v, ops);
    if (e.max_abs_p == 0.0)
        throw DomainError("numerator coefficients are identically zero on the grid");

    ObjectiveReport rep;
    std::vector<double> wp(t.node_count);
    for (std::size_t j = 0; j < t.node_count; ++j) wp[j] = t.weights[j] * e.P[j];
    std::size_t worst = 0;
    rep.min_q = ops.masked_min(e.Q.data(), wp.data(), t.node_count, &worst);
    if (worst < t.node_count && rep.min_q <= 0.0) {
        rep.value = std::numeric_limits<double>::infinity();
        rep.feasible = false;
        rep.worst_node = worst;
        return rep;
    }

    rep.value = c.v.dot(q.v) - ops.weighted_plogq(t.weights.data(), e.P.data(), e.Q.data(),
                                                  t.node_count);
    std::vector<double> r(t.node_count);
    ops.ratio_weights(t.weights.data(), e.P.data(), e.Q.data(), r.data(), t.node_count);
    rep.gradient.resize(t.n);
    for (int k = 0; k < t.n; ++k)
        rep.gradient[k] = c.v[k] - ops.dot(t.cols[k].data(), r.data(), t.node_count);

    if (want_hessian) {
        std::vector<double> s(t.node_count);
        ops.div(r.data(), e.Q.data(), s.data(), t.node_count);  // w P / Q^2
        rep.hessian.resize(t.n, t.n);
        for (int k = 0; k < t.n; ++k)
            for (int l = k; l < t.n; ++l) {
                rep.hessian(k, l) =
                    ops.dot3(t.cols[k].data(), t.cols[l].data(), s.data(), t.node_count);
                rep.hessian(l, k) = rep.hessian(k, l);
            }
    }
    return rep;
}

Eigen::MatrixXd hessian_only(const GridTableau& t, const CoefVector& p, const CoefVector& q,
                             kernels::Kind kernel) {
    check_shapes(t, p.v, "p");
    check_shapes(t, q.v, "q");
    const auto& ops = kernels::select(kernel);
    NodeEval e = eval_pq(t, p.v, q.v, ops);
    if (e.max_abs_p == 0.0)
        throw DomainError("numerator coefficients are identically zero on the grid");
    std::vector<double> wp(t.node_count);
    for (std::size_t j = 0; j < t.node_count; ++j) wp[j] = t.weights[j] * e.P[j];
    std::size_t worst = 0;
    const double min_q = ops.masked_min(e.Q.data(), wp.data(), t.node_count, &worst);
    if (worst < t.node_count && min_q <= 0.0)
        throw InfeasibleDenominator("curvature denominator must be positive where the "
                                    "numerator carries weight",
                                    worst, min_q);
    std::vector<double> r(t.node_count), s(t.node_count);
    ops.ratio_weights(t.weights.data(), e.P.data(), e.Q.data(), r.data(), t.node_count);
    ops.div(r.data(), e.Q.data(), s.data(), t.node_count);
    Eigen::MatrixXd H(t.n, t.n);
    for (int k = 0; k < t.n; ++k)
        for (int l = k; l < t.n; ++l) {
            H(k, l) = ops.dot3(t.cols[k].data(), t.cols[l].data(), s.data(), t.node_count);
            H(l, k) = H(k, l);
        }
    return H;
}

namespace {

// Streaming integral of 1/Q over a tensor midpoint grid; no tableau storage.
double recip_integral_streaming(const BasisSystem& basis, const Eigen::VectorXd& q,
                                const std::vector<int>& res) {
    const int d = basis.dim();
    const int n = basis.size();
    std::vector<std::vector<double>> axis_nodes(d);
    double cell_w = basis.box().normalize ? 1.0 / basis.box().volume() : 1.0;
    for (int a = 0; a < d; ++a) {
        const auto& [lo, hi] = basis.box().bounds[a];
        const double h = (hi - lo) / res[a];
        cell_w *= h;
        axis_nodes[a].resize(res[a]);
        for (int i = 0; i < res[a]; ++i) axis_nodes[a][i] = lo + h * (i + 0.5);
    }

    // Per-basis per-axis tables; cosine combines by angle addition.
    const bool trig = basis.family() == BasisFamily::CosineTensor;
    std::vector<std::vector<std::vector<double>>> ta(n), tb(n);
    for (int k = 0; k < n; ++k) {
        ta[k].resize(d);
        tb[k].resize(d);
        for (int a = 0; a < d; ++a) {
            ta[k][a].resize(res[a]);
            tb[k][a].resize(res[a]);
            for (int i = 0; i < res[a]; ++i) {
                if (trig) {
                    const int idx = basis.indices()[k][a];
                    ta[k][a][i] = std::cos(idx * axis_nodes[a][i]);
                    tb[k][a][i] = std::sin(idx * axis_nodes[a][i]);
                } else if (basis.family() == BasisFamily::Monomial) {
                    double pw = 1.0;
                    for (int r = 0; r < basis.indices()[k][a]; ++r) pw *= axis_nodes[a][i];
                    ta[k][a][i] = pw;
                } else {
                    ta[k][a][i] = basis.evaluate_one(k, &axis_nodes[a][i]);
                }
            }
        }
    }

    std::size_t count = 1;
    for (int a = 0; a < d; ++a) count *= static_cast<std::size_t>(res[a]);
    std::vector<std::size_t> idx(d, 0);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        double Q = 0.0;
        for (int k = 0; k < n; ++k) {
            double v;
            if (trig) {
                double cc = ta[k][0][idx[0]], ss = tb[k][0][idx[0]];
                for (int a = 1; a < d; ++a) {
                    const double ca = ta[k][a][idx[a]], sa = tb[k][a][idx[a]];
                    const double cn = cc * ca - ss * sa;
                    ss = cc * sa + ss * ca;
                    cc = cn;
                }
                v = cc;
            } else {
                v = 1.0;
                for (int a = 0; a < d; ++a) v *= ta[k][a][idx[a]];
            }
            Q += q[k] * v;
        }
        if (Q <= 0.0)
            throw InfeasibleDenominator("mass integrand denominator non-positive on the grid", j,
                                        Q);
        acc += 1.0 / Q;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < static_cast<std::size_t>(res[a])) break;
            idx[a] = 0;
        }
    }
    return acc * cell_w;
}

}  // namespace

DivergenceReport divergence_diagnostic(const BasisSystem& basis, const CoefVector& q,
                                       std::vector<int> base_resolution, int refinements,
                                       double growth_factor, double stabilize_rel) {
    if (q.size() != basis.size())
        throw DomainError("q length does not match the basis size");
    if (basis.family() == BasisFamily::Tabulated)
        throw DomainError("divergence diagnostic needs an off-grid evaluable family");
    DivergenceReport rep;
    std::vector<int> res = std::move(base_resolution);
    for (int level = 0; level <= refinements; ++level) {
        rep.estimates.push_back(recip_integral_streaming(basis, q.v, res));
        for (int& r : res) r *= 2;
    }

    const auto& e = rep.estimates;
    bool growing = e.size() >= 2;
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        if (e[i + 1] < growth_factor * e[i]) growing = false;
    if (growing) {
        rep.verdict = DivergenceVerdict::Divergent;
    } else if (e.size() >= 3) {
        const double c1 = std::fabs(e[e.size() - 1] - e[e.size() - 2]) / std::fabs(e[e.size() - 2]);
        const double c2 = std::fabs(e[e.size() - 2] - e[e.size() - 3]) / std::fabs(e[e.size() - 3]);
        if (c1 < stabilize_rel && c2 < stabilize_rel) rep.verdict = DivergenceVerdict::Convergent;
    }
    return rep;
}

}  // namespace rmp
