#include "rmp/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rmp/errors.hpp"
#include "rmp/lp.hpp"
#include "rmp/nnls.hpp"
#include "rmp/refine.hpp"

namespace rmp {
namespace {

double domain_diameter(const DomainBox& box) {
    double s = 0.0;
    for (const auto& [lo, hi] : box.bounds) s += (hi - lo) * (hi - lo);
    return std::sqrt(s);
}

void decode_node(const GridTableau& t, std::size_t j, std::vector<std::size_t>& idx) {
    const int d = t.dim();
    idx.assign(d, 0);
    std::size_t rem = j;
    for (int a = d - 1; a >= 0; --a) {
        idx[a] = rem % static_cast<std::size_t>(t.resolution[a]);
        rem /= static_cast<std::size_t>(t.resolution[a]);
    }
}

// Largest connected component of flagged cells under grid axis adjacency.
std::size_t largest_flagged_component(const GridTableau& t, const std::vector<char>& flagged) {
    const std::size_t count = t.node_count;
    std::size_t best = 0;
    std::vector<std::size_t> stack, idx;
    std::vector<char> seen(count, 0);
    std::vector<std::size_t> strides(t.dim(), 1);
    for (int a = t.dim() - 2; a >= 0; --a)
        strides[a] = strides[a + 1] * static_cast<std::size_t>(t.resolution[a + 1]);
    for (std::size_t s = 0; s < count; ++s) {
        if (!flagged[s] || seen[s]) continue;
        std::size_t size = 0;
        stack.assign(1, s);
        seen[s] = 1;
        while (!stack.empty()) {
            const std::size_t j = stack.back();
            stack.pop_back();
            ++size;
            decode_node(t, j, idx);
            for (int a = 0; a < t.dim(); ++a) {
                if (idx[a] > 0) {
                    const std::size_t nb = j - strides[a];
                    if (flagged[nb] && !seen[nb]) {
                        seen[nb] = 1;
                        stack.push_back(nb);
                    }
                }
                if (idx[a] + 1 < static_cast<std::size_t>(t.resolution[a])) {
                    const std::size_t nb = j + strides[a];
                    if (flagged[nb] && !seen[nb]) {
                        seen[nb] = 1;
                        stack.push_back(nb);
                    }
                }
            }
        }
        best = std::max(best, size);
    }
    return best;
}

struct Candidate {
    std::vector<double> x;
    double value;
};

// Greedy clustering: lowest value absorbs everything within radius.
std::vector<Candidate> cluster_candidates(std::vector<Candidate> cand, double radius) {
    std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.x < b.x;
    });
    std::vector<Candidate> reps;
    std::vector<char> taken(cand.size(), 0);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (taken[i]) continue;
        reps.push_back(cand[i]);
        for (std::size_t k = i + 1; k < cand.size(); ++k) {
            if (taken[k]) continue;
            double dist2 = 0.0;
            for (std::size_t a = 0; a < cand[i].x.size(); ++a) {
                const double dx = cand[i].x[a] - cand[k].x[a];
                dist2 += dx * dx;
            }
            if (dist2 <= radius * radius) taken[k] = 1;
        }
    }
    std::sort(reps.begin(), reps.end(),
              [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
    return reps;
}

// alpha(x) whether or not the family evaluates off-grid: node-bound families
// look the point up on their grid.
void eval_alpha_at(const GridTableau& t, const std::vector<double>& x, double* out) {
    if (t.basis->off_grid_capable()) {
        t.basis->evaluate(x.data(), out);
        return;
    }
    std::size_t j = 0;
    for (int a = 0; a < t.dim(); ++a) {
        const auto& [lo, hi] = t.basis->box().bounds[a];
        const double h = (hi - lo) / t.resolution[a];
        double pos = (x[a] - lo) / h - 0.5;
        long i = std::lround(pos);
        i = std::max(0l, std::min(static_cast<long>(t.resolution[a]) - 1, i));
        j = j * static_cast<std::size_t>(t.resolution[a]) + static_cast<std::size_t>(i);
    }
    for (int k = 0; k < t.n; ++k) out[k] = t.cols[k][j];
}

}  // namespace

ZeroSet find_zero_set(const GridTableau& t, const CoefVector& qhat, double flag_rel,
                      double cluster_rel, int refine_depth) {
    if (qhat.size() != t.n)
        throw DomainError("q length does not match the basis size");
    const auto& ops = kernels::scalar_ops();
    std::vector<double> Q(t.node_count);
    t.eval_poly(qhat.v, Q.data(), ops);
    const double qmax = ops.max_abs(Q.data(), t.node_count);
    const double thr = flag_rel * qmax;

    ZeroSet zs;
    const int d = t.dim();
    const bool off_grid = t.basis->off_grid_capable();
    const std::size_t ncorner = std::size_t{1} << d;
    std::vector<double> center(d), corner(d), alpha(t.n), half(d);
    for (int a = 0; a < d; ++a) half[a] = t.cell_halfwidth(a);

    std::vector<char> flagged(t.node_count, 0);
    for (std::size_t j = 0; j < t.node_count; ++j) {
        double score = Q[j];
        if (off_grid && score >= thr) {
            // Corner probes catch zeros on cell edges that no node value sees.
            t.node(j, center.data());
            for (std::size_t m = 0; m < ncorner && score >= thr; ++m) {
                for (int a = 0; a < d; ++a)
                    corner[a] = center[a] + (((m >> a) & 1u) ? half[a] : -half[a]);
                t.basis->evaluate(corner.data(), alpha.data());
                double v = 0.0;
                for (int k = 0; k < t.n; ++k) v += qhat.v[k] * alpha[k];
                score = std::min(score, v);
            }
        }
        if (score < thr) {
            flagged[j] = 1;
            ++zs.flagged_cells;
        }
    }
    if (zs.flagged_cells == 0) return zs;

    zs.kind = largest_flagged_component(t, flagged) > static_cast<std::size_t>(3 * t.n)
                  ? SupportKind::SampledCurve
                  : SupportKind::Points;

    std::vector<Candidate> cand;
    for (std::size_t j = 0; j < t.node_count; ++j) {
        if (!flagged[j]) continue;
        t.node(j, center.data());
        if (off_grid) {
            refine::Sample s = refine::cell_min(*t.basis, qhat.v, center, half, refine_depth);
            if (s.value < thr) cand.push_back({s.x, s.value});
        } else {
            cand.push_back({center, Q[j]});
        }
    }
    if (cand.empty()) return zs;

    const double radius = cluster_rel * domain_diameter(t.basis->box());
    std::vector<Candidate> reps = cluster_candidates(std::move(cand), radius);
    for (auto& r : reps) {
        zs.points.push_back(r.x);
        zs.q_values.push_back(r.value);
    }
    return zs;
}

AtomicPart recover_atoms(const GridTableau& t, const MomentVector& chat, const ZeroSet& zeros,
                         double residual_tol_rel, double prune_rel) {
    if (chat.size() != t.n)
        throw DomainError("moment vector length does not match the basis size");
    AtomicPart part;
    const double tol = residual_tol_rel * (1.0 + chat.v.norm());
    if (zeros.points.empty()) {
        part.residual = chat.v.norm();
        if (part.residual > tol)
            throw RecoveryError(
                "singular part has no zero-set candidates to live on; lower the zero flag "
                "threshold or raise the grid resolution",
                part.residual);
        part.uniqueness = Uniqueness::Unique;
        return part;
    }

    const int Z = static_cast<int>(zeros.points.size());
    Eigen::MatrixXd D(t.n, Z);
    std::vector<double> alpha(t.n);
    for (int i = 0; i < Z; ++i) {
        eval_alpha_at(t, zeros.points[i], alpha.data());
        for (int k = 0; k < t.n; ++k) D(k, i) = alpha[k];
    }

    nnls::Result fit = nnls::solve(D, chat.v);
    const double total = fit.x.sum();
    std::vector<int> kept;
    for (int i = 0; i < Z; ++i)
        if (fit.x[i] > prune_rel * total) kept.push_back(i);

    Eigen::VectorXd recon = Eigen::VectorXd::Zero(t.n);
    for (int i : kept) {
        part.points.push_back(zeros.points[i]);
        part.weights.push_back(fit.x[i]);
        recon += fit.x[i] * D.col(i);
    }
    part.residual = (chat.v - recon).norm();
    if (part.residual > tol)
        throw RecoveryError(
            "atomic fit residual " + std::to_string(part.residual) +
                " exceeds tolerance; the zero flag threshold or grid resolution likely needs "
                "adjustment",
            part.residual);

    const int m = static_cast<int>(kept.size());
    bool uniq = zeros.kind == SupportKind::Points && m <= t.n;
    if (uniq && m > 0) {
        Eigen::MatrixXd Dk(t.n, m);
        for (int i = 0; i < m; ++i) Dk.col(i) = D.col(kept[static_cast<std::size_t>(i)]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Dk);
        qr.setThreshold(1e-10);
        uniq = qr.rank() == m;
    }
    part.uniqueness = uniq ? Uniqueness::Unique : Uniqueness::NonUnique;
    return part;
}

DiscreteMeasure discrete_measure(const GridTableau& t, const MomentVector& c,
                                 const CoefVector* boundary_witness) {
    if (c.size() != t.n)
        throw DomainError("moment vector length does not match the basis size");
    DiscreteMeasure dm;
    const int n = t.n;

    if (boundary_witness == nullptr) {
        // Interior route: a basic optimal point of the minimum-total-mass
        // grid-atom program has at most n positive entries.
        Eigen::MatrixXd A(n, t.node_count);
        for (std::size_t j = 0; j < t.node_count; ++j)
            for (int k = 0; k < n; ++k) A(k, j) = t.cols[k][j];
        Eigen::VectorXd cost = Eigen::VectorXd::Ones(t.node_count);
        lp::Result sol = lp::solve(A, c.v, cost);
        if (sol.status != lp::Status::Optimal)
            throw RecoveryError(
                "grid-atom program failed: c is likely exterior or the resolution too coarse",
                std::numeric_limits<double>::quiet_NaN());
        std::vector<double> x(t.dim());
        for (std::size_t j = 0; j < t.node_count; ++j) {
            if (sol.x[j] <= 0.0) continue;
            t.node(j, x.data());
            dm.points.push_back(x);
            dm.weights.push_back(sol.x[j]);
        }
        dm.residual = (A * sol.x - c.v).norm();
        if (dm.residual > 1e-8 * (1.0 + c.v.norm()))
            throw RecoveryError(
                "grid-atom program residual out of tolerance: c is likely exterior or the "
                "resolution too coarse",
                dm.residual);
        return dm;
    }

    // Boundary route: every representing measure lives on the witness's zero
    // set, and the witness direction is already exact, so solve the system
    // projected onto its orthogonal complement: n-1 equations, hence a basic
    // point with at most n-1 atoms.
    const CoefVector& p0 = *boundary_witness;
    if (p0.size() != n) throw DomainError("witness length does not match the basis size");
    ZeroSet zs = find_zero_set(t, p0, 1e-5, 1e-4, 10);
    if (zs.points.empty())
        throw RecoveryError("boundary witness has no detectable zeros to place atoms on",
                            std::numeric_limits<double>::quiet_NaN());

    const int Z = static_cast<int>(zs.points.size());
    Eigen::MatrixXd D(n, Z);
    std::vector<double> alpha(n);
    for (int i = 0; i < Z; ++i) {
        eval_alpha_at(t, zs.points[i], alpha.data());
        for (int k = 0; k < n; ++k) D(k, i) = alpha[k];
    }

    if (Z == 1) {
        // One candidate: the weight comes from a scalar least squares fit.
        const double denom = D.col(0).squaredNorm();
        const double a = denom > 0.0 ? D.col(0).dot(c.v) / denom : 0.0;
        dm.residual = (c.v - std::max(a, 0.0) * D.col(0)).norm();
        if (a <= 0.0 || dm.residual > 1e-6 * (1.0 + c.v.norm()))
            throw RecoveryError("single zero-set atom cannot reproduce the boundary vector",
                                dm.residual);
        dm.points.push_back(zs.points[0]);
        dm.weights.push_back(a);
        return dm;
    }

    Eigen::MatrixXd p0m(n, 1);
    p0m.col(0) = p0.v;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(p0m);
    Eigen::MatrixXd Qfull = qr.householderQ();
    Eigen::MatrixXd W = Qfull.rightCols(n - 1);  // orthonormal complement of p0

    Eigen::MatrixXd Ap = W.transpose() * D;
    Eigen::VectorXd bp = W.transpose() * c.v;
    Eigen::VectorXd cost = Eigen::VectorXd::Ones(Z);
    lp::Result sol = lp::solve(Ap, bp, cost);
    if (sol.status != lp::Status::Optimal)
        throw RecoveryError("projected atom program failed on the witness zero set",
                            std::numeric_limits<double>::quiet_NaN());

    Eigen::VectorXd recon = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < Z; ++i) {
        if (sol.x[i] <= 0.0) continue;
        dm.points.push_back(zs.points[i]);
        dm.weights.push_back(sol.x[i]);
        recon += sol.x[i] * D.col(i);
    }
    dm.residual = (c.v - recon).norm();
    if (dm.residual > 1e-6 * (1.0 + c.v.norm()))
        throw RecoveryError("projected atom program residual out of tolerance", dm.residual);
    return dm;
}

}  // namespace rmp
