#include "rmp/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmp/errors.hpp"
#include "rmp/refine.hpp"

namespace rmp {
namespace {

std::vector<int> scan_resolution_for(const GridTableau& t, const ConeOptions& opt) {
    if (opt.scan_per_axis > 0) return std::vector<int>(t.dim(), opt.scan_per_axis);
    return t.resolution;
}

}  // namespace

std::string region_name(ConeRegion r) {
    switch (r) {
        case ConeRegion::Interior: return "interior";
        case ConeRegion::Boundary: return "boundary";
        case ConeRegion::Exterior: return "exterior";
    }
    return "?";
}

PolyMin polynomial_min(const BasisSystem& basis, const CoefVector& p,
                       const std::vector<int>& scan_resolution, int depth) {
    if (p.size() != basis.size())
        throw DomainError("coefficient length does not match the basis size");
    const int d = basis.dim();

    if (!basis.off_grid_capable()) {
        // Node-bound family: the tabulated grid is all there is.
        const auto& res = basis.tab_resolution();
        std::size_t count = 1;
        for (int r : res) count *= static_cast<std::size_t>(r);
        PolyMin best;
        best.value = std::numeric_limits<double>::infinity();
        const auto& vals = basis.tab_values();
        for (std::size_t j = 0; j < count; ++j) {
            double v = 0.0;
            for (int k = 0; k < basis.size(); ++k) v += p.v[k] * vals[k][j];
            if (v < best.value) {
                best.value = v;
                best.point.assign(d, 0.0);
                std::size_t rem = j;
                for (int a = d - 1; a >= 0; --a) {
                    const auto& [lo, hi] = basis.box().bounds[a];
                    const double h = (hi - lo) / res[a];
                    best.point[a] = lo + h * (rem % res[a] + 0.5);
                    rem /= res[a];
                }
            }
        }
        return best;
    }

    std::vector<int> res = scan_resolution;
    if (static_cast<int>(res.size()) != d)
        throw DomainError("scan resolution arity does not match the domain");

    std::vector<double> h(d);
    std::vector<std::vector<double>> centers(d);
    std::size_t count = 1;
    for (int a = 0; a < d; ++a) {
        const auto& [lo, hi] = basis.box().bounds[a];
        h[a] = (hi - lo) / res[a] * 0.5;
        centers[a].resize(res[a]);
        for (int i = 0; i < res[a]; ++i) centers[a][i] = lo + (hi - lo) / res[a] * (i + 0.5);
        count *= static_cast<std::size_t>(res[a]);
    }

    // Score every cell by its center + corner probes, then descend the most
    // promising ones. Corner probes make boundary zeros visible at level 0.
    std::vector<std::pair<double, std::size_t>> scores(count);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d), alpha(basis.size());
    for (std::size_t j = 0; j < count; ++j) {
        double s = std::numeric_limits<double>::infinity();
        for (int probe = -1; probe < (1 << d); ++probe) {
            for (int a = 0; a < d; ++a) {
                x[a] = centers[a][idx[a]];
                if (probe >= 0) x[a] += ((probe >> a) & 1) ? h[a] : -h[a];
            }
            basis.evaluate(x.data(), alpha.data());
            double v = 0.0;
            for (int k = 0; k < basis.size(); ++k) v += p.v[k] * alpha[k];
            s = std::min(s, v);
        }
        scores[j] = {s, j};
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < static_cast<std::size_t>(res[a])) break;
            idx[a] = 0;
        }
    }
    std::sort(scores.begin(), scores.end());

    const double s_min = scores.front().first;
    const double spread = scores.back().first - s_min;
    const double margin = 1e-3 * std::max(spread, 1.0);
    std::size_t take = 0;
    while (take < count && (take < 8 || scores[take].first <= s_min + margin) && take < 32) ++take;

    PolyMin best;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<double> center(d);
    for (std::size_t t = 0; t < take; ++t) {
        std::size_t rem = scores[t].second;
        for (int a = d - 1; a >= 0; --a) {
            center[a] = centers[a][rem % res[a]];
            rem /= res[a];
        }
        refine::Sample s = refine::cell_min(basis, p.v, center, h, depth);
        if (s.value < best.value) {
            best.value = s.value;
            best.point = s.x;
        }
    }
    return best;
}

ConeReport classify_moment(const GridTableau& t, const MomentVector& c, const ConeOptions& opt) {
    return classify_moment(t, c, MomentVector(t.basis_moments), opt);
}

ConeReport classify_moment(const GridTableau& t, const MomentVector& c, const MomentVector& c0,
                           const ConeOptions& opt) {
    if (c.size() != t.n || c0.size() != t.n)
        throw DomainError("moment vector length does not match the basis size");
    // A custom reference direction must itself be strictly inside the moment
    // cone or the unit-mass section it defines is not a cross-section at all.
    const double c0_dev = (c0.v - t.basis_moments).lpNorm<Eigen::Infinity>();
    if (c0_dev > 1e-12 * std::max(1.0, t.basis_moments.lpNorm<Eigen::Infinity>())) {
        ConeReport probe = classify_moment(t, MomentVector(c0.v), opt);
        if (probe.region != ConeRegion::Interior)
            throw ConfigError("reference direction c0 does not lie strictly inside the moment cone");
    }
    const int n = t.n;
    const std::size_t NC = t.node_count;

    ConeReport rep;
    const bool can_refine = t.basis->off_grid_capable();
    std::vector<int> scan_res = scan_resolution_for(t, opt);

    std::vector<Eigen::VectorXd> added;
    std::vector<double> alpha(n);
    for (int round = 0;; ++round) {
        const std::size_t total = NC + added.size() + 2;
        Eigen::MatrixXd A(n, total);
        for (std::size_t j = 0; j < NC; ++j)
            for (int k = 0; k < n; ++k) A(k, j) = t.cols[k][j];
        for (std::size_t e = 0; e < added.size(); ++e) A.col(NC + e) = added[e];
        A.col(total - 2) = c0.v;
        A.col(total - 1) = -c0.v;
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
        cost[total - 2] = -1.0;
        cost[total - 1] = 1.0;

        lp::Result sol = lp::solve(A, c.v, cost, opt.lp);
        rep.lp_iterations += sol.iterations;
        rep.rounds = round + 1;
        // This solves the dual form (max shift along c0), so its infeasible
        // status is the primal's unbounded descent (exterior sentinel), and
        // its unbounded status means the unit-mass section is empty, which
        // points at an inadmissible c0.
        if (sol.status == lp::Status::Infeasible) {
            rep.value = -std::numeric_limits<double>::infinity();
            rep.region = ConeRegion::Exterior;
            return rep;
        }
        if (sol.status == lp::Status::Unbounded)
            throw ConfigError("cone location program degenerate: the reference direction c0 "
                              "is not admissible for this tableau");
        if (sol.status != lp::Status::Optimal)
            throw DomainError("cone location program hit its iteration cap");

        rep.value = -sol.objective;
        Eigen::VectorXd p = -sol.y;
        const double s = c0.v.dot(p);
        if (s > 1e-9) p /= s;
        rep.witness = CoefVector(p);

        if (!can_refine || round >= opt.exchange_rounds) break;
        PolyMin pm = polynomial_min(*t.basis, rep.witness, scan_res, opt.refine_depth);
        rep.witness_min = pm.value;
        const double viol_tol = opt.exchange_tol_rel * std::max(1.0, p.lpNorm<1>());
        if (pm.value >= -viol_tol) break;
        t.basis->evaluate(pm.point.data(), alpha.data());
        added.emplace_back(Eigen::Map<const Eigen::VectorXd>(alpha.data(), n));
        rep.added_points.push_back(pm.point);
    }

    const double tol = opt.tol_rel * (1.0 + c.v.cwiseAbs().maxCoeff());
    if (rep.value > tol)
        rep.region = ConeRegion::Interior;
    else if (rep.value < -tol)
        rep.region = ConeRegion::Exterior;
    else
        rep.region = ConeRegion::Boundary;
    return rep;
}

double dual_lambda(const GridTableau& t, const MomentVector& c, const MomentVector& c0,
                   const ConeOptions& opt, double lo, double hi, double tol) {
    // Bisection on region flags only: exterior above the crossing, not below.
    auto region_at = [&](double lambda) {
        MomentVector shifted(c.v - lambda * c0.v);
        return classify_moment(t, shifted, c0, opt).region;
    };
    if (region_at(lo) == ConeRegion::Exterior)
        throw DomainError("dual shift bisection: lower end of the bracket is already exterior");
    if (region_at(hi) != ConeRegion::Exterior)
        throw DomainError("dual shift bisection: upper end of the bracket is not exterior");
    while (hi - lo > tol * (1.0 + std::fabs(lo) + std::fabs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (region_at(mid) == ConeRegion::Exterior)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double dual_lambda(const GridTableau& t, const MomentVector& c, const ConeOptions& opt, double lo,
                   double hi, double tol) {
    return dual_lambda(t, c, MomentVector(t.basis_moments), opt, lo, hi, tol);
}

PolyCheck polynomial_cone_check(const GridTableau& t, const CoefVector& q, double tol_rel,
                                int refine_depth) {
    if (q.size() != t.n)
        throw DomainError("coefficient vector length does not match the basis size");
    const auto& ops = kernels::scalar_ops();
    std::vector<double> Q(t.node_count);
    t.eval_poly(q.v, Q.data(), ops);
    const double qmax = ops.max_abs(Q.data(), t.node_count);

    int scan = 0;
    for (int a = 0; a < t.dim(); ++a) scan = std::max(scan, t.resolution[a]);
    PolyMin pm = polynomial_min(*t.basis, q, std::vector<int>(t.dim(), scan), refine_depth);

    PolyCheck chk;
    chk.min_value = pm.value;
    chk.argmin = pm.point;
    const double tol = tol_rel * std::max(qmax, 1e-300);
    if (pm.value > tol)
        chk.region = ConeRegion::Interior;
    else if (pm.value < -tol)
        chk.region = ConeRegion::Exterior;
    else
        chk.region = ConeRegion::Boundary;
    return chk;
}

std::optional<ConeRegion> toeplitz_cross_check(const BasisSystem& basis, const MomentVector& c,
                                               double tol_rel) {
    if (basis.family() != BasisFamily::CosineTensor || basis.dim() != 1) return std::nullopt;
    const int n = basis.size();
    if (c.size() != n) return std::nullopt;
    std::vector<int> pos(n, -1);  // pos[k]: location of index k in the family
    for (int i = 0; i < n; ++i) {
        const int k = basis.indices()[i][0];
        if (k < 0 || k >= n || pos[k] >= 0) return std::nullopt;
        pos[k] = i;
    }

    Eigen::MatrixXd T(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = c.v[pos[std::abs(i - j)]];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double tol = tol_rel * std::max(std::fabs(T.trace()), 1.0);
    if (lmin > tol) return ConeRegion::Interior;
    if (lmin < -tol) return ConeRegion::Exterior;
    return ConeRegion::Boundary;
}

}  // namespace rmp
