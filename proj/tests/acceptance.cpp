// Acceptance gate: nine end-to-end criteria, one [PASS]/[FAIL] line each.
// Exits nonzero when any criterion fails. Every check is an exception-free
// walk of the public API; a thrown error fails the criterion with its message.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmp/cones.hpp"
#include "rmp/primal.hpp"
#include "rmp/quadrature.hpp"
#include "rmp/recovery.hpp"
#include "rmp/solver.hpp"
#include "rmp/tableau.hpp"

using namespace rmp;

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void require(bool ok, const std::string& detail) {
    if (!ok) throw std::runtime_error(detail);
}

GridTableau cosine_line(int n, int res, bool normalize = true) {
    DomainBox box{1, {{-kPi, kPi}}, normalize};
    std::vector<std::vector<int>> idx;
    for (int k = 0; k < n; ++k) idx.push_back({k});
    return build_tableau(BasisSystem::cosine(box, idx), {res}, QuadRule::Midpoint);
}

GridTableau corner_square(int res) {
    DomainBox box{2, {{0.0, 1.0}, {0.0, 1.0}}, false};
    BasisSystem b = BasisSystem::monomial(box, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    return build_tableau(b, {res, res}, QuadRule::Midpoint);
}

// Coefficients with head = 1 + sum |tail|: the polynomial stays >= 1 on K.
CoefVector positive_coeffs(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(n);
    double tail = 0.0;
    for (int k = 1; k < n; ++k) {
        v[k] = u(rng);
        tail += std::fabs(v[k]);
    }
    v[0] = 1.0 + tail;
    return CoefVector(v);
}

MomentVector exact_corner_moments() {
    const double ln2 = std::log(2.0);
    return moments({1.0 + ln2, ln2 / 2.0, 1.5 - ln2, (1.0 - ln2) / 2.0});
}

// 1. Interior recovery in the trigonometric family.
void criterion_trig_interior() {
    GridTableau t = cosine_line(2, 2048);
    SolveOutcome out = solve_dual(t, moments({1.0, -0.5}), coef({1.0, -1.0}));
    require(out.converged, "solver did not converge");
    require(!out.boundary, "interior instance flagged as boundary");
    const double err = (out.q_hat.v - Eigen::Vector2d(1.0, 0.0)).lpNorm<Eigen::Infinity>();
    require(err < 1e-5, "q_hat error " + num(err) + " exceeds 1e-5");
}

// 2. Boundary solve on the square with an atomic residual on an edge.
void criterion_corner_boundary() {
    GridTableau t = corner_square(256);
    const MomentVector c = exact_corner_moments();
    const CoefVector p = coef({0.0, 1.0, 0.0, 0.0});
    SolveOutcome out = solve_dual(t, c, p);
    require(out.converged, "solver did not converge");
    require(out.boundary, "boundary minimizer not flagged");

    Eigen::Vector4d chat_want(1.0, 0.0, 0.5, 0.0);
    const double cerr = (out.gradient_residual.v - chat_want).lpNorm<Eigen::Infinity>();
    require(cerr < 5e-3, "residual moment error " + num(cerr) + " exceeds 5e-3");
    require(std::fabs(out.kkt.slackness) < 1e-6,
            "slackness " + num(out.kkt.slackness) + " exceeds 1e-6");

    AtomicPart at = recover_atoms(t, out.gradient_residual, out.zero_set);
    double mass = 0.0, axis_moment = 0.0;
    for (std::size_t i = 0; i < at.points.size(); ++i) {
        mass += at.weights[i];
        axis_moment += at.weights[i] * at.points[i][1];
    }
    require(std::fabs(mass - 1.0) < 5e-3, "atomic mass " + num(mass) + " off 1 by > 5e-3");
    require(std::fabs(axis_moment - 0.5) < 5e-3,
            "atomic x2-moment " + num(axis_moment) + " off 0.5 by > 5e-3");
    require(at.uniqueness == Uniqueness::NonUnique,
            "singular part on a curve was not flagged non-unique");
}

// 3. Singular quadrature value plus the probe sequence toward its limit.
void criterion_fractional_probe() {
    DomainBox box{1, {{-1.0, 1.0}}, false};
    BasisSystem b = BasisSystem::fractional(box, {{0, 1}, {1, 3}, {2, 3}});
    GridTableau t = build_tableau(b, {4096}, QuadRule::Midpoint);
    QuadratureOptions qo;
    qo.refine_depth = 14;
    const CoefVector p = coef({1.0, 0.0, 0.0});

    const double integral = moment_map(t, p, coef({0.0, 0.0, 3.0}), qo).v[0];
    require(std::fabs(integral - 2.0) < 1e-3,
            "singular integral " + num(integral) + " misses 2 by > 1e-3");

    const double limit = 2.0 + kPi;
    double prev = 0.0;
    for (int k : {4, 8, 16, 32}) {
        const double ik = 1.0 / k;
        const double v =
            moment_map(t, p, coef({3.0 * (ik * ik + ik * ik * ik * ik), 6.0 * ik, 3.0}), qo)
                .v[0];
        require(v > prev, "probe at k=" + std::to_string(k) + " broke monotonicity");
        prev = v;
    }
    require(std::fabs(prev - limit) <= 0.1 * limit,
            "k=32 probe " + num(prev) + " not within 10% of " + num(limit));
}

// 4. Reciprocal-mass divergence in d=1 vs convergence in d=3.
void criterion_divergence_contrast() {
    DomainBox b1{1, {{-kPi, kPi}}, false};
    BasisSystem cos1 = BasisSystem::cosine(b1, {{0}, {1}});
    DivergenceReport d1 = divergence_diagnostic(cos1, coef({1.0, -1.0}), {1024});
    require(d1.verdict == DivergenceVerdict::Divergent,
            "d=1 reciprocal mass did not register as divergent");

    DomainBox b3{3, {{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}}, false};
    BasisSystem cos3 =
        BasisSystem::cosine(b3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    DivergenceReport d3 =
        divergence_diagnostic(cos3, coef({3.0, -1.0, -1.0, -1.0}), {64, 64, 64});
    require(d3.verdict == DivergenceVerdict::Convergent,
            "d=3 reciprocal mass did not register as convergent");
    require(d3.estimates.size() >= 2, "d=3 diagnostic produced too few estimates");
    const double last = d3.estimates.back();
    const double prev = d3.estimates[d3.estimates.size() - 2];
    const double rel = std::fabs(last - prev) / std::fabs(last);
    require(rel <= 1e-2, "last d=3 refinements differ by " + num(rel) + " > 1%");
}

// 5. Forward map then inverse solve returns the denominator, 50 instances.
void criterion_roundtrip_family() {
    std::mt19937 rng(11);
    for (int n : {2, 3, 4}) {
        GridTableau t = cosine_line(n, 2048);
        for (int i = 0; i < 12; ++i) {
            const CoefVector q = positive_coeffs(rng, n);
            const CoefVector p = positive_coeffs(rng, n);
            const CoefVector back = roundtrip(t, p, q);
            const double rel =
                (back.v - q.v).lpNorm<Eigen::Infinity>() / q.v.lpNorm<Eigen::Infinity>();
            require(rel < 1e-5, "d=1 n=" + std::to_string(n) + " instance " +
                                    std::to_string(i) + " error " + num(rel));
        }
    }

    DomainBox box{2, {{-kPi, kPi}, {-kPi, kPi}}, true};
    BasisSystem b = BasisSystem::cosine(box, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    GridTableau t2 = build_tableau(b, {96, 96}, QuadRule::Midpoint);
    for (int i = 0; i < 14; ++i) {
        const CoefVector q = positive_coeffs(rng, 4);
        const CoefVector p = positive_coeffs(rng, 4);
        const CoefVector back = roundtrip(t2, p, q);
        const double rel =
            (back.v - q.v).lpNorm<Eigen::Infinity>() / q.v.lpNorm<Eigen::Infinity>();
        require(rel < 1e-4, "d=2 instance " + std::to_string(i) + " error " + num(rel));
    }
}

// 6. Analytic derivatives of the dual objective against finite differences.
void criterion_derivative_oracles() {
    GridTableau t = cosine_line(3, 512);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (int trial = 0; trial < 25; ++trial) {
        const CoefVector q = positive_coeffs(rng, 3);
        const CoefVector p = positive_coeffs(rng, 3);
        const MomentVector c = moments({u(rng), u(rng), u(rng)});
        ObjectiveReport rep = objective(t, c, p, q);
        require(rep.feasible, "finite-difference base point infeasible");
        Eigen::Vector3d fd;
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6 * (1.0 + std::fabs(q.v[k]));
            Eigen::VectorXd qp = q.v, qm = q.v;
            qp[k] += h;
            qm[k] -= h;
            fd[k] = (objective(t, c, p, CoefVector(qp)).value -
                     objective(t, c, p, CoefVector(qm)).value) /
                    (2.0 * h);
        }
        const double rel = (rep.gradient - fd).lpNorm<Eigen::Infinity>() /
                           (1.0 + rep.gradient.lpNorm<Eigen::Infinity>());
        require(rel < 1e-6, "gradient mismatch " + num(rel) + " on trial " +
                                std::to_string(trial));
    }

    for (int trial = 0; trial < 25; ++trial) {
        const CoefVector q = positive_coeffs(rng, 3);
        const CoefVector p = positive_coeffs(rng, 3);
        const MomentVector c = moments({u(rng), u(rng), u(rng)});
        Eigen::MatrixXd H = objective(t, c, p, q, true).hessian;
        Eigen::MatrixXd fd(3, 3);
        for (int l = 0; l < 3; ++l) {
            const double h = 1e-5 * (1.0 + std::fabs(q.v[l]));
            Eigen::VectorXd qp = q.v, qm = q.v;
            qp[l] += h;
            qm[l] -= h;
            fd.col(l) = (objective(t, c, p, CoefVector(qp)).gradient -
                         objective(t, c, p, CoefVector(qm)).gradient) /
                        (2.0 * h);
        }
        const double rel = (H - fd).lpNorm<Eigen::Infinity>() /
                           (1.0 + H.lpNorm<Eigen::Infinity>());
        require(rel < 1e-5, "hessian mismatch " + num(rel) + " on trial " +
                                std::to_string(trial));
    }
}

// 7. The entropy primal minus the dual matches the fixed entropy shift.
void criterion_duality_identity() {
    GridTableau t1 = cosine_line(2, 2048);
    const MomentVector c1 = moments({1.0, -0.5});
    const CoefVector p1 = coef({1.0, -1.0});
    SolveOutcome o1 = solve_dual(t1, c1, p1);
    require(o1.converged, "interior instance did not converge");
    const double gap1 = duality_gap(t1, c1, p1, o1);
    require(gap1 < 1e-7, "interior duality gap " + num(gap1) + " exceeds 1e-7");

    GridTableau t2 = corner_square(256);
    const MomentVector c2 = exact_corner_moments();
    const CoefVector p2 = coef({0.0, 1.0, 0.0, 0.0});
    SolveOutcome o2 = solve_dual(t2, c2, p2);
    require(o2.converged, "boundary instance did not converge");
    const double gap2 = duality_gap(t2, c2, p2, o2);
    require(gap2 < 1e-6, "boundary duality gap " + num(gap2) + " exceeds 1e-6");
}

// 8. LP classification vs the Toeplitz eigenvalue verdict and the dual shift.
void criterion_classification_consistency() {
    std::vector<GridTableau> grids;
    for (int n = 2; n <= 5; ++n) grids.push_back(cosine_line(n, 1024));

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int done = 0;
    while (done < 200) {
        const int n = 2 + done % 4;
        Eigen::VectorXd cv(n);
        cv[0] = 1.0;
        for (int k = 1; k < n; ++k) cv[k] = u(rng);

        Eigen::MatrixXd T(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) T(i, j) = cv[std::abs(i - j)];
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T)
                                .eigenvalues()
                                .minCoeff();
        const double scale = std::max(1.0, cv.lpNorm<Eigen::Infinity>());
        if (std::fabs(lmin) <= 1e-3 * scale) continue;  // skip near-boundary data

        const GridTableau& t = grids[static_cast<std::size_t>(n - 2)];
        const MomentVector c{cv};
        ConeReport rep = classify_moment(t, c);
        auto cross = toeplitz_cross_check(*t.basis, c);
        require(cross.has_value(), "Toeplitz cross-check declined a cosine family");
        require(rep.region == *cross,
                "instance " + std::to_string(done) + ": LP says " + region_name(rep.region) +
                    ", Toeplitz says " + region_name(*cross));

        if (done < 50) {
            const double span = 10.0 * (1.0 + cv.lpNorm<Eigen::Infinity>());
            const double lam = dual_lambda(t, c, ConeOptions{}, -span, span, 1e-8);
            require(std::fabs(lam - rep.value) <= 1e-6 * (1.0 + std::fabs(rep.value)),
                    "instance " + std::to_string(done) + ": dual shift " + num(lam) +
                        " vs V " + num(rep.value));
        }
        ++done;
    }

    GridTableau t2 = corner_square(256);
    ConeReport edge = classify_moment(t2, moments({1.0, 0.0, 0.5, 0.0}));
    require(edge.region == ConeRegion::Boundary,
            "edge-supported residual vector not classified boundary");
    require(std::fabs(edge.value) < 1e-6,
            "boundary value " + num(edge.value) + " exceeds 1e-6");
}

// 9. Finite atomic representations: interior basic solutions and the
// boundary witness route.
void criterion_discrete_measures() {
    std::mt19937 rng(29);
    std::vector<GridTableau> grids;
    for (int n = 2; n <= 4; ++n) grids.push_back(cosine_line(n, 512));
    QuadratureOptions grid_only;
    grid_only.allow_refinement = false;

    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 3;
        const GridTableau& t = grids[static_cast<std::size_t>(n - 2)];
        const CoefVector p = positive_coeffs(rng, n);
        const CoefVector q = positive_coeffs(rng, n);
        const MomentVector c = moment_map(t, p, q, grid_only);
        DiscreteMeasure dm = discrete_measure(t, c);
        require(dm.points.size() <= static_cast<std::size_t>(n),
                "instance " + std::to_string(i) + " used " +
                    std::to_string(dm.points.size()) + " atoms for n=" + std::to_string(n));
        require(dm.residual <= 1e-8 * (1.0 + c.v.norm()),
                "instance " + std::to_string(i) + " residual " + num(dm.residual));
    }

    GridTableau t = cosine_line(2, 2048);
    const CoefVector witness = coef({1.0, -1.0});
    DiscreteMeasure dm = discrete_measure(t, moments({1.0, 1.0}), &witness);
    require(dm.points.size() == 1,
            "boundary vector produced " + std::to_string(dm.points.size()) + " atoms");
    require(std::fabs(dm.points[0][0]) <= 1e-4,
            "boundary atom at " + num(dm.points[0][0]) + " rather than 0");
    require(std::fabs(dm.weights[0] - 1.0) <= 1e-4,
            "boundary atom weight " + num(dm.weights[0]) + " rather than 1");
}

struct Criterion {
    int id;
    const char* label;
    double time_limit;  // seconds; 0 = no limit
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "trigonometric interior recovery", 1.0, criterion_trig_interior},
        {2, "planar boundary solve with atomic residual", 30.0, criterion_corner_boundary},
        {3, "singular quadrature and probe limit", 5.0, criterion_fractional_probe},
        {4, "reciprocal-mass divergence contrast", 60.0, criterion_divergence_contrast},
        {5, "forward/inverse roundtrip family", 0.0, criterion_roundtrip_family},
        {6, "derivative oracles", 0.0, criterion_derivative_oracles},
        {7, "duality identity", 0.0, criterion_duality_identity},
        {8, "cone classification consistency", 0.0, criterion_classification_consistency},
        {9, "discrete measure representation", 0.0, criterion_discrete_measures},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        try {
            c.body();
        } catch (const std::exception& e) {
            detail = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (detail.empty() && c.time_limit > 0.0 && secs >= c.time_limit)
            detail = "runtime " + num(secs) + "s exceeds " + num(c.time_limit) + "s";
        if (detail.empty()) {
            std::printf("[PASS] %d. %s (%.2fs)\n", c.id, c.label, secs);
        } else {
            std::printf("[FAIL] %d. %s (%.2fs): %s\n", c.id, c.label, secs, detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures ? 1 : 0;
}
