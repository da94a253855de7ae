#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "rmp/primal.hpp"

using namespace rmp;

namespace {

constexpr double kPi = std::numbers::pi;

GridTableau unit_line(int res) {
    DomainBox box{1, {{0.0, 1.0}}, false};
    return build_tableau(BasisSystem::monomial(box, {{0}, {1}}), {res}, QuadRule::Midpoint);
}

GridTableau cosine_line(int res) {
    DomainBox box{1, {{-kPi, kPi}}, true};
    return build_tableau(BasisSystem::cosine(box, {{0}, {1}}), {res}, QuadRule::Midpoint);
}

}  // namespace

TEST_CASE("primal_objective closed forms on the unit interval") {
    GridTableau t = unit_line(1024);
    CoefVector p = coef({1.0, 0.0});  // P == 1 under the unit-mass grid

    DensityOnGrid d;
    d.values.assign(t.node_count, 2.0);
    CHECK(primal_objective(t, p, d) == doctest::Approx(std::log(2.0)).epsilon(1e-13));

    // Phi = exp(x) turns the objective into the midpoint sum of x, which the
    // rule integrates exactly: 1/2.
    for (std::size_t j = 0; j < t.node_count; ++j) d.values[j] = std::exp(t.node_coord(j, 0));
    CHECK(primal_objective(t, p, d) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("primal_objective collapses on lost mass and skips weightless nodes") {
    GridTableau t = unit_line(256);
    CoefVector p = coef({1.0, 0.0});
    DensityOnGrid d;
    d.values.assign(t.node_count, 1.0);

    d.values[100] = 0.0;
    CHECK(std::isinf(primal_objective(t, p, d)));
    CHECK(primal_objective(t, p, d) < 0.0);
    d.values[100] = -1.0;
    CHECK(std::isinf(primal_objective(t, p, d)));

    // P == 0 removes every node from the sum, whatever Phi does there.
    CoefVector zero = coef({0.0, 0.0});
    d.values.assign(t.node_count, -3.0);
    CHECK(primal_objective(t, zero, d) == 0.0);
}

TEST_CASE("kl_divergence vanishes exactly at Phi = P and signs as expected") {
    GridTableau t = unit_line(512);
    CoefVector p = coef({1.0, 0.5});  // P = 1 + x/2 > 0
    DensityOnGrid d;
    d.values.resize(t.node_count);
    t.eval_poly(p.v, d.values.data(), kernels::scalar_ops());
    CHECK(kl_divergence(t, p, d) == 0.0);

    // Phi = 2P: every term is -log 2 times the P mass, int (1 + x/2) = 5/4.
    for (double& v : d.values) v *= 2.0;
    CHECK(kl_divergence(t, p, d) == doctest::Approx(-std::log(2.0) * 1.25).epsilon(1e-13));

    d.values[17] = 0.0;
    CHECK(std::isinf(kl_divergence(t, p, d)));
    CHECK(kl_divergence(t, p, d) > 0.0);
}

TEST_CASE("density_moments matches a hand-rolled node sum plus atoms") {
    GridTableau t = unit_line(64);
    DensityOnGrid d;
    d.values.resize(t.node_count);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (double& v : d.values) v = u(rng);

    AtomicPart at;
    at.points = {{0.3}, {0.8}};
    at.weights = {0.25, 0.5};
    d.singular = at;

    Eigen::VectorXd want = Eigen::VectorXd::Zero(t.n);
    for (int k = 0; k < t.n; ++k)
        for (std::size_t j = 0; j < t.node_count; ++j)
            want[k] += t.weights[j] * d.values[j] * t.cols[k][j];
    want[0] += 0.25 + 0.5;
    want[1] += 0.25 * 0.3 + 0.5 * 0.8;

    MomentVector got = density_moments(t, d);
    CHECK((got.v - want).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("the atomic part never enters the entropy objective") {
    GridTableau t = unit_line(128);
    CoefVector p = coef({1.0, 1.0});
    DensityOnGrid d;
    d.values.resize(t.node_count);
    for (std::size_t j = 0; j < t.node_count; ++j) d.values[j] = 1.0 + t.node_coord(j, 0);
    const double base = primal_objective(t, p, d);
    const Eigen::VectorXd base_moments = density_moments(t, d).v;

    AtomicPart at;
    at.points = {{0.5}};
    at.weights = {3.0};
    d.singular = at;
    CHECK(primal_objective(t, p, d) == base);
    CHECK((density_moments(t, d).v - base_moments).lpNorm<Eigen::Infinity>() >
          2.9);  // but the moments do move
}

TEST_CASE("duality gap closes at the minimizer and prices any feasible q") {
    GridTableau t = cosine_line(1024);
    MomentVector c = moments({1.0, -0.5});
    CoefVector p = coef({1.0, -1.0});
    SolveOutcome out = solve_dual(t, c, p);
    REQUIRE(out.converged);
    CHECK(duality_gap(t, c, p, out) <= 1e-7);

    // For any feasible q the two node sums cancel and the gap collapses to
    // |sum w P - <c, q>|; at q = (1, 0.2) that is |1 - 0.9| = 0.1.
    SolveOutcome off = out;
    off.q_hat = coef({1.0, 0.2});
    CHECK(duality_gap(t, c, p, off) == doctest::Approx(0.1).epsilon(1e-10));

    // A denominator that dips nonpositive under numerator mass prices to +inf.
    off.q_hat = coef({0.0, 1.0});
    CHECK(std::isinf(duality_gap(t, c, p, off)));
}

TEST_CASE("entropy optimality among moment-matched densities") {
    GridTableau t = cosine_line(512);
    CoefVector p = coef({1.0, -0.5});  // P >= 1/2 everywhere
    std::vector<double> Pv(t.node_count);
    t.eval_poly(p.v, Pv.data(), kernels::scalar_ops());

    DensityOnGrid best;
    best.values = Pv;
    const double ref = primal_objective(t, p, best);
    const Eigen::VectorXd ref_moments = density_moments(t, best).v;
    double min_phi = Pv[0];
    for (double v : Pv) min_phi = std::min(min_phi, v);

    // Perturbation directions in the null space of A(k, j) = w_j alpha_k(x_j)
    // keep the moments fixed; Phi = P is the entropy maximizer on that slice.
    Eigen::MatrixXd A(t.n, static_cast<Eigen::Index>(t.node_count));
    for (int k = 0; k < t.n; ++k)
        for (std::size_t j = 0; j < t.node_count; ++j)
            A(k, static_cast<Eigen::Index>(j)) = t.weights[j] * t.cols[k][j];
    Eigen::LLT<Eigen::MatrixXd> normal(A * A.transpose());

    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd delta(static_cast<Eigen::Index>(t.node_count));
        for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = u(rng);
        delta -= A.transpose() * normal.solve(A * delta);
        const double scale = 0.4 * min_phi / delta.lpNorm<Eigen::Infinity>();

        DensityOnGrid d;
        d.values.resize(t.node_count);
        for (std::size_t j = 0; j < t.node_count; ++j)
            d.values[j] = Pv[j] + scale * delta[static_cast<Eigen::Index>(j)];

        CHECK((density_moments(t, d).v - ref_moments).lpNorm<Eigen::Infinity>() <= 1e-12);
        const double perturbed = primal_objective(t, p, d);
        CHECK(perturbed <= ref + 1e-12);
        CHECK(perturbed < ref);  // the slice is strictly curved at P > 0
    }
}
