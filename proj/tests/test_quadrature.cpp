#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rmp/errors.hpp"
#include "rmp/quadrature.hpp"

using namespace rmp;

namespace {

constexpr double kPi = std::numbers::pi;

GridTableau monomial_line(int res, int degree_count) {
    DomainBox box{1, {{0.0, 1.0}}, false};
    std::vector<std::vector<int>> powers;
    for (int k = 0; k < degree_count; ++k) powers.push_back({k});
    return build_tableau(BasisSystem::monomial(box, powers), {res}, QuadRule::Midpoint);
}

}  // namespace

TEST_CASE("moment map matches closed forms for a smooth ratio") {
    // P = 1, Q = 1 + x on [0,1]: f_0 = ln 2, f_1 = 1 - ln 2.
    GridTableau t = monomial_line(2048, 2);
    MomentVector f = moment_map(t, coef({1.0, 0.0}), coef({1.0, 1.0}));
    CHECK(f.v[0] == doctest::Approx(std::log(2.0)).epsilon(1e-7));
    CHECK(f.v[1] == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-7));
}

TEST_CASE("moment map validates inputs") {
    GridTableau t = monomial_line(64, 2);
    CHECK_THROWS_AS(moment_map(t, coef({0.0, 0.0}), coef({1.0, 0.0})), DomainError);
    // Q = x - 1 is negative on all interior nodes.
    CHECK_THROWS_AS(moment_map(t, coef({1.0, 0.0}), coef({-1.0, 1.0})),
                    InfeasibleDenominator);
}

TEST_CASE("singular integrand needs the refinement pass") {
    // integral of (1/3)|x|^(-2/3) over [-1,1] equals 2; the integrand blows
    // up at the origin, where the denominator 3 x^(2/3) vanishes.
    DomainBox box{1, {{-1.0, 1.0}}, false};
    BasisSystem b = BasisSystem::fractional(box, {{0, 1}, {1, 3}, {2, 3}});
    GridTableau t = build_tableau(b, {4096}, QuadRule::Midpoint);
    const CoefVector p = coef({1.0, 0.0, 0.0});
    const CoefVector q = coef({0.0, 0.0, 3.0});

    QuadratureOptions refined;
    refined.refine_depth = 14;
    const double with = moment_map(t, p, q, refined).v[0];
    CHECK(with == doctest::Approx(2.0).epsilon(5e-4));

    QuadratureOptions flat;
    flat.allow_refinement = false;
    const double without = moment_map(t, p, q, flat).v[0];
    CHECK(std::fabs(without - 2.0) > 10.0 * std::fabs(with - 2.0));
}

TEST_CASE("objective value, gradient, and feasibility report") {
    GridTableau t = monomial_line(1024, 2);
    const CoefVector p = coef({1.0, 0.0});
    const MomentVector c = moments({0.4, 0.2});
    const CoefVector q = coef({1.0, 1.0});

    ObjectiveReport rep = objective(t, c, p, q, true);
    CHECK(rep.feasible);
    // <c,q> - integral of log(1+x) = 0.6 - (2 ln 2 - 1).
    CHECK(rep.value == doctest::Approx(0.6 - (2.0 * std::log(2.0) - 1.0)).epsilon(1e-6));
    CHECK(rep.min_q == doctest::Approx(1.0).epsilon(1e-3));

    // gradient = c - f(q), analytically (0.4 - ln2, 0.2 - (1 - ln2)).
    CHECK(rep.gradient[0] == doctest::Approx(0.4 - std::log(2.0)).epsilon(1e-6));
    CHECK(rep.gradient[1] == doctest::Approx(0.2 - 1.0 + std::log(2.0)).epsilon(1e-6));

    ObjectiveReport bad = objective(t, c, p, coef({-1.0, 1.0}));
    CHECK(!bad.feasible);
    CHECK(bad.value == std::numeric_limits<double>::infinity());
}

TEST_CASE("gradient and hessian agree with finite differences") {
    GridTableau t = monomial_line(512, 3);
    const CoefVector p = coef({1.0, 0.5, 0.25});
    const MomentVector c = moments({0.3, -0.1, 0.2});
    Eigen::VectorXd q0(3);
    q0 << 2.0, 0.5, -0.3;

    ObjectiveReport rep = objective(t, c, p, CoefVector(q0), true);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd qp = q0, qm = q0;
        qp[k] += h;
        qm[k] -= h;
        const double fp = objective(t, c, p, CoefVector(qp)).value;
        const double fm = objective(t, c, p, CoefVector(qm)).value;
        CHECK(rep.gradient[k] == doctest::Approx((fp - fm) / (2.0 * h)).epsilon(1e-7));

        const Eigen::VectorXd gp = objective(t, c, p, CoefVector(qp)).gradient;
        const Eigen::VectorXd gm = objective(t, c, p, CoefVector(qm)).gradient;
        for (int l = 0; l < 3; ++l)
            CHECK(rep.hessian(l, k) ==
                  doctest::Approx((gp[l] - gm[l]) / (2.0 * h)).epsilon(1e-6));
    }
    CHECK(hessian_only(t, p, CoefVector(q0)).isApprox(rep.hessian, 1e-12));
}

TEST_CASE("objective hessian is positive semidefinite on the feasible set") {
    GridTableau t = monomial_line(256, 3);
    const CoefVector p = coef({1.0, 0.0, 1.0});
    Eigen::MatrixXd H = hessian_only(t, p, coef({1.0, 0.2, 0.4}));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("divergence diagnostic separates d=1 from d=3") {
    DomainBox b1{1, {{-kPi, kPi}}, false};
    BasisSystem cos1 = BasisSystem::cosine(b1, {{0}, {1}});
    DivergenceReport r1 = divergence_diagnostic(cos1, coef({1.0, -1.0}), {1024});
    CHECK(r1.verdict == DivergenceVerdict::Divergent);
    REQUIRE(r1.estimates.size() == 3);
    CHECK(r1.estimates[1] > 1.5 * r1.estimates[0]);

    DomainBox b3{3, {{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}}, false};
    BasisSystem cos3 = BasisSystem::cosine(b3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    // 32^3 base: every doubling step already agrees within the 1% default.
    DivergenceReport r3 = divergence_diagnostic(cos3, coef({3.0, -1.0, -1.0, -1.0}), {32, 32, 32});
    CHECK(r3.verdict == DivergenceVerdict::Convergent);
    REQUIRE(r3.estimates.size() == 3);
    CHECK(std::fabs(r3.estimates[2] - r3.estimates[1]) <= 1e-2 * std::fabs(r3.estimates[2]));
}
