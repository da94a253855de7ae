#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rmp/errors.hpp"
#include "rmp/recovery.hpp"

using namespace rmp;

namespace {

constexpr double kPi = std::numbers::pi;

GridTableau monomial_line(int n, int res) {
    DomainBox box{1, {{0.0, 1.0}}, false};
    std::vector<std::vector<int>> idx;
    for (int k = 0; k < n; ++k) idx.push_back({k});
    return build_tableau(BasisSystem::monomial(box, idx), {res}, QuadRule::Midpoint);
}

Eigen::VectorXd eval_at(const GridTableau& t, const std::vector<double>& x) {
    Eigen::VectorXd alpha(t.n);
    std::vector<double> buf(static_cast<std::size_t>(t.n));
    t.basis->evaluate(x.data(), buf.data());
    for (int k = 0; k < t.n; ++k) alpha[k] = buf[static_cast<std::size_t>(k)];
    return alpha;
}

}  // namespace

TEST_CASE("find_zero_set: interior point zero off the lattice") {
    GridTableau t = monomial_line(3, 128);
    ZeroSet z = find_zero_set(t, coef({0.25, -1.0, 1.0}));  // (x - 1/2)^2
    REQUIRE(z.points.size() == 1);
    CHECK(z.kind == SupportKind::Points);
    CHECK(z.points[0][0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(std::fabs(z.q_values[0]) <= 1e-9);
}

TEST_CASE("find_zero_set: zeros on domain corners are caught exactly") {
    DomainBox box{1, {{-kPi, kPi}}, true};
    BasisSystem b = BasisSystem::cosine(box, {{0}, {1}});
    GridTableau t = build_tableau(b, {256}, QuadRule::Midpoint);
    ZeroSet z = find_zero_set(t, coef({1.0, 1.0}));  // 1 + cos: zeros at both ends
    REQUIRE(z.points.size() == 2);
    CHECK(z.points[0][0] == doctest::Approx(-kPi));
    CHECK(z.points[1][0] == doctest::Approx(kPi));

    DomainBox sq{2, {{0.0, 1.0}, {0.0, 1.0}}, false};
    BasisSystem mb = BasisSystem::monomial(sq, {{0, 0}, {2, 0}, {0, 2}});
    GridTableau ts = build_tableau(mb, {32, 32}, QuadRule::Midpoint);
    ZeroSet corner = find_zero_set(ts, coef({0.0, 1.0, 1.0}));  // x1^2 + x2^2
    REQUIRE(corner.points.size() == 1);
    CHECK(corner.points[0][0] <= 1e-9);
    CHECK(corner.points[0][1] <= 1e-9);
}

TEST_CASE("find_zero_set: a line of zeros reads as a sampled curve") {
    DomainBox sq{2, {{0.0, 1.0}, {0.0, 1.0}}, false};
    BasisSystem b = BasisSystem::monomial(sq, {{0, 0}, {1, 0}});
    GridTableau t = build_tableau(b, {32, 32}, QuadRule::Midpoint);
    ZeroSet z = find_zero_set(t, coef({0.0, 1.0}));  // Q = x1 vanishes on x1 = 0
    CHECK(z.kind == SupportKind::SampledCurve);
    CHECK(z.flagged_cells >= 32);
    for (const auto& pt : z.points) CHECK(pt[0] <= 1e-9);
}

TEST_CASE("recover_atoms reproduces a planted two-atom residual") {
    GridTableau t = monomial_line(4, 256);
    const std::vector<double> z1 = {0.25}, z2 = {0.75};
    const double w1 = 0.6, w2 = 1.1;
    Eigen::VectorXd chat = w1 * eval_at(t, z1) + w2 * eval_at(t, z2);

    ZeroSet zeros;
    zeros.points = {z1, z2};
    zeros.q_values = {0.0, 0.0};
    zeros.kind = SupportKind::Points;

    AtomicPart at = recover_atoms(t, MomentVector(chat), zeros);
    REQUIRE(at.points.size() == 2);
    CHECK(at.weights[0] == doctest::Approx(w1).epsilon(1e-9));
    CHECK(at.weights[1] == doctest::Approx(w2).epsilon(1e-9));
    CHECK(at.residual <= 1e-10);
    CHECK(at.uniqueness == Uniqueness::Unique);
}

TEST_CASE("recover_atoms prunes negligible mass and flags curve support") {
    GridTableau t = monomial_line(3, 128);
    const std::vector<double> z1 = {0.5};
    Eigen::VectorXd chat = 2.0 * eval_at(t, z1);

    ZeroSet zeros;
    zeros.points = {z1, {0.9}};
    zeros.q_values = {0.0, 0.0};
    zeros.kind = SupportKind::Points;
    AtomicPart at = recover_atoms(t, MomentVector(chat), zeros);
    REQUIRE(at.points.size() == 1);  // the 0.9 dictionary column carries no mass
    CHECK(at.points[0][0] == doctest::Approx(0.5));

    zeros.kind = SupportKind::SampledCurve;
    AtomicPart curve = recover_atoms(t, MomentVector(chat), zeros);
    CHECK(curve.uniqueness == Uniqueness::NonUnique);
}

TEST_CASE("recover_atoms rejects unrepresentable residuals") {
    GridTableau t = monomial_line(3, 128);
    ZeroSet zeros;
    zeros.points = {{0.5}};
    zeros.q_values = {0.0};
    zeros.kind = SupportKind::Points;
    // alpha(0.5) = (1, 0.5, 0.25); the target below is orthogonal-ish junk
    // that no nonnegative single-atom combination can reach.
    Eigen::VectorXd bad(3);
    bad << 0.0, 1.0, -1.0;
    CHECK_THROWS_AS(recover_atoms(t, MomentVector(bad), zeros), RecoveryError);
}

TEST_CASE("discrete_measure: interior vectors get at most n grid atoms") {
    GridTableau t = monomial_line(2, 512);
    // Moments of the flat density: (1, 1/2) is strictly interior.
    MomentVector c = moments({1.0, 0.5});
    DiscreteMeasure dm = discrete_measure(t, c);
    CHECK(dm.points.size() <= 2);
    CHECK(dm.residual <= 1e-8 * (1.0 + c.v.norm()));
    double mass = 0.0;
    for (double w : dm.weights) mass += w;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("discrete_measure: boundary vector needs the witness zero") {
    DomainBox box{1, {{-kPi, kPi}}, true};
    BasisSystem b = BasisSystem::cosine(box, {{0}, {1}});
    GridTableau t = build_tableau(b, {512}, QuadRule::Midpoint);
    // c = (1, 1) are the moments of a unit atom at x = 0, where the
    // nonnegative witness 1 - cos x vanishes.
    CoefVector witness = coef({1.0, -1.0});
    DiscreteMeasure dm = discrete_measure(t, moments({1.0, 1.0}), &witness);
    REQUIRE(dm.points.size() == 1);
    CHECK(std::fabs(dm.points[0][0]) <= 1e-4);
    CHECK(dm.weights[0] == doctest::Approx(1.0).epsilon(1e-6));
}
