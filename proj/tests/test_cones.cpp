#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rmp/cones.hpp"
#include "rmp/errors.hpp"

using namespace rmp;

namespace {

constexpr double kPi = std::numbers::pi;

GridTableau cosine_line(int n, int res) {
    DomainBox box{1, {{-kPi, kPi}}, true};
    std::vector<std::vector<int>> idx;
    for (int k = 0; k < n; ++k) idx.push_back({k});
    return build_tableau(BasisSystem::cosine(box, idx), {res}, QuadRule::Midpoint);
}

GridTableau monomial_line(int n, int res) {
    DomainBox box{1, {{0.0, 1.0}}, false};
    std::vector<std::vector<int>> idx;
    for (int k = 0; k < n; ++k) idx.push_back({k});
    return build_tableau(BasisSystem::monomial(box, idx), {res}, QuadRule::Midpoint);
}

}  // namespace

TEST_CASE("classify_moment: trichotomy for the trig moment cone") {
    GridTableau t = cosine_line(2, 1024);
    // c = (1, s): interior iff |s| < 1 (measure cos-moment bound).
    ConeReport in = classify_moment(t, moments({1.0, 0.4}));
    CHECK(in.region == ConeRegion::Interior);
    CHECK(in.value == doctest::Approx(0.6).epsilon(1e-4));

    ConeReport bd = classify_moment(t, moments({1.0, 1.0}));
    CHECK(bd.region == ConeRegion::Boundary);
    CHECK(std::fabs(bd.value) <= 1e-6);

    ConeReport ex = classify_moment(t, moments({1.0, 1.3}));
    CHECK(ex.region == ConeRegion::Exterior);
    CHECK(ex.value < -0.1);
    // The witness is a nonnegative polynomial with negative pairing.
    REQUIRE(ex.witness.size() == 2);
    CHECK(ex.witness_min >= -1e-7);
}

TEST_CASE("classify_moment matches the toeplitz cross-check") {
    GridTableau t = cosine_line(3, 1024);
    ConeOptions opt;
    opt.refine_depth = 10;  // boundary cases need tight witness-zero localization
    for (double s : {0.0, 0.5, 0.9, 1.5, -0.8}) {
        MomentVector c = moments({1.0, s, 2.0 * s * s - 1.0});  // cos moments of delta
        // at acos-like placements: s in [-1,1] puts c on the boundary.
        ConeReport r = classify_moment(t, c, opt);
        auto cross = toeplitz_cross_check(*t.basis, c);
        REQUIRE(cross.has_value());
        if (std::fabs(s) < 1.0) {
            CHECK(r.region == ConeRegion::Boundary);
            CHECK(*cross == ConeRegion::Boundary);
        } else {
            CHECK(r.region == ConeRegion::Exterior);
            CHECK(*cross == ConeRegion::Exterior);
        }
    }
    // Strictly interior sample: moments of the flat measure.
    ConeReport flat = classify_moment(t, moments({1.0, 0.0, 0.0}));
    CHECK(flat.region == ConeRegion::Interior);
    CHECK(*toeplitz_cross_check(*t.basis, moments({1.0, 0.0, 0.0})) == ConeRegion::Interior);
}

TEST_CASE("polynomial_min: corner and interior minima") {
    DomainBox box{1, {{0.0, 1.0}}, false};
    BasisSystem b = BasisSystem::monomial(box, {{0}, {1}, {2}});
    // (x - 1/2)^2: interior zero off the node lattice; the value closes
    // quadratically in the localization depth.
    PolyMin pm = polynomial_min(b, coef({0.25, -1.0, 1.0}), {64}, 12);
    CHECK(std::fabs(pm.value) <= 1e-10);
    CHECK(pm.point[0] == doctest::Approx(0.5).epsilon(1e-4));

    // 1 + cos x on [-pi, pi]: zeros exactly at both domain corners.
    DomainBox cb{1, {{-kPi, kPi}}, true};
    BasisSystem cbasis = BasisSystem::cosine(cb, {{0}, {1}});
    PolyMin cm = polynomial_min(cbasis, coef({1.0, 1.0}), {64});
    CHECK(std::fabs(cm.value) <= 1e-10);
    CHECK(std::fabs(cm.point[0]) == doctest::Approx(kPi).epsilon(1e-6));
}

TEST_CASE("polynomial_cone_check classifies sign patterns") {
    GridTableau t = monomial_line(3, 128);
    CHECK(polynomial_cone_check(t, coef({1.0, 0.0, 0.0})).region == ConeRegion::Interior);
    CHECK(polynomial_cone_check(t, coef({0.25, -1.0, 1.0}), 1e-9, 12).region ==
          ConeRegion::Boundary);
    CHECK(polynomial_cone_check(t, coef({-0.1, 0.0, 1.0})).region == ConeRegion::Exterior);
    // x itself: zero sits exactly on the domain corner x=0.
    PolyCheck edge = polynomial_cone_check(t, coef({0.0, 1.0, 0.0}));
    CHECK(edge.region == ConeRegion::Boundary);
}

TEST_CASE("dual_lambda agrees with the classification value") {
    GridTableau t = cosine_line(2, 1024);
    for (double s : {0.2, 0.7, -0.5}) {
        MomentVector c = moments({1.0, s});
        const double v = classify_moment(t, c).value;
        const double lam = dual_lambda(t, c, {}, -10.0, 10.0, 1e-8);
        CHECK(lam == doctest::Approx(v).epsilon(1e-5));
    }
    CHECK_THROWS_AS(dual_lambda(t, moments({1.0, 0.2}), {}, 5.0, 10.0, 1e-8), DomainError);
}

TEST_CASE("classification is stable under moment scaling") {
    GridTableau t = cosine_line(3, 512);
    MomentVector c = moments({1.0, 0.3, -0.2});
    ConeReport base = classify_moment(t, c);
    for (double s : {0.5, 2.0, 10.0}) {
        ConeReport scaled = classify_moment(t, MomentVector(Eigen::VectorXd(s * c.v)));
        CHECK(scaled.region == base.region);
        CHECK(scaled.value == doctest::Approx(s * base.value).epsilon(1e-6));
    }
}
