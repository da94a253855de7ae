#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "rmp/kernels.hpp"

using namespace rmp;

namespace {

// Sizes straddling the 4-lane width: remainders 0..3 plus longer runs.
const std::vector<std::size_t> kSizes = {1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 255, 1024, 4097};

std::vector<double> randv(std::mt19937& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

bool close(double a, double b, double rel) {
    return std::fabs(a - b) <= rel * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace

TEST_CASE("scalar kernels: reference values") {
    const kernels::Ops& ops = kernels::scalar_ops();
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 5.0, 6.0};
    const double c[] = {1.0, 0.5, 2.0};
    CHECK(ops.dot(a, b, 3) == doctest::Approx(32.0));
    CHECK(ops.dot3(a, b, c, 3) == doctest::Approx(4.0 + 5.0 + 36.0));
    CHECK(ops.sum(a, 3) == doctest::Approx(6.0));
    CHECK(ops.max_abs(b, 3) == doctest::Approx(6.0));

    double y[3] = {1.0, 1.0, 1.0};
    ops.scale_add(y, a, 2.0, 3);
    CHECK(y[2] == doctest::Approx(7.0));

    std::size_t arg = 99;
    CHECK(ops.min_value(b, 3, &arg) == doctest::Approx(4.0));
    CHECK(arg == 0);

    const double mask[] = {0.0, 1.0, 1.0};
    CHECK(ops.masked_min(a, mask, 3, &arg) == doctest::Approx(2.0));
    CHECK(arg == 1);
    const double none[] = {0.0, 0.0, 0.0};
    CHECK(ops.masked_min(a, none, 3, &arg) == std::numeric_limits<double>::infinity());
}

TEST_CASE("ratio_weights: removable 0/0 contributes exactly zero") {
    const kernels::Ops& ops = kernels::scalar_ops();
    const double w[] = {1.0, 1.0, 2.0};
    const double p[] = {0.0, 3.0, 0.0};
    const double q[] = {0.0, 2.0, -1.0};  // p zero where q is zero or negative
    double out[3];
    ops.ratio_weights(w, p, q, out, 3);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(1.5));
    CHECK(out[2] == 0.0);
}

TEST_CASE("weighted_plogq: zero-mass nodes are skipped") {
    const kernels::Ops& ops = kernels::scalar_ops();
    const double w[] = {1.0, 1.0};
    const double p[] = {0.0, 2.0};
    const double q[] = {0.0, std::exp(1.0)};  // q=0 is legal under zero mass
    CHECK(ops.weighted_plogq(w, p, q, 2) == doctest::Approx(2.0));
}

TEST_CASE("avx2 kernels match scalar") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; skipping equivalence checks");
        return;
    }
    const kernels::Ops& s = kernels::scalar_ops();
    const kernels::Ops& v = kernels::avx2_ops();
    std::mt19937 rng(20240811);

    for (std::size_t n : kSizes) {
        CAPTURE(n);
        auto a = randv(rng, n, -2.0, 2.0);
        auto b = randv(rng, n, -2.0, 2.0);
        auto w = randv(rng, n, 0.0, 1.0);
        auto q = randv(rng, n, 0.1, 5.0);
        auto p = randv(rng, n, -1.0, 3.0);
        // Sprinkle exact zeros into p so the 0/0 convention is exercised.
        for (std::size_t j = 0; j < n; j += 5) p[j] = 0.0;

        // Aggregates reassociate across lanes; the bound scales with n.
        const double rel = 1e-13 * static_cast<double>(n);
        CHECK(close(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n), rel));
        CHECK(close(s.dot3(a.data(), b.data(), q.data(), n),
                    v.dot3(a.data(), b.data(), q.data(), n), rel));
        CHECK(close(s.sum(a.data(), n), v.sum(a.data(), n), rel));
        CHECK(close(s.weighted_plogq(w.data(), p.data(), q.data(), n),
                    v.weighted_plogq(w.data(), p.data(), q.data(), n), rel));
        CHECK(close(s.recip_weighted_sum(w.data(), q.data(), n),
                    v.recip_weighted_sum(w.data(), q.data(), n), rel));
        CHECK(s.max_abs(a.data(), n) == v.max_abs(a.data(), n));

        std::vector<double> y1(a), y2(a), o1(n), o2(n);
        s.scale_add(y1.data(), b.data(), 0.37, n);
        v.scale_add(y2.data(), b.data(), 0.37, n);
        for (std::size_t j = 0; j < n; ++j) CHECK(close(y1[j], y2[j], 1e-14));

        s.div(a.data(), q.data(), o1.data(), n);
        v.div(a.data(), q.data(), o2.data(), n);
        for (std::size_t j = 0; j < n; ++j) CHECK(o1[j] == o2[j]);

        s.ratio_weights(w.data(), p.data(), q.data(), o1.data(), n);
        v.ratio_weights(w.data(), p.data(), q.data(), o2.data(), n);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(close(o1[j], o2[j], 1e-14));
            if (p[j] == 0.0) CHECK(o2[j] == 0.0);
        }

        std::size_t ia = 0, ib = 0;
        CHECK(s.min_value(a.data(), n, &ia) == v.min_value(a.data(), n, &ib));
        CHECK(ia == ib);
        std::vector<double> mask = randv(rng, n, 0.0, 1.0);
        for (std::size_t j = 0; j < n; j += 3) mask[j] = 0.0;
        const double m1 = s.masked_min(a.data(), mask.data(), n, &ia);
        const double m2 = v.masked_min(a.data(), mask.data(), n, &ib);
        CHECK(m1 == m2);
        CHECK(ia == ib);
    }
}

TEST_CASE("avx2 vlog accuracy across scales") {
    if (!kernels::avx2_available()) return;
    const kernels::Ops& v = kernels::avx2_ops();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ue(-18.0, 18.0);
    std::vector<double> x(4096), out(4096);
    for (double& xi : x) xi = std::exp(ue(rng));
    x[0] = 1.0;
    x[1] = std::nextafter(1.0, 2.0);
    v.vlog(x.data(), out.data(), x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double ref = std::log(x[j]);
        CHECK(std::fabs(out[j] - ref) <= 5e-15 * std::fabs(ref) + 1e-18);
    }
}

TEST_CASE("kernel selection") {
    CHECK(std::string(kernels::select(kernels::Kind::Scalar).name) == "scalar");
    const kernels::Ops& chosen = kernels::select(kernels::Kind::Auto);
    CHECK((std::string(chosen.name) == "scalar" || std::string(chosen.name) == "avx2"));
    if (kernels::avx2_available())
        CHECK(std::string(kernels::select(kernels::Kind::Avx2).name) == "avx2");
}
