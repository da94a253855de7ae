// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; the dispatcher only routes here after a cpuid check.
#include <cmath>
#include <cstdint>
#include <immintrin.h>
#include <limits>

#include "rmp/kernels.hpp"

namespace rmp::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double v_dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
    double tail = 0.0;
    for (; j < n; ++j) tail += a[j] * b[j];
    return hsum(acc) + tail;
}

double v_dot3(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + j), acc);
    }
    double tail = 0.0;
    for (; j < n; ++j) tail += a[j] * b[j] * c[j];
    return hsum(acc) + tail;
}

double v_sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + j));
    double tail = 0.0;
    for (; j < n; ++j) tail += a[j];
    return hsum(acc) + tail;
}

void v_scale_add(double* y, const double* x, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d vy = _mm256_loadu_pd(y + j);
        vy = _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + j), vy);
        _mm256_storeu_pd(y + j, vy);
    }
    for (; j < n; ++j) y[j] += s * x[j];
}

void v_div(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        _mm256_storeu_pd(out + j, _mm256_div_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
    for (; j < n; ++j) out[j] = a[j] / b[j];
}

void v_ratio_weights(const double* w, const double* p, const double* q, double* out,
                     std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d vp = _mm256_loadu_pd(p + j);
        const __m256d r = _mm256_div_pd(_mm256_mul_pd(_mm256_loadu_pd(w + j), vp),
                                        _mm256_loadu_pd(q + j));
        // p == 0 lanes forced to 0 so a 0/0 node contributes nothing.
        const __m256d keep = _mm256_cmp_pd(vp, zero, _CMP_NEQ_OQ);
        _mm256_storeu_pd(out + j, _mm256_and_pd(r, keep));
    }
    for (; j < n; ++j) out[j] = (p[j] == 0.0) ? 0.0 : w[j] * p[j] / q[j];
}

double v_recip_weighted_sum(const double* w, const double* q, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(q + j)));
    double tail = 0.0;
    for (; j < n; ++j) tail += w[j] / q[j];
    return hsum(acc) + tail;
}

// log for positive normal doubles: mantissa/exponent split, then a rational
// approximation on [sqrt(1/2), sqrt(2)). Max observed error is ~2 ulp.
const __m256d LOG_C0 = _mm256_set1_pd(1.01875663804580931796e-4);
const __m256d LOG_C1 = _mm256_set1_pd(4.97494994976747001425e-1);
const __m256d LOG_C2 = _mm256_set1_pd(4.70579119878881725854e0);
const __m256d LOG_C3 = _mm256_set1_pd(1.44989225341610930846e1);
const __m256d LOG_C4 = _mm256_set1_pd(1.79368678507819816313e1);
const __m256d LOG_C5 = _mm256_set1_pd(7.70838733755885391666e0);
const __m256d LOG_D0 = _mm256_set1_pd(1.12873587189167450590e1);
const __m256d LOG_D1 = _mm256_set1_pd(4.52279145837532221105e1);
const __m256d LOG_D2 = _mm256_set1_pd(8.29875266912776603211e1);
const __m256d LOG_D3 = _mm256_set1_pd(7.11544750618563894466e1);
const __m256d LOG_D4 = _mm256_set1_pd(2.31251620126765340583e1);

inline __m256d vlog4(__m256d x) {
    const __m256i ix = _mm256_castpd_si256(x);
    // Exponent as signed integer, biased so the mantissa lands in [0.5, 1).
    const __m256i exp_raw =
        _mm256_srli_epi64(_mm256_and_si256(ix, _mm256_set1_epi64x(0x7ff0000000000000LL)), 52);
    // int64 -> double via the 2^52 magic-number trick (values are tiny).
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(exp_raw, magic)),
                              _mm256_castsi256_pd(magic));
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(ix, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                        _mm256_set1_epi64x(0x3fe0000000000000LL)));

    const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
    const __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
    // m < sqrt(1/2): e -= 1, z = 2m - 1; else z = m - 1.
    e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
    const __m256d z_lo = _mm256_sub_pd(_mm256_add_pd(m, m), _mm256_set1_pd(1.0));
    const __m256d z_hi = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    const __m256d z = _mm256_blendv_pd(z_hi, z_lo, below);

    const __m256d z2 = _mm256_mul_pd(z, z);
    __m256d pn = LOG_C0;
    pn = _mm256_fmadd_pd(pn, z, LOG_C1);
    pn = _mm256_fmadd_pd(pn, z, LOG_C2);
    pn = _mm256_fmadd_pd(pn, z, LOG_C3);
    pn = _mm256_fmadd_pd(pn, z, LOG_C4);
    pn = _mm256_fmadd_pd(pn, z, LOG_C5);
    __m256d pd = _mm256_add_pd(z, LOG_D0);
    pd = _mm256_fmadd_pd(pd, z, LOG_D1);
    pd = _mm256_fmadd_pd(pd, z, LOG_D2);
    pd = _mm256_fmadd_pd(pd, z, LOG_D3);
    pd = _mm256_fmadd_pd(pd, z, LOG_D4);

    __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, z2), _mm256_div_pd(pn, pd));
    y = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z2, y);
    __m256d r = _mm256_add_pd(z, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
    return r;
}

void v_vlog(const double* x, double* out, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out + j, vlog4(_mm256_loadu_pd(x + j)));
    for (; j < n; ++j) out[j] = std::log(x[j]);
}

double v_weighted_plogq(const double* w, const double* p, const double* q, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d vp = _mm256_loadu_pd(p + j);
        const __m256d wp = _mm256_mul_pd(_mm256_loadu_pd(w + j), vp);
        const __m256d keep = _mm256_cmp_pd(wp, zero, _CMP_NEQ_OQ);
        // Skipped lanes log(1) = 0 so they cannot poison the accumulator.
        const __m256d vq = _mm256_blendv_pd(one, _mm256_loadu_pd(q + j), keep);
        acc = _mm256_fmadd_pd(_mm256_and_pd(wp, keep), vlog4(vq), acc);
    }
    double tail = 0.0;
    for (; j < n; ++j) {
        const double wp = w[j] * p[j];
        if (wp != 0.0) tail += wp * std::log(q[j]);
    }
    return hsum(acc) + tail;
}

double v_min_value(const double* x, std::size_t n, std::size_t* argmin) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    std::size_t j = 0;
    if (n >= 4) {
        __m256d vbest = _mm256_loadu_pd(x);
        for (j = 4; j + 4 <= n; j += 4) vbest = _mm256_min_pd(vbest, _mm256_loadu_pd(x + j));
        double lanes[4];
        _mm256_storeu_pd(lanes, vbest);
        best = lanes[0];
        for (int k = 1; k < 4; ++k)
            if (lanes[k] < best) best = lanes[k];
        for (; j < n; ++j)
            if (x[j] < best) best = x[j];
        // Second pass pins the first attaining index deterministically.
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] == best) {
                at = i;
                break;
            }
    } else {
        for (; j < n; ++j)
            if (x[j] < best) {
                best = x[j];
                at = j;
            }
    }
    if (argmin) *argmin = at;
    return best;
}

double v_masked_min(const double* x, const double* mask, std::size_t n, std::size_t* argmin) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d vbest = inf;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(mask + j), zero, _CMP_NEQ_OQ);
        vbest = _mm256_min_pd(vbest, _mm256_blendv_pd(inf, _mm256_loadu_pd(x + j), keep));
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, vbest);
    double best = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] < best) best = lanes[k];
    for (; j < n; ++j)
        if (mask[j] != 0.0 && x[j] < best) best = x[j];
    std::size_t at = n;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i] != 0.0 && x[i] == best) {
            at = i;
            break;
        }
    if (argmin) *argmin = at;
    return best;
}

double v_max_abs(const double* x, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d vbest = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        vbest = _mm256_max_pd(vbest, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + j)));
    double lanes[4];
    _mm256_storeu_pd(lanes, vbest);
    double best = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] > best) best = lanes[k];
    for (; j < n; ++j) {
        const double v = std::fabs(x[j]);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        "avx2",          v_dot,  v_dot3, v_sum,          v_scale_add, v_div,
        v_ratio_weights, v_weighted_plogq, v_recip_weighted_sum,
        v_vlog,          v_min_value, v_masked_min, v_max_abs,
    };
    return ops;
}

}  // namespace rmp::kernels
