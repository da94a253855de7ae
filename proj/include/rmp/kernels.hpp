#pragma once

#include <cstddef>

// Hot node-loop kernels. Every operation exists as a scalar reference
// implementation and as an AVX2+FMA variant; `select` picks one at runtime.
// For a fixed kernel choice results are bit-stable run to run (fixed
// accumulation order, no threading). The two variants are not bit-identical
// to each other because vector lanes reassociate the sums; equivalence is
// enforced by tests at tight relative tolerances.
namespace rmp::kernels {

struct Ops {
    const char* name;

    // sum_j a[j] * b[j]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_j a[j] * b[j] * c[j]
    double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
    // sum_j a[j]
    double (*sum)(const double* a, std::size_t n);
    // y[j] += s * x[j]
    void (*scale_add)(double* y, const double* x, double s, std::size_t n);
    // out[j] = a[j] / b[j]
    void (*div)(const double* a, const double* b, double* out, std::size_t n);
    // out[j] = w[j] * p[j] / q[j]; nodes with p[j] == 0 contribute exactly 0
    // regardless of q[j] (removable 0/0 convention).
    void (*ratio_weights)(const double* w, const double* p, const double* q, double* out,
                          std::size_t n);
    // sum_j w[j] * p[j] * log(q[j]); terms with p[j] == 0 are skipped.
    // Preconditions: q[j] > 0 wherever w[j]*p[j] != 0.
    double (*weighted_plogq)(const double* w, const double* p, const double* q, std::size_t n);
    // sum_j w[j] / q[j]
    double (*recip_weighted_sum)(const double* w, const double* q, std::size_t n);
    // out[j] = log(x[j]); x[j] must be a positive normal double.
    void (*vlog)(const double* x, double* out, std::size_t n);
    // minimum of x with its first attaining index.
    double (*min_value)(const double* x, std::size_t n, std::size_t* argmin);
    // min over j with mask[j] != 0 of x[j]; +inf when the mask is empty.
    double (*masked_min)(const double* x, const double* mask, std::size_t n, std::size_t* argmin);
    // max_j |x[j]|
    double (*max_abs)(const double* x, std::size_t n);
};

enum class Kind { Auto, Scalar, Avx2 };

// Auto honors the RMP_KERNELS environment variable ("scalar", "avx2",
// "auto") and falls back to scalar when AVX2+FMA is not available.
const Ops& select(Kind kind = Kind::Auto);

bool avx2_available();

const Ops& scalar_ops();
const Ops& avx2_ops();  // callable only when avx2_available()

}  // namespace rmp::kernels
