#include <cmath>
#include <limits>

#include "rmp/kernels.hpp"

namespace rmp::kernels {
namespace {

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
    return acc;
}

double s_dot3(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j] * c[j];
    return acc;
}

double s_sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j];
    return acc;
}

void s_scale_add(double* y, const double* x, double s, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) y[j] += s * x[j];
}

void s_div(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = a[j] / b[j];
}

void s_ratio_weights(const double* w, const double* p, const double* q, double* out,
                     std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = (p[j] == 0.0) ? 0.0 : w[j] * p[j] / q[j];
}

double s_weighted_plogq(const double* w, const double* p, const double* q, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double wp = w[j] * p[j];
        if (wp != 0.0) acc += wp * std::log(q[j]);
    }
    return acc;
}

double s_recip_weighted_sum(const double* w, const double* q, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += w[j] / q[j];
    return acc;
}

void s_vlog(const double* x, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = std::log(x[j]);
}

double s_min_value(const double* x, std::size_t n, std::size_t* argmin) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (x[j] < best) {
            best = x[j];
            at = j;
        }
    }
    if (argmin) *argmin = at;
    return best;
}

double s_masked_min(const double* x, const double* mask, std::size_t n, std::size_t* argmin) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t at = n;
    for (std::size_t j = 0; j < n; ++j) {
        if (mask[j] != 0.0 && x[j] < best) {
            best = x[j];
            at = j;
        }
    }
    if (argmin) *argmin = at;
    return best;
}

double s_max_abs(const double* x, std::size_t n) {
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = std::fabs(x[j]);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",           s_dot,  s_dot3, s_sum,          s_scale_add, s_div,
        s_ratio_weights,    s_weighted_plogq, s_recip_weighted_sum,
        s_vlog,             s_min_value, s_masked_min, s_max_abs,
    };
    return ops;
}

}  // namespace rmp::kernels
