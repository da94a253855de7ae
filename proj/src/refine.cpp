#include "rmp/refine.hpp"

#include <algorithm>
#include <cmath>

#include "rmp/errors.hpp"

namespace rmp::refine {
namespace {

double poly_at(const BasisSystem& basis, const Eigen::VectorXd& coef, const double* x) {
    double v = 0.0;
    for (int k = 0; k < basis.size(); ++k) v += coef[k] * basis.evaluate_one(k, x);
    return v;
}

// Center plus all corners of the cell.
template <typename Fn>
void for_each_probe(const std::vector<double>& center, const std::vector<double>& half, Fn&& fn) {
    const int d = static_cast<int>(center.size());
    fn(center.data());
    std::vector<double> x(d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        for (int a = 0; a < d; ++a)
            x[a] = center[a] + ((mask >> a) & 1u ? half[a] : -half[a]);
        fn(x.data());
    }
}

void cell_min_rec(const BasisSystem& basis, const Eigen::VectorXd& coef,
                  const std::vector<double>& center, const std::vector<double>& half, int depth,
                  int branch, int wide_levels, Sample& best) {
    for_each_probe(center, half, [&](const double* x) {
        const double v = poly_at(basis, coef, x);
        if (v < best.value) {
            best.value = v;
            best.x.assign(x, x + center.size());
        }
    });
    if (depth == 0) return;

    const int d = static_cast<int>(center.size());
    std::vector<std::size_t> idx(d, 0);
    std::size_t child_count = 1;
    for (int a = 0; a < d; ++a) child_count *= branch;

    struct Child {
        std::vector<double> c;
        double score;
    };
    std::vector<Child> children;
    children.reserve(child_count);
    std::vector<double> c(d), h(d);
    for (int a = 0; a < d; ++a) h[a] = half[a] / branch;
    for (std::size_t ci = 0; ci < child_count; ++ci) {
        for (int a = 0; a < d; ++a)
            c[a] = center[a] - half[a] + (2.0 * idx[a] + 1.0) * h[a];
        double score = poly_at(basis, coef, c.data());
        for_each_probe(c, h, [&](const double* x) {
            score = std::min(score, poly_at(basis, coef, x));
        });
        children.push_back({c, score});
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < static_cast<std::size_t>(branch)) break;
            idx[a] = 0;
        }
    }
    std::sort(children.begin(), children.end(),
              [](const Child& l, const Child& r) { return l.score < r.score; });
    const int take = (wide_levels > 0) ? std::min<std::size_t>(2, children.size()) : 1;
    for (int i = 0; i < take; ++i)
        cell_min_rec(basis, coef, children[i].c, h, depth - 1, branch,
                     std::max(0, wide_levels - 1), best);
}

}  // namespace

Sample cell_min(const BasisSystem& basis, const Eigen::VectorXd& coef,
                const std::vector<double>& center, const std::vector<double>& half, int depth,
                int branch) {
    Sample best;
    best.x = center;
    best.value = poly_at(basis, coef, center.data());
    cell_min_rec(basis, coef, center, half, depth, branch, 2, best);
    return best;
}

namespace {

struct RatioCtx {
    const BasisSystem& basis;
    const Eigen::VectorXd& p;
    const Eigen::VectorXd& q;
    const RatioIntegralOptions& opt;
    std::vector<double> alpha;  // scratch
};

// Midpoint estimate of the cell integral: per-component alpha * P/Q times
// the cell volume. Returns the scalar ratio used for the refinement test.
double midpoint_estimate(RatioCtx& ctx, const std::vector<double>& center,
                         const std::vector<double>& half, Eigen::VectorXd& out) {
    const int n = ctx.basis.size();
    double vol = 1.0;
    for (double hh : half) vol *= 2.0 * hh;
    for (int k = 0; k < n; ++k) ctx.alpha[k] = ctx.basis.evaluate_one(k, center.data());
    double P = 0.0, Q = 0.0;
    for (int k = 0; k < n; ++k) {
        P += ctx.p[k] * ctx.alpha[k];
        Q += ctx.q[k] * ctx.alpha[k];
    }
    if (Q <= 0.0) {
        if (std::fabs(P) <= ctx.opt.zero_ratio_rel * ctx.opt.p_scale ||
            Q >= -ctx.opt.zero_ratio_rel * ctx.opt.q_scale) {
            out.setZero();
            return 0.0;  // removable 0/0 region
        }
        throw InfeasibleDenominator("denominator non-positive where the numerator carries mass",
                                    0, Q);
    }
    const double ratio = P / Q;
    for (int k = 0; k < n; ++k) out[k] = vol * ctx.alpha[k] * ratio;
    return ratio;
}

void ratio_rec(RatioCtx& ctx, const std::vector<double>& center, const std::vector<double>& half,
               int depth, int branch, Eigen::VectorXd& acc, double wscale) {
    const int d = static_cast<int>(center.size());
    const int n = ctx.basis.size();
    Eigen::VectorXd coarse(n), child_est(n), refined(n);
    const double r_coarse = midpoint_estimate(ctx, center, half, coarse);

    std::size_t child_count = 1;
    for (int a = 0; a < d; ++a) child_count *= branch;
    std::vector<double> c(d), h(d);
    for (int a = 0; a < d; ++a) h[a] = half[a] / branch;

    refined.setZero();
    double r_spread = 0.0;
    std::vector<std::vector<double>> centers(child_count, std::vector<double>(d));
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t ci = 0; ci < child_count; ++ci) {
        for (int a = 0; a < d; ++a)
            centers[ci][a] = center[a] - half[a] + (2.0 * idx[a] + 1.0) * h[a];
        const double rc = midpoint_estimate(ctx, centers[ci], h, child_est);
        refined += child_est;
        r_spread = std::max(r_spread, std::fabs(rc - r_coarse));
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < static_cast<std::size_t>(branch)) break;
            idx[a] = 0;
        }
    }

    const double err = (refined - coarse).cwiseAbs().maxCoeff();
    const double scale = refined.cwiseAbs().maxCoeff();
    if (depth <= 0 || err <= std::max(ctx.opt.abs_tol, ctx.opt.rel_tol * scale)) {
        // Richardson step: midpoint error drops by branch^2 per split.
        const double boost = 1.0 / (static_cast<double>(branch) * branch - 1.0);
        acc += wscale * (refined + boost * (refined - coarse));
        return;
    }
    for (std::size_t ci = 0; ci < child_count; ++ci)
        ratio_rec(ctx, centers[ci], h, depth - 1, branch, acc, wscale);
}

}  // namespace

void cell_ratio_integral(const BasisSystem& basis, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q, const std::vector<double>& center,
                         const std::vector<double>& half, const RatioIntegralOptions& opt,
                         double wscale, Eigen::VectorXd& acc) {
    RatioCtx ctx{basis, p, q, opt, std::vector<double>(basis.size())};
    const int branch = (basis.dim() == 1) ? 4 : 2;
    ratio_rec(ctx, center, half, opt.max_depth, branch, acc, wscale);
}

}  // namespace rmp::refine
