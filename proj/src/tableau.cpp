#include "rmp/tableau.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rmp {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

namespace {

// Per-axis tables that make tensor-grid assembly O(d) per node per function.
struct AxisTables {
    // cosine: cos/sin of (index * axis node); monomial: axis node^power.
    std::vector<std::vector<double>> a, b;
};

AxisTables make_axis_tables(const BasisSystem& basis, int k,
                            const std::vector<std::vector<double>>& axis_nodes) {
    AxisTables t;
    const int d = basis.dim();
    t.a.resize(d);
    t.b.resize(d);
    for (int ax = 0; ax < d; ++ax) {
        const auto& xs = axis_nodes[ax];
        t.a[ax].resize(xs.size());
        t.b[ax].resize(xs.size());
        if (basis.family() == BasisFamily::CosineTensor) {
            const int idx = basis.indices()[k][ax];
            for (std::size_t i = 0; i < xs.size(); ++i) {
                t.a[ax][i] = std::cos(idx * xs[i]);
                t.b[ax][i] = std::sin(idx * xs[i]);
            }
        } else {
            const int pw = basis.indices()[k][ax];
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double p = 1.0;
                for (int r = 0; r < pw; ++r) p *= xs[i];
                t.a[ax][i] = p;
            }
        }
    }
    return t;
}

}  // namespace

double GridTableau::node_coord(std::size_t j, int axis) const {
    std::size_t stride = 1;
    for (int a = dim() - 1; a > axis; --a) stride *= resolution[a];
    const std::size_t i = (j / stride) % resolution[axis];
    return axis_nodes[axis][i];
}

void GridTableau::node(std::size_t j, double* out) const {
    std::size_t rest = j;
    for (int a = dim() - 1; a >= 0; --a) {
        out[a] = axis_nodes[a][rest % resolution[a]];
        rest /= resolution[a];
    }
}

double GridTableau::cell_halfwidth(int axis) const {
    const auto& [lo, hi] = basis->box().bounds[axis];
    return 0.5 * (hi - lo) / resolution[axis];
}

void GridTableau::eval_poly(const Eigen::VectorXd& q, double* out, const kernels::Ops& ops) const {
    for (std::size_t j = 0; j < node_count; ++j) out[j] = 0.0;
    for (int k = 0; k < n; ++k)
        if (q[k] != 0.0) ops.scale_add(out, cols[k].data(), q[k], node_count);
}

GridTableau build_tableau(std::shared_ptr<const BasisSystem> basis, std::vector<int> resolution,
                          QuadRule rule) {
    const BasisSystem& b = *basis;
    const int d = b.dim();
    if (static_cast<int>(resolution.size()) != d)
        throw DomainError("tableau resolution arity does not match dimension");
    std::size_t count = 1;
    for (int r : resolution) {
        if (r < 1) throw DomainError("tableau resolution must be >= 1 per axis");
        count *= static_cast<std::size_t>(r);
    }
    if (b.family() == BasisFamily::Tabulated) {
        if (rule != QuadRule::Midpoint)
            throw DomainError("tabulated bases are bound to midpoint grids");
        if (resolution != b.tab_resolution())
            throw DomainError("tabulated basis is bound to a different resolution");
    }

    GridTableau t;
    t.basis = std::move(basis);
    t.rule = rule;
    t.resolution = resolution;
    t.node_count = count;
    t.n = b.size();

    // Per-axis nodes and weights.
    std::vector<std::vector<double>> axis_w(d);
    t.axis_nodes.resize(d);
    for (int a = 0; a < d; ++a) {
        const auto& [lo, hi] = b.box().bounds[a];
        const int m = resolution[a];
        t.axis_nodes[a].resize(m);
        axis_w[a].resize(m);
        if (rule == QuadRule::Midpoint) {
            const double h = (hi - lo) / m;
            for (int i = 0; i < m; ++i) {
                t.axis_nodes[a][i] = lo + h * (i + 0.5);
                axis_w[a][i] = h;
            }
        } else {
            std::vector<double> gn, gw;
            gauss_legendre(m, gn, gw);
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (int i = 0; i < m; ++i) {
                t.axis_nodes[a][i] = mid + half * gn[i];
                axis_w[a][i] = half * gw[i];
            }
        }
    }

    const double wscale = b.box().normalize ? 1.0 / b.box().volume() : 1.0;
    t.weights.resize(count);
    {
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t j = 0; j < count; ++j) {
            double w = wscale;
            for (int a = 0; a < d; ++a) w *= axis_w[a][idx[a]];
            t.weights[j] = w;
            for (int a = d - 1; a >= 0; --a) {
                if (++idx[a] < static_cast<std::size_t>(resolution[a])) break;
                idx[a] = 0;
            }
        }
    }

    // Basis value columns.
    t.cols.assign(t.n, std::vector<double>(count));
    if (b.family() == BasisFamily::Tabulated) {
        for (int k = 0; k < t.n; ++k) t.cols[k] = b.tab_values()[k];
    } else if (b.family() == BasisFamily::FractionalPower1d) {
        for (int k = 0; k < t.n; ++k)
            for (std::size_t j = 0; j < count; ++j)
                t.cols[k][j] = b.evaluate_one(k, &t.axis_nodes[0][j]);
    } else {
        for (int k = 0; k < t.n; ++k) {
            const AxisTables tabs = make_axis_tables(b, k, t.axis_nodes);
            std::vector<std::size_t> idx(d, 0);
            const bool trig = b.family() == BasisFamily::CosineTensor;
            for (std::size_t j = 0; j < count; ++j) {
                if (trig) {
                    // cos(sum_a k_a x_a) accumulated by angle addition.
                    double c = tabs.a[0][idx[0]], s = tabs.b[0][idx[0]];
                    for (int a = 1; a < d; ++a) {
                        const double ca = tabs.a[a][idx[a]], sa = tabs.b[a][idx[a]];
                        const double cn = c * ca - s * sa;
                        s = c * sa + s * ca;
                        c = cn;
                    }
                    t.cols[k][j] = c;
                } else {
                    double v = 1.0;
                    for (int a = 0; a < d; ++a) v *= tabs.a[a][idx[a]];
                    t.cols[k][j] = v;
                }
                for (int a = d - 1; a >= 0; --a) {
                    if (++idx[a] < static_cast<std::size_t>(resolution[a])) break;
                    idx[a] = 0;
                }
            }
        }
    }

    const auto& ops = kernels::select();
    t.measure_total = ops.sum(t.weights.data(), count);
    t.basis_moments.resize(t.n);
    for (int k = 0; k < t.n; ++k)
        t.basis_moments[k] = ops.dot(t.weights.data(), t.cols[k].data(), count);

    const RankReport rr = tableau_rank(t);
    if (rr.rank < t.n)
        throw DomainError("basis value table is rank-deficient on this grid (rank " +
                          std::to_string(rr.rank) + " of " + std::to_string(t.n) +
                          "); the family is numerically dependent");
    return t;
}

RankReport tableau_rank(const GridTableau& t, double tol_rel) {
    // SVD of the sqrt(w)-scaled value table; rows are nodes.
    Eigen::MatrixXd A(t.node_count, t.n);
    for (int k = 0; k < t.n; ++k)
        for (std::size_t j = 0; j < t.node_count; ++j)
            A(j, k) = std::sqrt(t.weights[j]) * t.cols[k][j];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    RankReport r;
    r.singular_values = svd.singularValues();
    const double smax = r.singular_values[0];
    for (int i = 0; i < r.singular_values.size(); ++i)
        if (r.singular_values[i] > tol_rel * smax) ++r.rank;
    const double smin = r.singular_values[r.singular_values.size() - 1];
    r.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    return r;
}

}  // namespace rmp
