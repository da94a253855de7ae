#include "rmp/primal.hpp"

#include <cmath>
#include <limits>

#include "rmp/errors.hpp"
#include "rmp/kernels.hpp"
#include "rmp/quadrature.hpp"

namespace rmp {
namespace {

void numerator_at_nodes(const GridTableau& t, const CoefVector& p, std::vector<double>& P) {
    if (p.size() != t.n) throw DomainError("coefficient vector length does not match the basis");
    P.resize(t.node_count);
    t.eval_poly(p.v, P.data(), kernels::scalar_ops());
}

}  // namespace

double primal_objective(const GridTableau& t, const CoefVector& p, const DensityOnGrid& density) {
    if (density.values.size() != t.node_count)
        throw DomainError("density values do not match the grid node count");
    std::vector<double> P;
    numerator_at_nodes(t, p, P);
    double acc = 0.0;
    for (std::size_t j = 0; j < t.node_count; ++j) {
        const double wp = t.weights[j] * P[j];
        if (wp == 0.0) continue;
        const double phi = density.values[j];
        if (!(phi > 0.0)) return -std::numeric_limits<double>::infinity();
        acc += wp * std::log(phi);
    }
    return acc;
}

double kl_divergence(const GridTableau& t, const CoefVector& p, const DensityOnGrid& density) {
    if (density.values.size() != t.node_count)
        throw DomainError("density values do not match the grid node count");
    std::vector<double> P;
    numerator_at_nodes(t, p, P);
    double acc = 0.0;
    for (std::size_t j = 0; j < t.node_count; ++j) {
        if (P[j] == 0.0) continue;
        const double phi = density.values[j];
        if (!(phi > 0.0)) return std::numeric_limits<double>::infinity();
        acc += t.weights[j] * P[j] * std::log(P[j] / phi);
    }
    return acc;
}

MomentVector density_moments(const GridTableau& t, const DensityOnGrid& density) {
    if (density.values.size() != t.node_count)
        throw DomainError("density values do not match the grid node count");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(t.n);
    for (int k = 0; k < t.n; ++k) {
        double acc = 0.0;
        const double* col = t.cols[k].data();
        for (std::size_t j = 0; j < t.node_count; ++j)
            acc += t.weights[j] * density.values[j] * col[j];
        m[k] = acc;
    }
    if (density.singular) {
        std::vector<double> alpha(t.n);
        for (std::size_t i = 0; i < density.singular->points.size(); ++i) {
            t.basis->evaluate(density.singular->points[i].data(), alpha.data());
            for (int k = 0; k < t.n; ++k) m[k] += density.singular->weights[i] * alpha[k];
        }
    }
    return MomentVector(m);
}

double duality_gap(const GridTableau& t, const MomentVector& c, const CoefVector& p,
                   const SolveOutcome& outcome) {
    if (outcome.q_hat.size() != t.n)
        throw DomainError("outcome denominator does not match the basis");
    std::vector<double> P;
    numerator_at_nodes(t, p, P);
    std::vector<double> Q(t.node_count);
    t.eval_poly(outcome.q_hat.v, Q.data(), kernels::scalar_ops());

    double primal = 0.0;
    double entropy_shift = 0.0;  // sum w P (log P - 1)
    for (std::size_t j = 0; j < t.node_count; ++j) {
        const double wp = t.weights[j] * P[j];
        if (wp == 0.0) continue;  // covers the 0/0 nodes
        if (!(Q[j] > 0.0) || !(P[j] > 0.0))
            return std::numeric_limits<double>::infinity();
        primal += wp * std::log(P[j] / Q[j]);
        entropy_shift += wp * (std::log(P[j]) - 1.0);
    }
    const double dual = objective(t, c, p, outcome.q_hat).value;
    return std::fabs(primal - dual - entropy_shift);
}

}  // namespace rmp
