#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "rmp/domain.hpp"
#include "rmp/kernels.hpp"

namespace rmp {

enum class QuadRule { Midpoint, GaussLegendre };

// Quadrature nodes, weights and the basis value table over a tensor grid.
// Values are stored basis-major (cols[k][j] = alpha_k at node j) so the node
// loops stream contiguously. Node j linearizes axis 0 slowest.
struct GridTableau {
    std::shared_ptr<const BasisSystem> basis;
    QuadRule rule = QuadRule::Midpoint;
    std::vector<int> resolution;          // nodes per axis
    std::size_t node_count = 0;
    int n = 0;                            // number of basis functions
    std::vector<double> weights;          // includes 1/volume when normalized
    std::vector<std::vector<double>> cols;
    std::vector<std::vector<double>> axis_nodes;  // per-axis 1-d nodes
    double measure_total = 0.0;           // sum of weights
    Eigen::VectorXd basis_moments;        // sum_j w_j alpha(x_j)

    int dim() const { return basis->dim(); }
    double node_coord(std::size_t j, int axis) const;
    void node(std::size_t j, double* out) const;
    // Half-widths of the midpoint cell around node j (Midpoint rule only).
    double cell_halfwidth(int axis) const;

    // P(x_j) for coefficient vector q, written into out[0..node_count).
    void eval_poly(const Eigen::VectorXd& q, double* out, const kernels::Ops& ops) const;
};

GridTableau build_tableau(std::shared_ptr<const BasisSystem> basis, std::vector<int> resolution,
                          QuadRule rule);
inline GridTableau build_tableau(const BasisSystem& basis, std::vector<int> resolution,
                                 QuadRule rule) {
    return build_tableau(std::make_shared<BasisSystem>(basis), std::move(resolution), rule);
}

struct RankReport {
    int rank = 0;
    double condition = 0.0;
    Eigen::VectorXd singular_values;
};

// Numerical rank of the value matrix: sigma_k > tol_rel * sigma_max.
RankReport tableau_rank(const GridTableau& t, double tol_rel = 1e-10);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace rmp
