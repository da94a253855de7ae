#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rmp/errors.hpp"

namespace rmp {

// Axis-aligned compact box K. With normalize set, quadrature weights are
// divided by the box volume so the reference measure has total mass 1.
struct DomainBox {
    int dim = 1;
    std::vector<std::pair<double, double>> bounds;  // one [lo, hi] per axis
    bool normalize = false;

    double volume() const;
    bool contains(const double* x, double tol = 0.0) const;
    void validate() const;  // throws DomainError on degenerate bounds
};

enum class BasisFamily { CosineTensor, Monomial, FractionalPower1d, Tabulated };

std::string family_name(BasisFamily f);

// Signed rational exponent for the 1-d fractional-power family:
// x^(num/den) := sign(x)^num * |x|^(num/den).
struct FracExponent {
    int num = 0;
    int den = 1;
};

// Finite ordered family alpha_1..alpha_n on K. The first function need not
// be constant; ordering follows the index/exponent list given at
// construction. Immutable after construction; safe to share across threads.
class BasisSystem {
  public:
    static BasisSystem cosine(DomainBox box, std::vector<std::vector<int>> indices);
    static BasisSystem monomial(DomainBox box, std::vector<std::vector<int>> powers);
    static BasisSystem fractional(DomainBox box, std::vector<FracExponent> exponents);
    // Values bound to the nodes of a specific midpoint grid (resolution per
    // axis). `sampler`, when provided, extends each function off-grid and
    // enables local refinement; without it refinement-based operations
    // degrade to node resolution.
    static BasisSystem tabulated(DomainBox box, std::vector<int> resolution,
                                 std::vector<std::vector<double>> values,
                                 std::vector<std::function<double(const double*)>> sampler = {});

    int size() const { return n_; }
    int dim() const { return box_.dim; }
    const DomainBox& box() const { return box_; }
    BasisFamily family() const { return family_; }
    bool off_grid_capable() const;

    // evaluate_basis at one point of K. Throws DomainError when x is outside
    // the box or when a tabulated family has no sampler.
    void evaluate(const double* x, double* out) const;
    double evaluate_one(int k, const double* x) const;

    const std::vector<std::vector<int>>& indices() const { return indices_; }
    const std::vector<FracExponent>& exponents() const { return exponents_; }
    const std::vector<int>& tab_resolution() const { return tab_resolution_; }
    const std::vector<std::vector<double>>& tab_values() const { return tab_values_; }

    // Largest per-axis cosine index, used by the Toeplitz cross-check.
    int max_cosine_index(int axis) const;

  private:
    BasisSystem() = default;
    BasisFamily family_ = BasisFamily::Monomial;
    DomainBox box_;
    int n_ = 0;
    std::vector<std::vector<int>> indices_;
    std::vector<FracExponent> exponents_;
    std::vector<int> tab_resolution_;
    std::vector<std::vector<double>> tab_values_;
    std::vector<std::function<double(const double*)>> sampler_;
};

// Coefficient vector (polynomial in the basis) and moment vector share the
// storage type but are kept distinct so signatures say which side of the
// pairing they live on.
struct CoefVector {
    Eigen::VectorXd v;
    CoefVector() = default;
    explicit CoefVector(Eigen::VectorXd values) : v(std::move(values)) {}
    int size() const { return static_cast<int>(v.size()); }
};

struct MomentVector {
    Eigen::VectorXd v;
    MomentVector() = default;
    explicit MomentVector(Eigen::VectorXd values) : v(std::move(values)) {}
    int size() const { return static_cast<int>(v.size()); }
};

inline CoefVector coef(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return CoefVector(v);
}

inline MomentVector moments(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return MomentVector(v);
}

}  // namespace rmp
