#include "rmp/domain.hpp"

#include <cmath>
#include <cstddef>

namespace rmp {

double DomainBox::volume() const {
    double v = 1.0;
    for (const auto& [lo, hi] : bounds) v *= (hi - lo);
    return v;
}

bool DomainBox::contains(const double* x, double tol) const {
    for (int a = 0; a < dim; ++a)
        if (x[a] < bounds[a].first - tol || x[a] > bounds[a].second + tol) return false;
    return true;
}

void DomainBox::validate() const {
    if (dim < 1) throw DomainError("domain dimension must be >= 1");
    if (static_cast<int>(bounds.size()) != dim)
        throw DomainError("domain bounds count does not match dimension");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw DomainError("domain bounds must be finite with lo < hi");
}

std::string family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::CosineTensor: return "cosine";
        case BasisFamily::Monomial: return "monomial";
        case BasisFamily::FractionalPower1d: return "fractional";
        case BasisFamily::Tabulated: return "tabulated";
    }
    return "?";
}

namespace {

// Real cube-root style power: sign(x)^num * |x|^(num/den).
double signed_pow(double x, const FracExponent& e) {
    if (e.num == 0) return 1.0;
    const double mag = std::pow(std::fabs(x), static_cast<double>(e.num) / e.den);
    return (x < 0.0 && e.num % 2 != 0) ? -mag : mag;
}

}  // namespace

BasisSystem BasisSystem::cosine(DomainBox box, std::vector<std::vector<int>> indices) {
    box.validate();
    BasisSystem b;
    b.family_ = BasisFamily::CosineTensor;
    b.box_ = std::move(box);
    if (indices.empty()) throw DomainError("cosine basis needs at least one multi-index");
    for (const auto& k : indices) {
        if (static_cast<int>(k.size()) != b.box_.dim)
            throw DomainError("cosine multi-index arity does not match dimension");
        for (int ki : k)
            if (ki < 0) throw DomainError("cosine multi-index entries must be >= 0");
    }
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t l = i + 1; l < indices.size(); ++l)
            if (indices[i] == indices[l])
                throw DomainError("duplicate cosine multi-index makes the family dependent");
    b.indices_ = std::move(indices);
    b.n_ = static_cast<int>(b.indices_.size());
    return b;
}

BasisSystem BasisSystem::monomial(DomainBox box, std::vector<std::vector<int>> powers) {
    box.validate();
    BasisSystem b;
    b.family_ = BasisFamily::Monomial;
    b.box_ = std::move(box);
    if (powers.empty()) throw DomainError("monomial basis needs at least one multi-index");
    for (const auto& k : powers) {
        if (static_cast<int>(k.size()) != b.box_.dim)
            throw DomainError("monomial multi-index arity does not match dimension");
        for (int ki : k)
            if (ki < 0) throw DomainError("monomial powers must be >= 0");
    }
    for (std::size_t i = 0; i < powers.size(); ++i)
        for (std::size_t l = i + 1; l < powers.size(); ++l)
            if (powers[i] == powers[l])
                throw DomainError("duplicate monomial multi-index makes the family dependent");
    b.indices_ = std::move(powers);
    b.n_ = static_cast<int>(b.indices_.size());
    return b;
}

BasisSystem BasisSystem::fractional(DomainBox box, std::vector<FracExponent> exponents) {
    box.validate();
    if (box.dim != 1) throw DomainError("fractional-power family is 1-d only");
    BasisSystem b;
    b.family_ = BasisFamily::FractionalPower1d;
    b.box_ = std::move(box);
    if (exponents.empty()) throw DomainError("fractional basis needs at least one exponent");
    for (const auto& e : exponents)
        if (e.den <= 0 || e.num < 0) throw DomainError("fractional exponents must be >= 0 with den > 0");
    for (std::size_t i = 0; i < exponents.size(); ++i)
        for (std::size_t l = i + 1; l < exponents.size(); ++l)
            if (exponents[i].num * exponents[l].den == exponents[l].num * exponents[i].den)
                throw DomainError("duplicate fractional exponent makes the family dependent");
    b.exponents_ = std::move(exponents);
    b.n_ = static_cast<int>(b.exponents_.size());
    return b;
}

BasisSystem BasisSystem::tabulated(DomainBox box, std::vector<int> resolution,
                                   std::vector<std::vector<double>> values,
                                   std::vector<std::function<double(const double*)>> sampler) {
    box.validate();
    if (static_cast<int>(resolution.size()) != box.dim)
        throw DomainError("tabulated resolution arity does not match dimension");
    std::size_t count = 1;
    for (int r : resolution) {
        if (r < 1) throw DomainError("tabulated resolution must be >= 1 per axis");
        count *= static_cast<std::size_t>(r);
    }
    if (values.empty()) throw DomainError("tabulated basis needs at least one function");
    for (const auto& col : values)
        if (col.size() != count)
            throw DomainError("tabulated value column length does not match the grid");
    if (!sampler.empty() && sampler.size() != values.size())
        throw DomainError("tabulated sampler count does not match value columns");
    BasisSystem b;
    b.family_ = BasisFamily::Tabulated;
    b.box_ = std::move(box);
    b.tab_resolution_ = std::move(resolution);
    b.tab_values_ = std::move(values);
    b.sampler_ = std::move(sampler);
    b.n_ = static_cast<int>(b.tab_values_.size());
    return b;
}

bool BasisSystem::off_grid_capable() const {
    return family_ != BasisFamily::Tabulated || !sampler_.empty();
}

double BasisSystem::evaluate_one(int k, const double* x) const {
    switch (family_) {
        case BasisFamily::CosineTensor: {
            double angle = 0.0;
            for (int a = 0; a < box_.dim; ++a) angle += indices_[k][a] * x[a];
            return std::cos(angle);
        }
        case BasisFamily::Monomial: {
            double v = 1.0;
            for (int a = 0; a < box_.dim; ++a) {
                double p = 1.0;
                for (int i = 0; i < indices_[k][a]; ++i) p *= x[a];
                v *= p;
            }
            return v;
        }
        case BasisFamily::FractionalPower1d:
            return signed_pow(x[0], exponents_[k]);
        case BasisFamily::Tabulated:
            if (sampler_.empty())
                throw DomainError("tabulated basis has no off-grid sampler");
            return sampler_[k](x);
    }
    return 0.0;
}

void BasisSystem::evaluate(const double* x, double* out) const {
    if (!box_.contains(x, 1e-12))
        throw DomainError("evaluation point lies outside the domain box");
    for (int k = 0; k < n_; ++k) out[k] = evaluate_one(k, x);
}

int BasisSystem::max_cosine_index(int axis) const {
    int m = 0;
    for (const auto& k : indices_) m = std::max(m, k[axis]);
    return m;
}

}  // namespace rmp
