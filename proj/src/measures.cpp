#include "uotkit/measures.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uotkit {

void validate_measure(std::span<const double> weights) {
    require(!weights.empty(), ErrorCode::empty_measure, "measure has no support points");
    bool any_positive = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        require(std::isfinite(w), ErrorCode::non_finite, "weight " + std::to_string(i) + " is not finite");
        require(w >= 0.0, ErrorCode::invalid_measure, "weight " + std::to_string(i) + " is negative");
        any_positive = any_positive || w > 0.0;
    }
    require(any_positive, ErrorCode::empty_measure, "all weights are zero");
}

DiscreteMeasure::DiscreteMeasure(Vector weights) : weights_(std::move(weights)) {
    validate_measure(std::span<const double>(weights_.data(), static_cast<std::size_t>(weights_.size())));
}

DiscreteMeasure::DiscreteMeasure(std::span<const double> weights)
    : DiscreteMeasure(Vector(Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size())))) {}

DiscreteMeasure DiscreteMeasure::normalized() const { return DiscreteMeasure(Vector(weights_ / total_mass())); }

DiscreteMeasure uniform_measure(std::size_t n) {
    require(n >= 1, ErrorCode::invalid_argument, "uniform measure needs n >= 1");
    return DiscreteMeasure(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

FeatureSet::FeatureSet(Matrix values) : values_(std::move(values)) {
    require(values_.rows() >= 1 && values_.cols() >= 1, ErrorCode::invalid_argument, "feature set is empty");
    require(values_.allFinite(), ErrorCode::non_finite, "feature set has non-finite entries");
}

CostMatrix::CostMatrix(Matrix values) : values_(std::move(values)) {
    require(values_.rows() >= 1 && values_.cols() >= 1, ErrorCode::invalid_argument, "cost matrix is empty");
    require(values_.allFinite(), ErrorCode::non_finite, "cost matrix has non-finite entries");
}

namespace {

Vector row_norms(const FeatureSet& f, const char* name) {
    Vector norms = f.values().rowwise().norm();
    for (Eigen::Index i = 0; i < norms.size(); ++i) {
        require(norms[i] > 0.0, ErrorCode::degenerate_feature,
                std::string(name) + " row " + std::to_string(i) + " has zero norm");
    }
    return norms;
}

} // namespace

CostMatrix neg_cosine_cost(const FeatureSet& x, const FeatureSet& y) {
    require(x.dim() == y.dim(), ErrorCode::invalid_argument,
            "feature dimensions differ: " + std::to_string(x.dim()) + " vs " + std::to_string(y.dim()));
    const Vector nx = row_norms(x, "x");
    const Vector ny = row_norms(y, "y");
    // Normalize first so scaled inputs give bitwise-close results.
    const Matrix ux = nx.cwiseInverse().asDiagonal() * x.values();
    const Matrix uy = ny.cwiseInverse().asDiagonal() * y.values();
    Matrix c = -(ux * uy.transpose());
    c = c.cwiseMax(-1.0).cwiseMin(1.0);
    return CostMatrix(std::move(c));
}

} // namespace uotkit
