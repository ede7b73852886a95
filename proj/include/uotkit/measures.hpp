#pragma once

#include "uotkit/linalg.hpp"

#include <cstddef>
#include <span>

namespace uotkit {

// Checks the measure invariants on raw weights: finite, non-negative, not all zero.
// Throws non_finite, invalid_measure or empty_measure respectively.
void validate_measure(std::span<const double> weights);

/// Non-negative weights over a finite support. Total mass is not forced to one:
/// unbalanced transport is meaningful between measures of different mass.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(Vector weights);
    explicit DiscreteMeasure(std::span<const double> weights);

    const Vector& weights() const noexcept { return weights_; }
    Eigen::Index size() const noexcept { return weights_.size(); }
    double operator[](Eigen::Index i) const { return weights_[i]; }
    double total_mass() const noexcept { return weights_.sum(); }

    // Same support, rescaled to unit total mass.
    DiscreteMeasure normalized() const;

private:
    Vector weights_;
};

DiscreteMeasure uniform_measure(std::size_t n);

/// One feature vector per support point (rows), all entries finite.
/// Zero rows are allowed here; the cosine cost rejects them at use.
class FeatureSet {
public:
    explicit FeatureSet(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index dim() const noexcept { return values_.cols(); }

private:
    Matrix values_;
};

/// Dense n x m transport cost with finite entries.
class CostMatrix {
public:
    explicit CostMatrix(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

private:
    Matrix values_;
};

// C(i, j) = -<x_i, y_j> / (|x_i| |y_j|), clamped into [-1, 1] against rounding.
CostMatrix neg_cosine_cost(const FeatureSet& x, const FeatureSet& y);

} // namespace uotkit
