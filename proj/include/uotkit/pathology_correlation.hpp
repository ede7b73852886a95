#pragma once

#include "uotkit/linalg.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/stain_optics.hpp"

#include <span>
#include <vector>

namespace uotkit {

using OdVector = std::vector<double>;

// Row-major flatten of a single-channel map with negatives rectified to zero.
OdVector od_vectorize(const OdMap& fod);

// Cosine of a and b; zero if either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Pairwise cosine similarities inside a batch. A zero vector has similarity 0
/// with everything, itself included, so its diagonal entry is 0 rather than 1.
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(Matrix values) : values_(std::move(values)) {}
    const Matrix& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.rows(); }

private:
    Matrix values_;
};

CorrelationMatrix correlation_matrix(std::span<const OdVector> batch);

// Correlation over the rows of a feature matrix (one sample per row).
CorrelationMatrix correlation_matrix(const Matrix& rows);

struct OdcTerms {
    double correlation = 0.0; // |M_real - M_fake|_F
    double mass = 0.0;        // (sum O_real - sum O_fake)^2 / N^2
    CorrelationMatrix real{Matrix()};
    CorrelationMatrix fake{Matrix()};
    double total() const noexcept { return correlation + mass; }
};

// Optical-density correlation loss over a batch of DAB OD maps. Both batches
// are mapped through focal_od first. The mass term compares FOD totals summed
// over the whole batch, so it equals the squared difference of the mean
// per-image FOD mass.
OdcTerms odc_terms(std::span<const OdMap> real_batch, std::span<const OdMap> fake_batch, const FodConfig& cfg = {});
double odc_loss(std::span<const OdMap> real_batch, std::span<const OdMap> fake_batch, const FodConfig& cfg = {});

// Multi-level feature correlation loss: at every level, rows are the batch
// samples; the Frobenius norms of the correlation differences are summed over
// levels (not averaged).
double cc_loss(std::span<const FeatureSet> real_levels, std::span<const FeatureSet> fake_levels);

} // namespace uotkit
