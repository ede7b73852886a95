#pragma once

#include "uotkit/linalg.hpp"
#include "uotkit/stain_optics.hpp"

#include <span>
#include <vector>

namespace uotkit {

inline constexpr double iod_scale = 1e-7;

/// Fitted Gaussian of a feature set: mean, unbiased (1 / (n - 1)) covariance.
struct GaussianStats {
    Vector mean;
    Matrix cov;
    Eigen::Index n_samples = 0;
};

// Rows are samples. Needs at least two rows.
GaussianStats gaussian_stats(const Matrix& features);

// |sum(virtual) - sum(reference)| * 1e-7.
double iod(std::span<const double> virtual_densities, std::span<const double> reference_densities);

// Pearson correlation of paired samples; throws undefined_correlation when
// either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

// Pixelwise correlation of two grayscale images of the same size.
double pearson_pixels(std::span<const double> img_a, std::span<const double> img_b);

// Correlation across images of real vs generated integrated densities.
double pearson_densities(std::span<const double> d, std::span<const double> o);

// Content correlation over a set of image pairs: the mean of per-pair
// correlations, or a single correlation over all pixels when `pooled`.
double content_correlation(std::span<const std::vector<double>> a, std::span<const std::vector<double>> b,
                           bool pooled = false);

double r_avg(double rc, double rp);

// Integrated density of one image: total DAB optical density over its pixels.
double integrated_density(const RgbImage& img, const StainMatrix& stains = StainMatrix::h_dab(),
                          const ReferenceIntensity& i0 = default_i0);

// Symmetric PSD square root of the PSD-symmetrized input via eigendecomposition.
// Eigenvalues in [-1e-10 * scale, 0) are treated as zero; anything more negative
// throws numerical_failure.
Matrix psd_sqrt(const Matrix& m);

// |mu_r - mu_g|^2 + Tr(C_r + C_g - 2 sqrt(C_r^1/2 C_g C_r^1/2)).
// The mean term is squared (standard Frechet distance).
double fid(const GaussianStats& real, const GaussianStats& gen);
double fid(const Matrix& real_features, const Matrix& gen_features);

} // namespace uotkit
