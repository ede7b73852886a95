#include "uotkit/metrics.hpp"

#include "uotkit/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace uotkit {

GaussianStats gaussian_stats(const Matrix& features) {
    require(features.rows() >= 2, ErrorCode::invalid_argument, "Gaussian fit needs at least two samples");
    require(features.cols() >= 1, ErrorCode::invalid_argument, "features have zero dimension");
    require(features.allFinite(), ErrorCode::non_finite, "features contain non-finite values");
    GaussianStats s;
    s.n_samples = features.rows();
    s.mean = features.colwise().mean().transpose();
    const Matrix centered = features.rowwise() - s.mean.transpose();
    s.cov = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);
    s.cov = 0.5 * (s.cov + s.cov.transpose());
    return s;
}

double iod(std::span<const double> virtual_densities, std::span<const double> reference_densities) {
    require(virtual_densities.size() == reference_densities.size(), ErrorCode::invalid_argument,
            "density series differ in length");
    double sv = 0.0;
    double sr = 0.0;
    for (double v : virtual_densities) sv += v;
    for (double r : reference_densities) sr += r;
    require(std::isfinite(sv) && std::isfinite(sr), ErrorCode::non_finite, "density series are not finite");
    return std::abs(sv - sr) * iod_scale;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::invalid_argument, "correlation operands differ in length");
    require(a.size() >= 2, ErrorCode::invalid_argument, "correlation needs at least two samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - ma;
        const double db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    require(std::isfinite(sab) && std::isfinite(saa) && std::isfinite(sbb), ErrorCode::non_finite,
            "correlation inputs are not finite");
    require(saa > 0.0 && sbb > 0.0, ErrorCode::undefined_correlation, "correlation of a constant series");
    return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

double pearson_pixels(std::span<const double> img_a, std::span<const double> img_b) {
    require(img_a.size() == img_b.size(), ErrorCode::invalid_argument, "images differ in size");
    return pearson(img_a, img_b);
}

double pearson_densities(std::span<const double> d, std::span<const double> o) { return pearson(d, o); }

double content_correlation(std::span<const std::vector<double>> a, std::span<const std::vector<double>> b,
                           bool pooled) {
    require(a.size() == b.size() && !a.empty(), ErrorCode::invalid_argument, "image sets must be non-empty and paired");
    if (pooled) {
        std::vector<double> pa;
        std::vector<double> pb;
        for (std::size_t i = 0; i < a.size(); ++i) {
            require(a[i].size() == b[i].size(), ErrorCode::invalid_argument, "paired images differ in size");
            pa.insert(pa.end(), a[i].begin(), a[i].end());
            pb.insert(pb.end(), b[i].begin(), b[i].end());
        }
        return pearson(pa, pb);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += pearson_pixels(a[i], b[i]);
    return s / static_cast<double>(a.size());
}

double r_avg(double rc, double rp) {
    require(rc >= -1.0 && rc <= 1.0 && rp >= -1.0 && rp <= 1.0, ErrorCode::invalid_argument,
            "correlations must lie in [-1, 1]");
    return 0.5 * (rc + rp);
}

double integrated_density(const RgbImage& img, const StainMatrix& stains, const ReferenceIntensity& i0) {
    return dab_channel(img, stains, i0).sum();
}

Matrix psd_sqrt(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::invalid_argument, "square root needs a square matrix");
    require(m.allFinite(), ErrorCode::non_finite, "matrix has non-finite entries");
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "eigendecomposition failed");
    Vector lambda = es.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        require(lambda[k] >= -1e-10 * scale, ErrorCode::numerical_failure,
                "matrix is not positive semidefinite (eigenvalue " + std::to_string(lambda[k]) + ")");
        lambda[k] = std::sqrt(std::max(lambda[k], 0.0));
    }
    return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

double fid(const GaussianStats& real, const GaussianStats& gen) {
    require(real.mean.size() == gen.mean.size(), ErrorCode::invalid_argument,
            "feature dimensions differ: " + std::to_string(real.mean.size()) + " vs " +
                std::to_string(gen.mean.size()));
    const Matrix root_r = psd_sqrt(real.cov);
    const Matrix cross = psd_sqrt(root_r * gen.cov * root_r);
    const double mean_term = (real.mean - gen.mean).squaredNorm();
    const double trace_term = real.cov.trace() + gen.cov.trace() - 2.0 * cross.trace();
    const double d = mean_term + trace_term;
    require(d >= -1e-6, ErrorCode::numerical_failure, "Frechet distance came out negative: " + std::to_string(d));
    return std::max(d, 0.0);
}

double fid(const Matrix& real_features, const Matrix& gen_features) {
    require(real_features.cols() == gen_features.cols(), ErrorCode::invalid_argument,
            "feature dimensions differ: " + std::to_string(real_features.cols()) + " vs " +
                std::to_string(gen_features.cols()));
    return fid(gaussian_stats(real_features), gaussian_stats(gen_features));
}

} // namespace uotkit
