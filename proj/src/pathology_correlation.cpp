#include "uotkit/pathology_correlation.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uotkit {

OdVector od_vectorize(const OdMap& fod) {
    require(fod.channels == 1, ErrorCode::invalid_argument, "vectorize expects a single-channel map");
    OdVector v(fod.values.size());
    std::transform(fod.values.begin(), fod.values.end(), v.begin(), [](double x) { return std::max(x, 0.0); });
    return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::invalid_argument, "cosine operands differ in length");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

CorrelationMatrix from_rows(const Matrix& rows) {
    const Eigen::Index n = rows.rows();
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd ri = rows.row(i);
        for (Eigen::Index j = i; j < n; ++j) {
            const Eigen::RowVectorXd rj = rows.row(j);
            const double c = cosine_similarity(std::span<const double>(ri.data(), static_cast<std::size_t>(ri.size())),
                                               std::span<const double>(rj.data(), static_cast<std::size_t>(rj.size())));
            m(i, j) = c;
            m(j, i) = c;
        }
    }
    return CorrelationMatrix(std::move(m));
}

double frobenius_gap(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    return (a.values() - b.values()).norm();
}

} // namespace

CorrelationMatrix correlation_matrix(std::span<const OdVector> batch) {
    require(!batch.empty(), ErrorCode::invalid_argument, "correlation batch is empty");
    const std::size_t len = batch.front().size();
    Matrix rows(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        require(batch[i].size() == len, ErrorCode::invalid_argument,
                "batch vector " + std::to_string(i) + " has length " + std::to_string(batch[i].size()) +
                    ", expected " + std::to_string(len));
        for (std::size_t k = 0; k < len; ++k) rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = batch[i][k];
    }
    require(rows.allFinite(), ErrorCode::non_finite, "batch vectors contain non-finite values");
    return from_rows(rows);
}

CorrelationMatrix correlation_matrix(const Matrix& rows) {
    require(rows.rows() >= 1, ErrorCode::invalid_argument, "correlation batch is empty");
    require(rows.allFinite(), ErrorCode::non_finite, "feature rows contain non-finite values");
    return from_rows(rows);
}

OdcTerms odc_terms(std::span<const OdMap> real_batch, std::span<const OdMap> fake_batch, const FodConfig& cfg) {
    cfg.validate();
    require(!real_batch.empty(), ErrorCode::invalid_argument, "odc needs at least one image");
    require(real_batch.size() == fake_batch.size(), ErrorCode::invalid_argument,
            "real and fake batches differ in size: " + std::to_string(real_batch.size()) + " vs " +
                std::to_string(fake_batch.size()));
    const std::size_t w = real_batch.front().width;
    const std::size_t h = real_batch.front().height;

    auto to_vectors = [&](std::span<const OdMap> batch, double& total) {
        std::vector<OdVector> out;
        out.reserve(batch.size());
        for (const OdMap& m : batch) {
            require(m.width == w && m.height == h && m.channels == 1, ErrorCode::invalid_argument,
                    "all OD maps in an odc batch must share one single-channel shape");
            OdVector v = od_vectorize(focal_od(m, cfg));
            for (double x : v) total += x;
            out.push_back(std::move(v));
        }
        return out;
    };
    double real_total = 0.0;
    double fake_total = 0.0;
    const auto real_vecs = to_vectors(real_batch, real_total);
    const auto fake_vecs = to_vectors(fake_batch, fake_total);

    OdcTerms t;
    t.real = correlation_matrix(real_vecs);
    t.fake = correlation_matrix(fake_vecs);
    t.correlation = frobenius_gap(t.real, t.fake);
    const double n = static_cast<double>(real_batch.size());
    const double gap = real_total - fake_total;
    t.mass = gap * gap / (n * n);
    return t;
}

double odc_loss(std::span<const OdMap> real_batch, std::span<const OdMap> fake_batch, const FodConfig& cfg) {
    return odc_terms(real_batch, fake_batch, cfg).total();
}

double cc_loss(std::span<const FeatureSet> real_levels, std::span<const FeatureSet> fake_levels) {
    require(real_levels.size() == fake_levels.size(), ErrorCode::invalid_argument,
            "real and fake features have different level counts");
    double loss = 0.0;
    for (std::size_t l = 0; l < real_levels.size(); ++l) {
        const Matrix& r = real_levels[l].values();
        const Matrix& f = fake_levels[l].values();
        require(r.rows() == f.rows(), ErrorCode::invalid_argument,
                "level " + std::to_string(l) + " batch sizes differ");
        loss += frobenius_gap(correlation_matrix(r), correlation_matrix(f));
    }
    return loss;
}

} // namespace uotkit
