#pragma once

// Seeded generators and naive reference implementations shared by the tests.
// Nothing here calls into the code under test.

#include "uotkit/fixtures.hpp"
#include "uotkit/linalg.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

using uotkit::Matrix;
using uotkit::SplitMix64;
using uotkit::Vector;

inline Matrix random_matrix(SplitMix64& rng, Eigen::Index n, Eigen::Index m, double lo, double hi) {
    Matrix a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = rng.uniform(lo, hi);
    return a;
}

inline Vector random_weights(SplitMix64& rng, Eigen::Index n, double lo = 0.1, double hi = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

inline Vector normalized(Vector v) { return v / v.sum(); }

inline double naive_kl(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 0.0) s += a[i] * std::log(a[i] / b[i]);
        s += b[i] - a[i];
    }
    return s;
}

// <C, P> - eps (-sum P log P + sum P) + tau KL(rows||p) + tau KL(cols||q), term by term.
inline double naive_primal(const Matrix& P, const Matrix& C, const Vector& p, const Vector& q, double eps,
                           double tau) {
    double cost = 0.0;
    double ent = 0.0;
    std::vector<double> rows(static_cast<std::size_t>(P.rows()), 0.0);
    std::vector<double> cols(static_cast<std::size_t>(P.cols()), 0.0);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        for (Eigen::Index j = 0; j < P.cols(); ++j) {
            const double x = P(i, j);
            cost += C(i, j) * x;
            if (x > 0.0) ent -= x * std::log(x);
            ent += x;
            rows[static_cast<std::size_t>(i)] += x;
            cols[static_cast<std::size_t>(j)] += x;
        }
    }
    const std::vector<double> pv(p.data(), p.data() + p.size());
    const std::vector<double> qv(q.data(), q.data() + q.size());
    return cost - eps * ent + tau * naive_kl(rows, pv) + tau * naive_kl(cols, qv);
}

inline Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

inline double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sa += a[k];
        sb += b[k];
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - sa / n;
        const double db = b[k] - sb / n;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    return sab / std::sqrt(saa * sbb);
}

inline double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("uotkit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace testsupport
