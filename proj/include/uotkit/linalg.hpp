#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace uotkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x))) over a strided range; returns -inf for an empty or all -inf range.
template <typename Expr>
double log_sum_exp(const Expr& x) {
    const double c = x.size() == 0 ? neg_inf : x.maxCoeff();
    if (!std::isfinite(c)) return c;
    double s = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) s += std::exp(x[k] - c);
    return c + std::log(s);
}

// x log x with the convention 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

} // namespace uotkit
