#include "uotkit/transport_cycle.hpp"

#include "uotkit/error.hpp"

#include <string>

namespace uotkit {

namespace {

void check_plan(const Matrix& m, const char* name) {
    require(m.rows() >= 1 && m.cols() >= 1, ErrorCode::invalid_argument, std::string(name) + " is empty");
    require(m.allFinite(), ErrorCode::non_finite, std::string(name) + " has non-finite entries");
    require((m.array() >= 0.0).all(), ErrorCode::invalid_argument, std::string(name) + " has negative entries");
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

} // namespace

void PlanTriple::validate() const {
    check_plan(t_hi, "t_hi");
    check_plan(t_ii, "t_ii");
    check_plan(t_direct, "t_direct");
    require(t_hi.cols() == t_ii.rows(), ErrorCode::invalid_argument,
            "inner dimensions differ: " + shape(t_hi) + " * " + shape(t_ii));
    require(t_direct.rows() == t_hi.rows() && t_direct.cols() == t_ii.cols(), ErrorCode::invalid_argument,
            "direct plan is " + shape(t_direct) + ", composition is " + std::to_string(t_hi.rows()) + "x" +
                std::to_string(t_ii.cols()));
}

Matrix compose(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), ErrorCode::invalid_argument, "cannot compose " + shape(a) + " with " + shape(b));
    check_plan(a, "a");
    check_plan(b, "b");
    return a * b;
}

double tcyc_residual(const PlanTriple& t) {
    t.validate();
    const Matrix indirect = t.t_hi * t.t_ii;
    const double cells = static_cast<double>(indirect.rows() * indirect.cols());
    return (indirect - t.t_direct).cwiseAbs().sum() / cells;
}

} // namespace uotkit
