#pragma once

#include "uotkit/linalg.hpp"

namespace uotkit {

// Plans around the H&E -> weakly paired IHC -> generated IHC chain.
struct PlanTriple {
    Matrix t_hi;     // n x k, H&E to weakly paired IHC
    Matrix t_ii;     // k x m, weakly paired IHC to generated IHC
    Matrix t_direct; // n x m, H&E to generated IHC

    // Throws invalid_argument on shape mismatch or negative entries, non_finite on NaN/Inf.
    void validate() const;
};

// Indirect plan (a * b): mass routed through the intermediate support.
Matrix compose(const Matrix& a, const Matrix& b);

// Mean absolute deviation between the composed and the direct plan,
// (1 / (n m)) sum |(t_hi t_ii) - t_direct|. Plans are compared as given; callers
// wanting mass-normalized plans normalize before calling.
double tcyc_residual(const PlanTriple& t);

} // namespace uotkit
