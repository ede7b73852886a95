#pragma once

#include "uotkit/linalg.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/uot_solver.hpp"

#include <string_view>

namespace uotkit {

// Brute-force reference solvers for small instances. They share no code with
// `solve` and exist to cross-check it.

enum class OracleMethod { lp_enumeration, grid_search, projected_descent };

std::string_view to_string(OracleMethod method) noexcept;

struct OracleResult {
    double objective = 0.0;
    Matrix plan;
    OracleMethod method = OracleMethod::lp_enumeration;
};

inline constexpr Eigen::Index lp_max_side = 8;
inline constexpr Eigen::Index grid_max_entries = 9;
inline constexpr Eigen::Index descent_max_entries = 36;

enum class LpStrategy {
    automatic,
    // Visit every spanning tree of the bipartite support graph and keep the
    // cheapest feasible basic solution.
    exhaustive,
    // Walk adjacent vertices of the transport polytope from the north-west
    // corner basis, entering cells by Bland's rule, until no reduced cost is negative.
    tree_pivoting,
};

// Exact minimum of <C, plan> over couplings with marginals p and q.
// Masses must agree within 1e-12 and both sides must be at most 8 points.
OracleResult lp_balanced(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                         LpStrategy strategy = LpStrategy::automatic);

struct SearchOptions {
    // Refinement stages; each stage deepens the 1-D grid zoom and warm starts
    // from the previous one, so more levels never give a worse objective.
    int levels = 4;
    int max_sweeps_per_level = 20000;
};

// Direct minimization of the unbalanced primal (the objective evaluated by
// `primal_objective`). Up to 9 plan entries use coordinate grid search; up to
// 36 use multiplicative descent. Epsilon may be zero.
OracleResult uot_dense_search(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                              const SolverConfig& cfg, const SearchOptions& opts = {});

} // namespace uotkit
