#pragma once

#include "uotkit/linalg.hpp"
#include "uotkit/measures.hpp"

#include <optional>
#include <utility>

namespace uotkit {

inline constexpr double default_epsilon = 0.01;
inline constexpr double default_tau = 0.001;
inline constexpr double default_tol = 1e-9;
inline constexpr int default_max_iter = 5000;

/// Entropic transport settings.
///
/// `tau` is the weight of the KL marginal penalties; an empty `tau` selects
/// balanced transport (hard marginal constraints, the tau -> infinity limit).
struct SolverConfig {
    double epsilon = default_epsilon;
    std::optional<double> tau = default_tau;
    int max_iter = default_max_iter;
    double tol = default_tol;
    // Solve a geometric ladder of epsilons from 1.0 down to `epsilon`, warm
    // starting every stage from the previous duals.
    bool anneal = false;
    int anneal_stages = 10;

    bool balanced() const noexcept { return !tau.has_value(); }

    static SolverConfig make_balanced(double epsilon = default_epsilon) {
        SolverConfig cfg;
        cfg.epsilon = epsilon;
        cfg.tau.reset();
        return cfg;
    }
    static SolverConfig make_unbalanced(double epsilon, double tau) {
        SolverConfig cfg;
        cfg.epsilon = epsilon;
        cfg.tau = tau;
        return cfg;
    }

    // Throws invalid_argument. `allow_zero_epsilon` admits the unregularized
    // objective, which only evaluation (not solving) supports.
    void validate(bool allow_zero_epsilon = false) const;
};

/// Coupling returned by `solve`. The plan is always rebuilt from the duals:
/// plan(i, j) = p_i q_j exp((u_i + v_j - C_ij) / epsilon).
struct TransportPlan {
    Matrix plan;
    Vector u;
    Vector v;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
};

TransportPlan solve(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                    const SolverConfig& cfg = {});

// Plan implied by dual potentials at a given epsilon.
Matrix plan_from_duals(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const Vector& u, const Vector& v, double epsilon);

// One dual half-step: the u that is optimal for fixed v (and symmetrically for v).
Vector update_u(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q, const Vector& v,
                const SolverConfig& cfg);
Vector update_v(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q, const Vector& u,
                const SolverConfig& cfg);

// Generalized KL between non-negative vectors: sum a log(a / b) - a + b.
// Returns +inf when some a_i > 0 meets b_i = 0.
double generalized_kl(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// (KL(plan row sums || p), KL(plan column sums || q)).
std::pair<double, double> marginal_divergences(const Matrix& plan, const DiscreteMeasure& p,
                                               const DiscreteMeasure& q);

struct ObjectiveReport {
    double value = 0.0;
    double transport_cost = 0.0;
    double entropy = 0.0;
    double kl_rows = 0.0;
    double kl_cols = 0.0;
    // Largest |row_sum - p| or |col_sum - q|. Only meaningful for balanced configs.
    double marginal_violation = 0.0;
    bool feasible = true;
};

// <C, plan> - epsilon H(plan) + tau KL(rows || p) + tau KL(cols || q), where
// H(plan) = -sum plan log plan + sum plan. Balanced configs drop the KL terms and
// flag plans whose marginals miss p, q by more than 10 * tol.
ObjectiveReport evaluate_primal(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& p,
                                const DiscreteMeasure& q, const SolverConfig& cfg);

double primal_objective(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& p,
                        const DiscreteMeasure& q, const SolverConfig& cfg);

inline double primal_objective(const TransportPlan& plan, const CostMatrix& cost, const DiscreteMeasure& p,
                               const DiscreteMeasure& q, const SolverConfig& cfg) {
    return primal_objective(plan.plan, cost, p, q, cfg);
}

} // namespace uotkit
