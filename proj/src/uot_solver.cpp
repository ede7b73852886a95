#include "uotkit/uot_solver.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <string>

namespace uotkit {

void SolverConfig::validate(bool allow_zero_epsilon) const {
    const bool eps_ok = allow_zero_epsilon ? epsilon >= 0.0 : epsilon > 0.0;
    require(std::isfinite(epsilon) && eps_ok, ErrorCode::invalid_argument,
            "epsilon must be positive, got " + std::to_string(epsilon));
    require(std::isfinite(tol) && tol > 0.0, ErrorCode::invalid_argument, "tol must be positive");
    require(max_iter >= 1, ErrorCode::invalid_argument, "max_iter must be >= 1");
    require(anneal_stages >= 1, ErrorCode::invalid_argument, "anneal_stages must be >= 1");
    if (tau) {
        require(std::isfinite(*tau) && *tau > 0.0, ErrorCode::invalid_argument,
                "tau must be positive in unbalanced mode, got " + std::to_string(*tau));
    }
}

namespace {

void check_shapes(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q) {
    require(cost.rows() == p.size() && cost.cols() == q.size(), ErrorCode::invalid_argument,
            "cost is " + std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()) + " but measures have sizes " +
                std::to_string(p.size()) + " and " + std::to_string(q.size()));
}

Vector log_weights(const DiscreteMeasure& m) {
    Vector out(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) out[i] = m[i] > 0.0 ? std::log(m[i]) : neg_inf;
    return out;
}

// Shared soft-min half step. With `rows` the reduction runs over columns of C
// (updating u from v); otherwise over rows (updating v from u).
Vector half_step(const Matrix& c, const Vector& log_self, const Vector& log_other, const Vector& other_dual,
                 const SolverConfig& cfg, bool rows) {
    const double eps = cfg.epsilon;
    const Eigen::Index n = log_self.size();
    const Eigen::Index m = log_other.size();
    Vector out = Vector::Zero(n);
    Vector terms(m);
    // balanced: u = -eps L;  unbalanced: u = -(eps tau L + eps^2 log p) / (eps + tau)
    const double damp = cfg.tau ? *cfg.tau / (*cfg.tau + eps) : 1.0;
    const double self_weight = cfg.tau ? eps * eps / (*cfg.tau + eps) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(log_self[i])) continue; // zero-weight point carries no mass
        for (Eigen::Index j = 0; j < m; ++j) {
            const double cij = rows ? c(i, j) : c(j, i);
            terms[j] = log_other[j] + (other_dual[j] - cij) / eps;
        }
        const double lse = log_sum_exp(terms);
        out[i] = -damp * eps * lse - self_weight * log_self[i];
    }
    return out;
}

// Exact dual ascent along (u + a, v - a) and then (u + b, v + b), in closed
// form. Plain half steps shrink these two components only by about
// tau / (tau + eps) per sweep, which stalls when eps << tau.
std::pair<double, double> translation_steps(const Matrix& c, const Vector& lp, const Vector& lq, const Vector& u,
                                            const Vector& v, double eps, double tau) {
    std::vector<double> row_terms;
    std::vector<double> col_terms;
    std::vector<double> mass_terms;
    for (Eigen::Index i = 0; i < lp.size(); ++i) {
        if (!std::isfinite(lp[i])) continue;
        row_terms.push_back((1.0 - eps / tau) * lp[i] - u[i] / tau);
        for (Eigen::Index j = 0; j < lq.size(); ++j) {
            if (std::isfinite(lq[j])) mass_terms.push_back(lp[i] + lq[j] + (u[i] + v[j] - c(i, j)) / eps);
        }
    }
    for (Eigen::Index j = 0; j < lq.size(); ++j) {
        if (std::isfinite(lq[j])) col_terms.push_back((1.0 - eps / tau) * lq[j] - v[j] / tau);
    }
    if (row_terms.empty() || col_terms.empty()) return {0.0, 0.0};
    const auto lse = [](const std::vector<double>& t) {
        return log_sum_exp(Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size())));
    };
    const double log_a = lse(row_terms);
    const double log_b = lse(col_terms);
    const double log_mass = lse(mass_terms);
    const double anti = 0.5 * tau * (log_a - log_b);
    const double sym = (0.5 * (log_a + log_b) - log_mass) / (1.0 / tau + 2.0 / eps);
    if (!std::isfinite(anti) || !std::isfinite(sym)) return {0.0, 0.0};
    return {anti, sym};
}

struct StageResult {
    int iterations = 0;
    bool converged = false;
};

StageResult run_stage(const CostMatrix& cost, const Vector& lp, const Vector& lq, Vector& u, Vector& v,
                      const SolverConfig& cfg) {
    const Matrix& c = cost.values();
    // Dual steps are measured in units of epsilon so that a converged balanced
    // plan also meets its marginals to about tol.
    const double threshold = cfg.tol * std::min(1.0, cfg.epsilon);
    StageResult res;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        Vector u_next = half_step(c, lp, lq, v, cfg, true);
        Vector v_next = half_step(c, lq, lp, u_next, cfg, false);
        if (cfg.tau) {
            const auto [anti, sym] = translation_steps(c, lp, lq, u_next, v_next, cfg.epsilon, *cfg.tau);
            u_next.array() += anti + sym;
            v_next.array() += sym - anti;
        }
        require(u_next.allFinite() && v_next.allFinite(), ErrorCode::numerical_failure,
                "dual potentials diverged at iteration " + std::to_string(it));
        const double du = (u_next - u).lpNorm<Eigen::Infinity>();
        const double dv = (v_next - v).lpNorm<Eigen::Infinity>();
        u = std::move(u_next);
        v = std::move(v_next);
        res.iterations = it;
        if (du < threshold && dv < threshold) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace

Vector update_u(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q, const Vector& v,
                const SolverConfig& cfg) {
    check_shapes(cost, p, q);
    return half_step(cost.values(), log_weights(p), log_weights(q), v, cfg, true);
}

Vector update_v(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q, const Vector& u,
                const SolverConfig& cfg) {
    check_shapes(cost, p, q);
    return half_step(cost.values(), log_weights(q), log_weights(p), u, cfg, false);
}

Matrix plan_from_duals(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const Vector& u, const Vector& v, double epsilon) {
    check_shapes(cost, p, q);
    const Vector lp = log_weights(p);
    const Vector lq = log_weights(q);
    Matrix plan(cost.rows(), cost.cols());
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        for (Eigen::Index j = 0; j < plan.cols(); ++j) {
            plan(i, j) = std::exp(lp[i] + lq[j] + (u[i] + v[j] - cost(i, j)) / epsilon);
        }
    }
    return plan;
}

TransportPlan solve(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                    const SolverConfig& cfg) {
    cfg.validate();
    check_shapes(cost, p, q);
    const Vector lp = log_weights(p);
    const Vector lq = log_weights(q);

    TransportPlan out;
    out.u = Vector::Zero(p.size());
    out.v = Vector::Zero(q.size());

    std::vector<double> ladder;
    if (cfg.anneal && cfg.epsilon < 1.0 && cfg.anneal_stages > 1) {
        const double log_target = std::log(cfg.epsilon);
        for (int k = 0; k < cfg.anneal_stages - 1; ++k) {
            ladder.push_back(std::exp(log_target * k / (cfg.anneal_stages - 1)));
        }
    }
    ladder.push_back(cfg.epsilon);

    StageResult last;
    for (const double eps : ladder) {
        SolverConfig stage = cfg;
        stage.epsilon = eps;
        last = run_stage(cost, lp, lq, out.u, out.v, stage);
        out.iterations += last.iterations;
    }
    out.converged = last.converged;
    out.plan = plan_from_duals(cost, p, q, out.u, out.v, cfg.epsilon);
    require(out.plan.allFinite(), ErrorCode::numerical_failure, "transport plan overflowed");
    out.objective = evaluate_primal(out.plan, cost, p, q, cfg).value;
    return out;
}

double generalized_kl(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    require(a.size() == b.size(), ErrorCode::invalid_argument, "KL operands differ in length");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        require(a[i] >= 0.0 && b[i] >= 0.0, ErrorCode::invalid_argument, "KL operands must be non-negative");
        if (a[i] > 0.0) {
            if (b[i] == 0.0) return std::numeric_limits<double>::infinity();
            kl += a[i] * std::log(a[i] / b[i]);
        }
        kl += b[i] - a[i];
    }
    return kl;
}

std::pair<double, double> marginal_divergences(const Matrix& plan, const DiscreteMeasure& p,
                                               const DiscreteMeasure& q) {
    require(plan.rows() == p.size() && plan.cols() == q.size(), ErrorCode::invalid_argument,
            "plan shape does not match the measures");
    require(plan.allFinite(), ErrorCode::non_finite, "plan has non-finite entries");
    require((plan.array() >= 0.0).all(), ErrorCode::invalid_argument, "plan has negative entries");
    const Vector rows = plan.rowwise().sum();
    const Vector cols = plan.colwise().sum().transpose();
    return {generalized_kl(rows, p.weights()), generalized_kl(cols, q.weights())};
}

ObjectiveReport evaluate_primal(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& p,
                                const DiscreteMeasure& q, const SolverConfig& cfg) {
    cfg.validate(true);
    check_shapes(cost, p, q);
    require(plan.rows() == cost.rows() && plan.cols() == cost.cols(), ErrorCode::invalid_argument,
            "plan shape does not match the cost");
    require(plan.allFinite(), ErrorCode::non_finite, "plan has non-finite entries");
    require((plan.array() >= 0.0).all(), ErrorCode::invalid_argument, "plan has negative entries");

    ObjectiveReport r;
    double neg_entropy = 0.0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        for (Eigen::Index j = 0; j < plan.cols(); ++j) {
            const double x = plan(i, j);
            r.transport_cost += cost(i, j) * x;
            neg_entropy += xlogx(x) - x;
        }
    }
    r.entropy = -neg_entropy;
    const Vector rows = plan.rowwise().sum();
    const Vector cols = plan.colwise().sum().transpose();
    r.kl_rows = generalized_kl(rows, p.weights());
    r.kl_cols = generalized_kl(cols, q.weights());
    r.marginal_violation = std::max((rows - p.weights()).lpNorm<Eigen::Infinity>(),
                                    (cols - q.weights()).lpNorm<Eigen::Infinity>());
    r.value = r.transport_cost;
    if (cfg.epsilon > 0.0) r.value -= cfg.epsilon * r.entropy;
    if (cfg.tau) {
        r.value += *cfg.tau * (r.kl_rows + r.kl_cols);
    } else {
        r.feasible = r.marginal_violation <= 10.0 * cfg.tol;
    }
    return r;
}

double primal_objective(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& p,
                        const DiscreteMeasure& q, const SolverConfig& cfg) {
    return evaluate_primal(plan, cost, p, q, cfg).value;
}

} // namespace uotkit
