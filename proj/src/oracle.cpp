#include "uotkit/oracle.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace uotkit {

std::string_view to_string(OracleMethod method) noexcept {
    switch (method) {
    case OracleMethod::lp_enumeration: return "lp_enumeration";
    case OracleMethod::grid_search: return "grid_search";
    case OracleMethod::projected_descent: return "projected_descent";
    }
    return "unknown";
}

namespace {

// ---------------------------------------------------------------------------
// Balanced LP
// ---------------------------------------------------------------------------

struct Cell {
    int row;
    int col;
};

double linear_cost(const CostMatrix& cost, const Matrix& plan) { return (cost.values().array() * plan.array()).sum(); }

// Values of the unique basic solution supported on `tree` (n + m - 1 cells
// forming a spanning tree). Peels leaves: a leaf node's only cell carries all of
// its remaining mass.
Matrix basic_solution(const std::vector<Cell>& tree, const Vector& p, const Vector& q) {
    const int n = static_cast<int>(p.size());
    const int m = static_cast<int>(q.size());
    std::vector<double> rem(n + m);
    for (int i = 0; i < n; ++i) rem[i] = p[i];
    for (int j = 0; j < m; ++j) rem[n + j] = q[j];
    std::vector<int> degree(n + m, 0);
    for (const Cell& c : tree) {
        ++degree[c.row];
        ++degree[n + c.col];
    }
    std::vector<bool> used(tree.size(), false);
    Matrix x = Matrix::Zero(n, m);
    for (std::size_t step = 0; step < tree.size(); ++step) {
        // find any unused cell touching a leaf
        std::size_t pick = tree.size();
        int leaf = -1;
        for (std::size_t e = 0; e < tree.size() && pick == tree.size(); ++e) {
            if (used[e]) continue;
            if (degree[tree[e].row] == 1) {
                pick = e;
                leaf = tree[e].row;
            } else if (degree[n + tree[e].col] == 1) {
                pick = e;
                leaf = n + tree[e].col;
            }
        }
        const Cell c = tree[pick];
        const int other = leaf == c.row ? n + c.col : c.row;
        const double val = rem[leaf];
        x(c.row, c.col) = val;
        rem[leaf] = 0.0;
        rem[other] -= val;
        used[pick] = true;
        --degree[c.row];
        --degree[n + c.col];
    }
    return x;
}

struct LpBest {
    double cost = std::numeric_limits<double>::infinity();
    Matrix plan;
};

void consider(LpBest& best, const CostMatrix& cost, Matrix x, double feas_tol) {
    if (x.minCoeff() < -feas_tol) return;
    x = x.cwiseMax(0.0);
    const double c = linear_cost(cost, x);
    if (c < best.cost) {
        best.cost = c;
        best.plan = std::move(x);
    }
}

LpBest lp_exhaustive(const CostMatrix& cost, const Vector& p, const Vector& q, double feas_tol) {
    const int n = static_cast<int>(p.size());
    const int m = static_cast<int>(q.size());
    const int needed = n + m - 1;
    std::vector<Cell> cells;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) cells.push_back({i, j});

    LpBest best;
    std::vector<Cell> chosen;
    using Parents = std::array<int, 2 * lp_max_side>;
    Parents root{};
    for (int k = 0; k < n + m; ++k) root[k] = k;

    auto find = [](const Parents& par, int a) {
        while (par[a] != a) a = par[a];
        return a;
    };
    std::function<void(std::size_t, const Parents&)> visit = [&](std::size_t idx, const Parents& par) {
        if (static_cast<int>(chosen.size()) == needed) {
            consider(best, cost, basic_solution(chosen, p, q), feas_tol);
            return;
        }
        if (cells.size() - idx < static_cast<std::size_t>(needed) - chosen.size()) return;
        const Cell c = cells[idx];
        const int a = find(par, c.row);
        const int b = find(par, n + c.col);
        if (a != b) {
            Parents next = par;
            next[a] = b;
            chosen.push_back(c);
            visit(idx + 1, next);
            chosen.pop_back();
        }
        visit(idx + 1, par);
    };
    visit(0, root);
    return best;
}

LpBest lp_pivoting(const CostMatrix& cost, const Vector& p, const Vector& q) {
    const int n = static_cast<int>(p.size());
    const int m = static_cast<int>(q.size());
    Matrix x = Matrix::Zero(n, m);
    std::vector<std::vector<bool>> basic(n, std::vector<bool>(m, false));

    // north-west corner start
    {
        Vector ra = p;
        Vector rb = q;
        int i = 0;
        int j = 0;
        while (true) {
            const double t = std::min(ra[i], rb[j]);
            x(i, j) = t;
            basic[i][j] = true;
            ra[i] -= t;
            rb[j] -= t;
            if (i == n - 1 && j == m - 1) break;
            if (i == n - 1) {
                ++j;
            } else if (j == m - 1) {
                ++i;
            } else if (ra[i] <= rb[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    const double reduced_tol = 1e-12 * (1.0 + cost.values().cwiseAbs().maxCoeff());
    const int max_pivots = 100000;
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
        // Potentials on the basis tree: u_i + v_j = C_ij, u_0 = 0.
        std::vector<double> pot(n + m, 0.0);
        std::vector<int> parent(n + m, -2);
        std::vector<int> order{0};
        parent[0] = -1;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const int node = order[head];
            if (node < n) {
                for (int j = 0; j < m; ++j) {
                    if (basic[node][j] && parent[n + j] == -2) {
                        parent[n + j] = node;
                        pot[n + j] = cost(node, j) - pot[node];
                        order.push_back(n + j);
                    }
                }
            } else {
                const int j = node - n;
                for (int i = 0; i < n; ++i) {
                    if (basic[i][j] && parent[i] == -2) {
                        parent[i] = node;
                        pot[i] = cost(i, j) - pot[node];
                        order.push_back(i);
                    }
                }
            }
        }
        require(static_cast<int>(order.size()) == n + m, ErrorCode::numerical_failure,
                "transport basis lost connectivity");

        // Bland: first cell with negative reduced cost enters.
        int ei = -1;
        int ej = -1;
        for (int i = 0; i < n && ei < 0; ++i) {
            for (int j = 0; j < m; ++j) {
                if (!basic[i][j] && cost(i, j) - pot[i] - pot[n + j] < -reduced_tol) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        }
        if (ei < 0) {
            LpBest out;
            out.plan = x.cwiseMax(0.0);
            out.cost = linear_cost(cost, out.plan);
            return out;
        }

        // Tree path from column ej up to the root and from row ei up to the root.
        auto path_to_root = [&](int node) {
            std::vector<int> path{node};
            while (parent[path.back()] >= 0) path.push_back(parent[path.back()]);
            return path;
        };
        std::vector<int> from_row = path_to_root(ei);
        std::vector<int> from_col = path_to_root(n + ej);
        // strip the common ancestor chain
        while (from_row.size() > 1 && from_col.size() > 1 &&
               from_row[from_row.size() - 2] == from_col[from_col.size() - 2]) {
            from_row.pop_back();
            from_col.pop_back();
        }
        // nodes along ei -> lca -> ej
        std::vector<int> nodes = from_row;
        for (auto it = from_col.rbegin() + 1; it != from_col.rend(); ++it) nodes.push_back(*it);

        // Cycle cells: entering (+), then walking ej -> ... -> ei alternately -, +, ...
        std::vector<Cell> minus;
        std::vector<Cell> plus;
        for (std::size_t t = nodes.size() - 1; t > 0; --t) {
            const int a = nodes[t];
            const int b = nodes[t - 1];
            const Cell c = a < n ? Cell{a, b - n} : Cell{b, a - n};
            ((nodes.size() - 1 - t) % 2 == 0 ? minus : plus).push_back(c);
        }
        // leaving cell: smallest value among the minus cells, ties by index
        Cell leave = minus.front();
        for (const Cell& c : minus) {
            const double xv = x(c.row, c.col);
            const double xl = x(leave.row, leave.col);
            if (xv < xl || (xv == xl && (c.row * m + c.col) < (leave.row * m + leave.col))) leave = c;
        }
        const double theta = x(leave.row, leave.col);
        x(ei, ej) += theta;
        for (const Cell& c : plus) x(c.row, c.col) += theta;
        for (const Cell& c : minus) x(c.row, c.col) -= theta;
        x(leave.row, leave.col) = 0.0;
        basic[ei][ej] = true;
        basic[leave.row][leave.col] = false;
    }
    fail(ErrorCode::numerical_failure, "tree pivoting did not terminate");
}

double spanning_tree_count(Eigen::Index n, Eigen::Index m) {
    return std::pow(static_cast<double>(n), static_cast<double>(m - 1)) *
           std::pow(static_cast<double>(m), static_cast<double>(n - 1));
}

constexpr double exhaustive_tree_cap = 5e4;

// ---------------------------------------------------------------------------
// Unbalanced primal search
// ---------------------------------------------------------------------------

// Term-by-term primal value; kept separate from evaluate_primal on purpose.
struct Primal {
    const Matrix& c;
    const Vector& p;
    const Vector& q;
    double eps;
    double tau;

    static double kl_term(double a, double b) {
        if (a <= 0.0) return b;
        if (b <= 0.0) return std::numeric_limits<double>::infinity();
        return a * std::log(a / b) - a + b;
    }

    double operator()(const Matrix& x) const {
        double val = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                const double v = x(i, j);
                val += c(i, j) * v;
                if (eps > 0.0 && v > 0.0) val += eps * (v * std::log(v) - v);
            }
        }
        for (Eigen::Index i = 0; i < x.rows(); ++i) val += tau * kl_term(x.row(i).sum(), p[i]);
        for (Eigen::Index j = 0; j < x.cols(); ++j) val += tau * kl_term(x.col(j).sum(), q[j]);
        return val;
    }
};

// Minimizes a convex f on [0, inf) by repeated grid zoom, never returning a
// point worse than x0.
double grid_line_search(const std::function<double(double)>& f, double x0, double scale, int depth) {
    constexpr int points = 16;
    double best_x = x0;
    double best_f = f(x0);
    double lo = 0.0;
    double hi = std::max(4.0 * x0, scale);
    for (int expansions = 0; expansions < 1100; ++expansions) {
        // grow the bracket while the function still decreases at its top end
        if (!(f(hi) < f(hi * 0.5))) break;
        hi *= 4.0;
    }
    for (int d = 0; d <= depth; ++d) {
        const double h = (hi - lo) / points;
        int arg = 0;
        double arg_f = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= points; ++k) {
            const double xk = lo + h * k;
            const double fk = f(xk);
            if (fk < arg_f) {
                arg_f = fk;
                arg = k;
            }
        }
        const double center = lo + h * arg;
        if (arg_f < best_f) {
            best_f = arg_f;
            best_x = center;
        }
        if (h <= 1e-17 * std::max(1.0, center)) break;
        lo = std::max(0.0, center - h);
        hi = center + h;
    }
    return best_x;
}

OracleResult grid_search(const Primal& obj, const Vector& p, const Vector& q, const SearchOptions& opts) {
    const Eigen::Index n = p.size();
    const Eigen::Index m = q.size();
    Matrix x = p * q.transpose();
    const double scale = std::max({1.0, p.sum(), q.sum()});
    double fx = obj(x);

    for (int level = 1; level <= opts.levels; ++level) {
        const int depth = 6 * level;
        for (int sweep = 0; sweep < opts.max_sweeps_per_level; ++sweep) {
            const double before = fx;
            // single entries
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    if (p[i] == 0.0 || q[j] == 0.0) {
                        x(i, j) = 0.0;
                        continue;
                    }
                    auto f = [&](double t) {
                        const double keep = x(i, j);
                        x(i, j) = t;
                        const double v = obj(x);
                        x(i, j) = keep;
                        return v;
                    };
                    x(i, j) = grid_line_search(f, x(i, j), scale, depth);
                }
            }
            // row, column and global rescalings capture the coupled directions
            auto scale_block = [&](auto&& block) {
                Matrix base = x;
                auto f = [&](double s) {
                    Matrix trial = base;
                    block(trial) *= s;
                    return obj(trial);
                };
                const double s = grid_line_search(f, 1.0, 2.0, depth);
                block(x) = block(base) * s;
            };
            for (Eigen::Index i = 0; i < n; ++i) scale_block([i](Matrix& mtx) { return mtx.row(i); });
            for (Eigen::Index j = 0; j < m; ++j) scale_block([j](Matrix& mtx) { return mtx.col(j); });
            scale_block([](Matrix& mtx) { return mtx.block(0, 0, mtx.rows(), mtx.cols()); });

            fx = obj(x);
            if (!(before - fx > 1e-16 * std::max(1.0, std::abs(fx)))) break;
        }
    }
    return {fx, x, OracleMethod::grid_search};
}

OracleResult mirror_descent(const Primal& obj, const Vector& p, const Vector& q, const SearchOptions& opts) {
    const Eigen::Index n = p.size();
    const Eigen::Index m = q.size();
    Matrix x = p * q.transpose();
    double fx = obj(x);
    double step = 0.5;
    const int max_steps = opts.max_sweeps_per_level * opts.levels;
    for (int it = 0; it < max_steps && step > 1e-18; ++it) {
        const Vector rows = x.rowwise().sum();
        const Vector cols = x.colwise().sum().transpose();
        Matrix grad(n, m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                double g = obj.c(i, j);
                if (obj.eps > 0.0 && x(i, j) > 0.0) g += obj.eps * std::log(x(i, j));
                if (rows[i] > 0.0) g += obj.tau * std::log(rows[i] / p[i]);
                if (cols[j] > 0.0) g += obj.tau * std::log(cols[j] / q[j]);
                grad(i, j) = g;
            }
        }
        const Matrix trial = (x.array() * (-step * grad.array()).exp()).matrix();
        const double ft = obj(trial);
        if (ft <= fx) {
            const double gain = fx - ft;
            x = trial;
            fx = ft;
            step *= 1.2;
            if (gain <= 1e-17 * std::max(1.0, std::abs(fx)) && step > 1.0) break;
        } else {
            step *= 0.5;
        }
    }
    return {fx, x, OracleMethod::projected_descent};
}

} // namespace

OracleResult lp_balanced(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                         LpStrategy strategy) {
    require(cost.rows() == p.size() && cost.cols() == q.size(), ErrorCode::invalid_argument,
            "cost shape does not match the measures");
    require(p.size() <= lp_max_side && q.size() <= lp_max_side, ErrorCode::instance_too_large,
            "exact LP oracle is capped at 8 x 8");
    require(std::abs(p.total_mass() - q.total_mass()) <= 1e-12, ErrorCode::mass_mismatch,
            "balanced transport needs equal total masses");

    const double feas_tol = 1e-12 * (1.0 + p.total_mass());
    if (strategy == LpStrategy::automatic) {
        strategy = spanning_tree_count(p.size(), q.size()) <= exhaustive_tree_cap ? LpStrategy::exhaustive
                                                                                  : LpStrategy::tree_pivoting;
    }
    const LpBest best = strategy == LpStrategy::exhaustive ? lp_exhaustive(cost, p.weights(), q.weights(), feas_tol)
                                                           : lp_pivoting(cost, p.weights(), q.weights());
    require(std::isfinite(best.cost), ErrorCode::numerical_failure, "no feasible basis found");
    return {best.cost, best.plan, OracleMethod::lp_enumeration};
}

OracleResult uot_dense_search(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q,
                              const SolverConfig& cfg, const SearchOptions& opts) {
    cfg.validate(true);
    require(!cfg.balanced(), ErrorCode::invalid_argument, "dense search needs a finite tau");
    require(cost.rows() == p.size() && cost.cols() == q.size(), ErrorCode::invalid_argument,
            "cost shape does not match the measures");
    require(opts.levels >= 1 && opts.max_sweeps_per_level >= 1, ErrorCode::invalid_argument,
            "search options must be positive");
    const Eigen::Index entries = cost.rows() * cost.cols();
    require(entries <= descent_max_entries, ErrorCode::instance_too_large,
            "dense search is capped at 36 plan entries");
    const Primal obj{cost.values(), p.weights(), q.weights(), cfg.epsilon, *cfg.tau};
    return entries <= grid_max_entries ? grid_search(obj, p.weights(), q.weights(), opts)
                                       : mirror_descent(obj, p.weights(), q.weights(), opts);
}

} // namespace uotkit
