#include "support.hpp"

#include "uotkit/error.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/transport_cycle.hpp"
#include "uotkit/uot_solver.hpp"

#include <doctest.h>

using namespace uotkit;
using namespace testsupport;

namespace {

double mean_abs(const Matrix& a) { return a.cwiseAbs().sum() / static_cast<double>(a.size()); }

} // namespace

TEST_SUITE("transport_cycle") {
    TEST_CASE("compose examples") {
        const Matrix half = 0.5 * Matrix::Identity(2, 2);
        CHECK(compose(half, half) == 0.25 * Matrix::Identity(2, 2));

        Matrix a(2, 2);
        a << 0, 0, 1, 2;
        Matrix b(2, 3);
        b << 1, 2, 3, 4, 5, 6;
        CHECK(compose(a, b).row(0).isZero(0.0));

        SplitMix64 rng(1);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix x = random_matrix(rng, 2, 3, 0, 1);
            const Matrix y = random_matrix(rng, 3, 2, 0, 1);
            CHECK((compose(x, y) - naive_product(x, y)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }

    TEST_CASE("tcyc examples") {
        const Matrix half = 0.5 * Matrix::Identity(2, 2);
        CHECK(tcyc_residual({half, half, 0.25 * Matrix::Identity(2, 2)}) == 0.0);
        CHECK(tcyc_residual({half, half, Matrix::Zero(2, 2)}) == doctest::Approx(0.125).epsilon(1e-15));
    }

    TEST_CASE("one-cell bump raises the residual linearly") {
        SplitMix64 rng(2);
        const double delta = 1e-3;
        for (int trial = 0; trial < 20; ++trial) {
            const auto n = static_cast<Eigen::Index>(1 + rng.next() % 5);
            const auto k = static_cast<Eigen::Index>(1 + rng.next() % 5);
            const auto m = static_cast<Eigen::Index>(1 + rng.next() % 5);
            const Matrix a = random_matrix(rng, n, k, 0, 1);
            const Matrix b = random_matrix(rng, k, m, 0, 1);
            PlanTriple t{a, b, naive_product(a, b)};
            const double base = tcyc_residual(t);
            CHECK(base <= 1e-15);
            const auto i = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(n));
            const auto j = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(m));
            t.t_direct(i, j) += delta;
            CHECK(std::abs(tcyc_residual(t) - base - delta / static_cast<double>(n * m)) <= 1e-15);
        }
    }

    TEST_CASE("residual is non-negative and obeys the triangle bound") {
        SplitMix64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix a = random_matrix(rng, 3, 4, 0, 1);
            const Matrix b = random_matrix(rng, 4, 2, 0, 1);
            const Matrix d1 = random_matrix(rng, 3, 2, 0, 2);
            const Matrix d2 = random_matrix(rng, 3, 2, 0, 2);
            const double r1 = tcyc_residual({a, b, d1});
            const double r2 = tcyc_residual({a, b, d2});
            CHECK(r1 >= 0.0);
            CHECK(r1 <= r2 + mean_abs(d1 - d2) + 1e-15);
        }
    }

    TEST_CASE("composed mass is bounded by the heaviest intermediate row") {
        SplitMix64 rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix a = random_matrix(rng, 3, 4, 0, 1);
            const Matrix b = random_matrix(rng, 4, 5, 0, 1);
            CHECK(compose(a, b).sum() <= a.sum() * b.rowwise().sum().maxCoeff() + 1e-12);
        }
    }

    TEST_CASE("solver plans on a chain of identical features nearly commute") {
        SplitMix64 rng(5);
        // well-separated directions so the sharp plans are near permutations
        Matrix x = Matrix::Identity(5, 5) + 0.05 * random_matrix(rng, 5, 5, 0, 1);
        const CostMatrix c = neg_cosine_cost(FeatureSet(x), FeatureSet(x));
        const DiscreteMeasure u = uniform_measure(5);
        SolverConfig cfg = SolverConfig::make_balanced(1e-3);
        cfg.anneal = true;
        const TransportPlan hi = solve(c, u, u, cfg);
        const TransportPlan ii = solve(c, u, u, cfg);
        const TransportPlan direct = solve(c, u, u, cfg);
        REQUIRE(hi.converged);
        // the second leg enters as a transition kernel: rows divided by their source mass
        const Matrix kernel = ii.plan.array().colwise() / u.weights().array();
        CHECK(tcyc_residual({hi.plan, kernel, direct.plan}) < 1e-3);
    }

    TEST_CASE("triple validation") {
        CHECK_THROWS_AS(tcyc_residual({Matrix::Zero(2, 3), Matrix::Zero(2, 2), Matrix::Zero(2, 2)}), Error);
        Matrix neg = Matrix::Zero(2, 2);
        neg(0, 0) = -1.0;
        CHECK_THROWS_AS(tcyc_residual({neg, Matrix::Zero(2, 2), Matrix::Zero(2, 2)}), Error);
        Matrix nan = Matrix::Zero(2, 2);
        nan(1, 1) = std::nan("");
        CHECK_THROWS_AS(tcyc_residual({nan, Matrix::Zero(2, 2), Matrix::Zero(2, 2)}), Error);
    }
}
