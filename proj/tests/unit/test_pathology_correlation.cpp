#include "support.hpp"

#include "uotkit/error.hpp"
#include "uotkit/pathology_correlation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace uotkit;
using namespace testsupport;

namespace {

OdMap map_of(std::size_t w, std::size_t h, std::vector<double> values) {
    OdMap m(w, h);
    m.values = std::move(values);
    return m;
}

OdMap random_map(SplitMix64& rng, std::size_t w, std::size_t h) {
    OdMap m(w, h);
    for (double& v : m.values) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0, 2);
    return m;
}

} // namespace

TEST_SUITE("pathology_correlation") {
    TEST_CASE("od_vectorize is row-major") {
        CHECK(od_vectorize(map_of(2, 2, {1, 0, 0.5, 2})) == OdVector{1, 0, 0.5, 2});
        CHECK(od_vectorize(OdMap(3, 2)) == OdVector(6, 0.0));
        CHECK(od_vectorize(map_of(3, 1, {3, 1, 2})) == OdVector{3, 1, 2});
    }

    TEST_CASE("correlation_matrix examples") {
        const std::vector<OdVector> one{{1, 2, 3}};
        CHECK(correlation_matrix(one).values()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        const std::vector<OdVector> ortho{{1, 0}, {0, 2}};
        const Matrix m = correlation_matrix(ortho).values();
        CHECK(m(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(m(0, 1) == 0.0);
        CHECK(m(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
        const std::vector<OdVector> scaled{{1, 2, 0.5}, {3, 6, 1.5}};
        CHECK(correlation_matrix(scaled).values()(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
        const std::vector<OdVector> zero{{0, 0}, {1, 1}};
        const Matrix z = correlation_matrix(zero).values();
        CHECK(z(0, 0) == 0.0);
        CHECK(z(0, 1) == 0.0);
    }

    TEST_CASE("correlation matrices are symmetric with unit diagonal") {
        SplitMix64 rng(1);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t n = 1 + rng.next() % 6;
            std::vector<OdVector> batch;
            for (std::size_t k = 0; k < n; ++k) batch.push_back(od_vectorize(random_map(rng, 5, 4)));
            for (auto& v : batch) v[0] += 0.1; // keep every vector nonzero
            const Matrix m = correlation_matrix(batch).values();
            CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK(m.maxCoeff() <= 1.0);
            CHECK(m.minCoeff() >= -1.0);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == doctest::Approx(1.0).epsilon(1e-15));
                for (std::size_t j = 0; j < n; ++j)
                    CHECK(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                          doctest::Approx(naive_cosine(batch[i], batch[j])).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("odc_loss examples") {
        SplitMix64 rng(2);
        std::vector<OdMap> real{random_map(rng, 4, 4), random_map(rng, 4, 4)};
        CHECK(odc_loss(real, real) == 0.0);

        // N = 1: correlations agree, FOD totals 3 and 1 with alpha = 2
        const std::vector<OdMap> r1{map_of(3, 1, {1, 1, 1})};
        const std::vector<OdMap> f1{map_of(3, 1, {std::sqrt(1.0 / 3), std::sqrt(1.0 / 3), std::sqrt(1.0 / 3)})};
        CHECK(odc_loss(r1, f1) == doctest::Approx(4.0).epsilon(1e-12));

        // identical totals, M_real = I, M_fake = all ones
        const std::vector<OdMap> r2{map_of(2, 1, {1, 0}), map_of(2, 1, {0, 1})};
        const std::vector<OdMap> f2{map_of(2, 1, {std::sqrt(0.5), std::sqrt(0.5)}), map_of(2, 1, {std::sqrt(0.5), std::sqrt(0.5)})};
        const OdcTerms t = odc_terms(r2, f2);
        CHECK(t.mass == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(t.correlation == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(t.total() == doctest::Approx(1.4142).epsilon(1e-4));
    }

    TEST_CASE("odc mass term depends on batch totals only") {
        SplitMix64 rng(3);
        std::vector<OdMap> real, fake;
        for (int k = 0; k < 4; ++k) {
            real.push_back(random_map(rng, 6, 5));
            fake.push_back(random_map(rng, 6, 5));
        }
        const OdcTerms base = odc_terms(real, fake);
        double sr = 0, sf = 0;
        for (const auto& m : real)
            for (double v : m.values) sr += v * v;
        for (const auto& m : fake)
            for (double v : m.values) sf += v * v;
        CHECK(base.mass == doctest::Approx((sr - sf) * (sr - sf) / 16.0).epsilon(1e-12));

        // shuffle pixels within each map: mass term unchanged
        std::vector<OdMap> shuffled = fake;
        for (auto& m : shuffled)
            for (std::size_t k = m.values.size(); k > 1; --k) std::swap(m.values[k - 1], m.values[rng.next() % k]);
        CHECK(odc_terms(real, shuffled).mass == doctest::Approx(base.mass).epsilon(1e-12));

        // permute both batches identically: loss unchanged
        std::vector<OdMap> rp{real[2], real[0], real[3], real[1]};
        std::vector<OdMap> fp{fake[2], fake[0], fake[3], fake[1]};
        CHECK(odc_loss(rp, fp) == doctest::Approx(base.total()).epsilon(1e-12));

        // scaling the fake batch moves only the mass term
        std::vector<OdMap> scaled = fake;
        for (auto& m : scaled)
            for (double& v : m.values) v *= 1.7;
        const OdcTerms s = odc_terms(real, scaled);
        CHECK(s.correlation == doctest::Approx(base.correlation).epsilon(1e-12));
        CHECK(s.mass != doctest::Approx(base.mass).epsilon(1e-6));
    }

    TEST_CASE("odc preconditions") {
        const std::vector<OdMap> a{OdMap(2, 2)};
        const std::vector<OdMap> b{OdMap(2, 2), OdMap(2, 2)};
        const std::vector<OdMap> c{OdMap(3, 2)};
        CHECK_THROWS_AS(odc_loss(a, b), Error);
        CHECK_THROWS_AS(odc_loss(a, c), Error);
        const std::vector<OdMap> none;
        CHECK_THROWS_AS(odc_loss(none, none), Error);
    }

    TEST_CASE("cc_loss examples") {
        const Matrix eye = Matrix::Identity(2, 2);
        Matrix same(2, 2);
        same << 1, 1, 1, 1;
        const std::vector<FeatureSet> real{FeatureSet(eye)};
        const std::vector<FeatureSet> fake{FeatureSet(same)};
        CHECK(cc_loss(real, real) == 0.0);
        CHECK(cc_loss(real, fake) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        const std::vector<FeatureSet> real2{FeatureSet(eye), FeatureSet(eye)};
        const std::vector<FeatureSet> fake2{FeatureSet(same), FeatureSet(same)};
        CHECK(cc_loss(real2, fake2) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    }

    TEST_CASE("cc_loss is permutation-equivariant") {
        SplitMix64 rng(4);
        const Matrix r = random_matrix(rng, 5, 3, -1, 1);
        const Matrix f = random_matrix(rng, 5, 3, -1, 1);
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
        perm.indices() << 3, 0, 4, 1, 2;
        const std::vector<FeatureSet> a{FeatureSet(r)}, b{FeatureSet(f)};
        const std::vector<FeatureSet> pa{FeatureSet(perm * r)}, pb{FeatureSet(perm * f)};
        CHECK(cc_loss(pa, pb) == doctest::Approx(cc_loss(a, b)).epsilon(1e-12));
        const std::vector<FeatureSet> three{FeatureSet(random_matrix(rng, 4, 3, -1, 1))};
        CHECK_THROWS_AS(cc_loss(a, three), Error);
    }
}
