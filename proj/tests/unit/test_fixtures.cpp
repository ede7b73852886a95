#include "support.hpp"

#include "uotkit/error.hpp"
#include "uotkit/fixtures.hpp"
#include "uotkit/stain_optics.hpp"

#include <doctest.h>

#include <cmath>

using namespace uotkit;
using namespace testsupport;

TEST_SUITE("fixtures") {
    TEST_CASE("SplitMix64 reference stream") {
        // reference outputs for seed 1234567
        SplitMix64 rng(1234567);
        CHECK(rng.next() == 6457827717110365317ULL);
        CHECK(rng.next() == 3203168211198807973ULL);
        CHECK(rng.next() == 9817491932198370423ULL);
        SplitMix64 u(9);
        for (int k = 0; k < 1000; ++k) {
            const double x = u.uniform();
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
        }
    }

    TEST_CASE("pairs are deterministic per seed") {
        SyntheticSpec spec;
        spec.seed = 42;
        const StainPair a = make_stain_pair(spec);
        const StainPair b = make_stain_pair(spec);
        CHECK(a.he_like.pixels == b.he_like.pixels);
        CHECK(a.ihc_like.pixels == b.ihc_like.pixels);
        CHECK(a.dab_truth.values == b.dab_truth.values);
        spec.seed = 43;
        CHECK(make_stain_pair(spec).ihc_like.pixels != a.ihc_like.pixels);
    }

    TEST_CASE("no positives gives an empty ground truth") {
        SyntheticSpec spec;
        spec.positive_fraction = 0.0;
        const StainPair p = make_stain_pair(spec);
        CHECK(p.dab_truth.sum() == 0.0);
        for (double v : dab_channel(p.ihc_like).values) CHECK(v <= 0.02);
    }

    TEST_CASE("DAB ground truth is recovered within the quantization bound") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            SyntheticSpec spec;
            spec.seed = seed;
            spec.positive_fraction = 0.5;
            const StainPair p = make_stain_pair(spec);
            const OdMap got = dab_channel(p.ihc_like);
            double err = 0.0;
            double fod_truth = 0.0, fod_got = 0.0;
            for (std::size_t k = 0; k < got.values.size(); ++k) {
                err = std::max(err, std::abs(got.values[k] - p.dab_truth.values[k]));
                fod_truth += p.dab_truth.values[k] * p.dab_truth.values[k];
                fod_got += got.values[k] * got.values[k];
            }
            CHECK(err <= 0.02);
            CHECK(p.dab_truth.sum() > 0.0);
            // |a^2 - b^2| <= 2 max(a, b) |a - b| per pixel
            const double per_pixel = 2.0 * (fixture_dab_peak + 0.02) * 0.02;
            CHECK(std::abs(fod_truth - fod_got) <= per_pixel * static_cast<double>(got.values.size()));
        }
    }

    TEST_CASE("H&E-like image shares geometry but not staining") {
        SyntheticSpec spec;
        spec.seed = 7;
        const StainPair p = make_stain_pair(spec);
        CHECK(p.he_like.width == spec.size);
        CHECK(p.he_like.height == spec.size);
        CHECK(p.he_like.pixels != p.ihc_like.pixels);
    }

    TEST_CASE("spec validation") {
        SyntheticSpec small;
        small.size = 4;
        CHECK_THROWS_AS(make_stain_pair(small), Error);
        SyntheticSpec frac;
        frac.positive_fraction = 1.5;
        CHECK_THROWS_AS(make_stain_pair(frac), Error);
    }
}
