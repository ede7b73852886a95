#pragma once

#include "uotkit/stain_optics.hpp"

#include <cstddef>
#include <cstdint>

namespace uotkit {

/// SplitMix64 (Steele, Lea, Flood). Fixed algorithm so fixtures are identical
/// on every platform and in every language binding.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t size = 64;
    int n_blobs = 12;
    double positive_fraction = 0.3;

    void validate() const;
};

// Peak concentrations, kept low enough that 8-bit quantization error after
// unmixing with the H-DAB basis stays below 0.02 OD.
inline constexpr double fixture_dab_peak = 1.0;
inline constexpr double fixture_counterstain_peak = 0.4;
inline constexpr double fixture_he_nuclear_peak = 0.8;
inline constexpr double fixture_eosin_background = 0.3;

struct StainPair {
    RgbImage he_like;
    RgbImage ihc_like;
    OdMap dab_truth; // DAB concentration per pixel used to synthesize ihc_like
};

// Axis-aligned Gaussian blobs rasterized out to 3 sigma. Every blob receives
// hematoxylin counterstain in the IHC-like image; a seeded subset of
// round(positive_fraction * n_blobs) blobs also carries DAB. The H&E-like image
// shares the blob geometry, shifted by a seeded offset, with hematoxylin nuclei
// on an eosin background.
StainPair make_stain_pair(const SyntheticSpec& spec, const StainMatrix& stains = StainMatrix::h_dab());

} // namespace uotkit
