#include "uotkit/fixtures.hpp"

#include "uotkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace uotkit {

void SyntheticSpec::validate() const {
    require(size >= 8, ErrorCode::invalid_argument, "fixture size must be >= 8");
    require(n_blobs >= 0, ErrorCode::invalid_argument, "blob count must be >= 0");
    require(positive_fraction >= 0.0 && positive_fraction <= 1.0, ErrorCode::invalid_argument,
            "positive_fraction must lie in [0, 1]");
}

namespace {

struct Blob {
    double cx;
    double cy;
    double sx;
    double sy;
    bool positive;
};

// max-combined unit-height Gaussians, truncated at 3 sigma
OdMap rasterize(const std::vector<Blob>& blobs, std::size_t size, double dx, double dy, bool positives_only) {
    OdMap m(size, size);
    for (const Blob& b : blobs) {
        if (positives_only && !b.positive) continue;
        const double cx = b.cx + dx;
        const double cy = b.cy + dy;
        const long x0 = std::max(0L, static_cast<long>(std::floor(cx - 3.0 * b.sx)));
        const long x1 = std::min(static_cast<long>(size) - 1, static_cast<long>(std::ceil(cx + 3.0 * b.sx)));
        const long y0 = std::max(0L, static_cast<long>(std::floor(cy - 3.0 * b.sy)));
        const long y1 = std::min(static_cast<long>(size) - 1, static_cast<long>(std::ceil(cy + 3.0 * b.sy)));
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) {
                const double ux = (static_cast<double>(x) - cx) / b.sx;
                const double uy = (static_cast<double>(y) - cy) / b.sy;
                if (std::abs(ux) > 3.0 || std::abs(uy) > 3.0) continue;
                const double g = std::exp(-0.5 * (ux * ux + uy * uy));
                double& cell = m.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
                cell = std::max(cell, g);
            }
        }
    }
    return m;
}

OdMap scaled(const OdMap& m, double k, double offset = 0.0) {
    OdMap out = m;
    for (double& v : out.values) v = offset + k * v;
    return out;
}

StainMatrix he_basis(const StainMatrix& stains) {
    const Eigen::Vector3d h = stains.column(hematoxylin_channel);
    const Eigen::Vector3d eosin = Eigen::Vector3d(0.072, 0.990, 0.105).normalized();
    Eigen::Matrix3d m;
    m.col(0) = h;
    m.col(1) = eosin;
    m.col(2) = h.cross(eosin).normalized();
    return StainMatrix(m);
}

} // namespace

StainPair make_stain_pair(const SyntheticSpec& spec, const StainMatrix& stains) {
    spec.validate();
    SplitMix64 rng(spec.seed);
    const double size = static_cast<double>(spec.size);

    std::vector<Blob> blobs;
    blobs.reserve(static_cast<std::size_t>(spec.n_blobs));
    for (int b = 0; b < spec.n_blobs; ++b) {
        Blob blob{};
        blob.cx = rng.uniform(0.0, size);
        blob.cy = rng.uniform(0.0, size);
        blob.sx = rng.uniform(1.0 + size / 40.0, 1.0 + size / 12.0);
        blob.sy = rng.uniform(1.0 + size / 40.0, 1.0 + size / 12.0);
        blob.positive = false;
        blobs.push_back(blob);
    }
    // exact count of positive blobs via a seeded Fisher-Yates shuffle
    std::vector<std::size_t> order(blobs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = order.size(); k > 1; --k) {
        const std::size_t r = static_cast<std::size_t>(rng.next() % k);
        std::swap(order[k - 1], order[r]);
    }
    const auto n_pos = static_cast<std::size_t>(std::lround(spec.positive_fraction * spec.n_blobs));
    for (std::size_t k = 0; k < n_pos; ++k) blobs[order[k]].positive = true;

    const double jitter = size / 16.0;
    const double dx = rng.uniform(-jitter, jitter);
    const double dy = rng.uniform(-jitter, jitter);

    const OdMap all = rasterize(blobs, spec.size, 0.0, 0.0, false);
    const OdMap pos = rasterize(blobs, spec.size, 0.0, 0.0, true);
    const OdMap shifted = rasterize(blobs, spec.size, dx, dy, false);

    StainPair out;
    out.dab_truth = scaled(pos, fixture_dab_peak);

    std::array<OdMap, 3> ihc{OdMap(spec.size, spec.size), OdMap(spec.size, spec.size), OdMap(spec.size, spec.size)};
    ihc[hematoxylin_channel] = scaled(all, fixture_counterstain_peak);
    ihc[dab_channel_index] = out.dab_truth;
    out.ihc_like = synthesize_rgb(ihc, stains);

    std::array<OdMap, 3> he{scaled(shifted, fixture_he_nuclear_peak), OdMap(spec.size, spec.size, 1, fixture_eosin_background),
                            OdMap(spec.size, spec.size)};
    out.he_like = synthesize_rgb(he, he_basis(stains));
    return out;
}

} // namespace uotkit
