#include "uotkit/stain_optics.hpp"

#include "uotkit/error.hpp"
#include "uotkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uotkit {

RgbImage::RgbImage(std::size_t w, std::size_t h, std::uint8_t fill) : width(w), height(h), pixels(w * h * 3, fill) {}

void RgbImage::validate() const {
    require(width >= 1 && height >= 1, ErrorCode::invalid_argument, "image must be at least 1x1");
    require(pixels.size() == width * height * 3, ErrorCode::invalid_argument, "pixel buffer does not match 3 x w x h");
}

OdMap::OdMap(std::size_t w, std::size_t h, std::size_t ch, double fill)
    : width(w), height(h), channels(ch), values(w * h * ch, fill) {}

double OdMap::sum() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

StainMatrix::StainMatrix(const Eigen::Matrix3d& columns) : m_(columns) {
    require(m_.allFinite(), ErrorCode::non_finite, "stain matrix has non-finite entries");
    for (int k = 0; k < 3; ++k) {
        require(std::abs(m_.col(k).norm() - 1.0) <= 1e-6, ErrorCode::invalid_argument,
                "stain column " + std::to_string(k) + " is not unit length");
    }
    require(std::abs(m_.determinant()) >= 1e-8, ErrorCode::singular_stains, "stain matrix is singular");
    inv_ = m_.inverse();
}

StainMatrix StainMatrix::normalized(Eigen::Matrix3d columns) {
    for (int k = 0; k < 3; ++k) {
        const double n = columns.col(k).norm();
        require(n > 0.0 && std::isfinite(n), ErrorCode::singular_stains,
                "stain column " + std::to_string(k) + " has zero length");
        columns.col(k) /= n;
    }
    return StainMatrix(columns);
}

StainMatrix StainMatrix::h_dab() {
    const Eigen::Vector3d h = Eigen::Vector3d(0.650, 0.704, 0.286).normalized();
    const Eigen::Vector3d dab = Eigen::Vector3d(0.269, 0.568, 0.779).normalized();
    Eigen::Matrix3d m;
    m.col(0) = h;
    m.col(1) = dab;
    m.col(2) = h.cross(dab).normalized();
    return StainMatrix(m);
}

StainMatrix StainMatrix::from_column_major(const std::array<double, 9>& v) {
    Eigen::Matrix3d m;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) m(r, c) = v[static_cast<std::size_t>(c * 3 + r)];
    return normalized(m);
}

double intensity_to_od(double intensity, double i0) {
    require(i0 > 0.0 && std::isfinite(i0), ErrorCode::invalid_argument, "reference intensity must be positive");
    const double od = -std::log10(std::max(intensity, intensity_floor) / i0);
    return std::max(od, 0.0);
}

double od_to_intensity(double od, double i0) { return i0 * std::pow(10.0, -od); }

void FodConfig::validate() const {
    require(std::isfinite(alpha) && alpha > 1.0, ErrorCode::invalid_argument,
            "focal exponent alpha must exceed 1, got " + std::to_string(alpha));
}

OdMap rgb_to_od(const RgbImage& img, const ReferenceIntensity& i0) {
    img.validate();
    for (double r : i0) require(r > 0.0 && std::isfinite(r), ErrorCode::invalid_argument, "i0 entries must be positive");
    // 256-entry lookup per channel; identical to calling intensity_to_od per pixel.
    std::array<std::array<double, 256>, 3> lut{};
    for (std::size_t c = 0; c < 3; ++c)
        for (int v = 0; v < 256; ++v) lut[c][static_cast<std::size_t>(v)] = intensity_to_od(v, i0[c]);

    OdMap od(img.width, img.height, 3);
    parallel_for(img.pixels.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) od.values[k] = lut[k % 3][img.pixels[k]];
    });
    return od;
}

Eigen::Vector3d unmix(const Eigen::Vector3d& od, const StainMatrix& stains) { return stains.inverse() * od; }

std::array<OdMap, 3> deconvolve(const OdMap& od, const StainMatrix& stains) {
    require(od.channels == 3, ErrorCode::invalid_argument, "deconvolution needs a 3-channel OD map");
    require(od.values.size() == od.pixel_count() * 3, ErrorCode::invalid_argument, "OD buffer size mismatch");
    std::array<OdMap, 3> out{OdMap(od.width, od.height), OdMap(od.width, od.height), OdMap(od.width, od.height)};
    const Eigen::Matrix3d& inv = stains.inverse();
    parallel_for(od.pixel_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const Eigen::Vector3d v(od.values[3 * k], od.values[3 * k + 1], od.values[3 * k + 2]);
            const Eigen::Vector3d c = inv * v;
            for (int s = 0; s < 3; ++s) out[static_cast<std::size_t>(s)].values[k] = std::max(c[s], 0.0);
        }
    });
    return out;
}

OdMap dab_channel(const RgbImage& img, const StainMatrix& stains, const ReferenceIntensity& i0, int dab_index) {
    require(dab_index >= 0 && dab_index < 3, ErrorCode::invalid_argument, "DAB channel index must be 0, 1 or 2");
    auto parts = deconvolve(rgb_to_od(img, i0), stains);
    return std::move(parts[static_cast<std::size_t>(dab_index)]);
}

OdMap focal_od(const OdMap& od, const FodConfig& cfg) {
    cfg.validate();
    OdMap out = od;
    for (double& v : out.values) {
        require(v >= 0.0 && std::isfinite(v), ErrorCode::invalid_argument, "OD values must be finite and >= 0");
        v = std::pow(v, cfg.alpha);
    }
    return out;
}

RgbImage synthesize_rgb(const std::array<OdMap, 3>& concentrations, const StainMatrix& stains,
                        const ReferenceIntensity& i0) {
    const std::size_t w = concentrations[0].width;
    const std::size_t h = concentrations[0].height;
    for (const OdMap& c : concentrations) {
        require(c.width == w && c.height == h && c.channels == 1, ErrorCode::invalid_argument,
                "concentration maps must share one single-channel shape");
    }
    RgbImage img(w, h);
    img.validate();
    const Eigen::Matrix3d& s = stains.columns();
    for (std::size_t k = 0; k < w * h; ++k) {
        const Eigen::Vector3d c(concentrations[0].values[k], concentrations[1].values[k], concentrations[2].values[k]);
        const Eigen::Vector3d od = s * c;
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double intensity = od_to_intensity(od[static_cast<Eigen::Index>(ch)], i0[ch]);
            img.pixels[3 * k + ch] = static_cast<std::uint8_t>(std::clamp(std::lround(intensity), 0L, 255L));
        }
    }
    return img;
}

std::vector<double> to_grayscale(const RgbImage& img) {
    img.validate();
    std::vector<double> g(img.pixel_count());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] = 0.299 * img.pixels[3 * k] + 0.587 * img.pixels[3 * k + 1] + 0.114 * img.pixels[3 * k + 2];
    }
    return g;
}

} // namespace uotkit
