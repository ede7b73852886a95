#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace uotkit {

/// 8-bit interleaved RGB image, row-major.
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; // width * height * 3

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h, std::uint8_t fill = 255);

    std::size_t pixel_count() const noexcept { return width * height; }
    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

    void validate() const;
};

/// Per-pixel optical density, `channels` values per pixel, interleaved row-major.
/// Values are non-negative and finite.
struct OdMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<double> values;

    OdMap() = default;
    OdMap(std::size_t w, std::size_t h, std::size_t ch = 1, double fill = 0.0);

    std::size_t pixel_count() const noexcept { return width * height; }
    double& at(std::size_t x, std::size_t y, std::size_t c = 0) { return values[(y * width + x) * channels + c]; }
    double at(std::size_t x, std::size_t y, std::size_t c = 0) const { return values[(y * width + x) * channels + c]; }
    double sum() const noexcept;
};

/// Unit-norm OD column per stain; invertible.
class StainMatrix {
public:
    // Columns must have unit norm within 1e-6 (invalid_argument) and the matrix
    // must satisfy |det| >= 1e-8 (singular_stains).
    explicit StainMatrix(const Eigen::Matrix3d& columns);

    // Rescales every column to unit length first; a zero column is singular.
    static StainMatrix normalized(Eigen::Matrix3d columns);

    // Hematoxylin (0.650, 0.704, 0.286), DAB (0.269, 0.568, 0.779), and their
    // normalized cross product as the residual channel.
    static StainMatrix h_dab();

    // Nine values, column-major (stain 0 first), normalized like `normalized`.
    static StainMatrix from_column_major(const std::array<double, 9>& v);

    const Eigen::Matrix3d& columns() const noexcept { return m_; }
    const Eigen::Matrix3d& inverse() const noexcept { return inv_; }
    Eigen::Vector3d column(int k) const { return m_.col(k); }

private:
    Eigen::Matrix3d m_;
    Eigen::Matrix3d inv_;
};

inline constexpr int hematoxylin_channel = 0;
inline constexpr int dab_channel_index = 1;
inline constexpr int residual_channel = 2;

using ReferenceIntensity = std::array<double, 3>;
inline constexpr ReferenceIntensity default_i0{255.0, 255.0, 255.0};
inline constexpr double intensity_floor = 1.0;

// -log10(max(I, 1) / I0), clamped at zero for I > I0.
double intensity_to_od(double intensity, double i0);
// I0 * 10^(-OD); inverse of the above above the floor.
double od_to_intensity(double od, double i0);

struct FodConfig {
    double alpha = 2.0;
    void validate() const;
};

OdMap rgb_to_od(const RgbImage& img, const ReferenceIntensity& i0 = default_i0);

// Per pixel: concentrations = inverse(stains) * od, negatives clamped to zero.
std::array<OdMap, 3> deconvolve(const OdMap& od, const StainMatrix& stains);

// Pre-clamp concentrations for one OD vector.
Eigen::Vector3d unmix(const Eigen::Vector3d& od, const StainMatrix& stains);

OdMap dab_channel(const RgbImage& img, const StainMatrix& stains = StainMatrix::h_dab(),
                  const ReferenceIntensity& i0 = default_i0, int dab_index = dab_channel_index);

// OD^alpha per value.
OdMap focal_od(const OdMap& od, const FodConfig& cfg = {});

// Forward model: concentrations (stain space) -> 8-bit RGB through the stain
// matrix and the inverse Beer-Lambert law, rounded to nearest.
RgbImage synthesize_rgb(const std::array<OdMap, 3>& concentrations, const StainMatrix& stains,
                        const ReferenceIntensity& i0 = default_i0);

// Rec. 601 luma (0.299, 0.587, 0.114), one value per pixel, row-major.
std::vector<double> to_grayscale(const RgbImage& img);

} // namespace uotkit
