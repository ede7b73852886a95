#pragma once

#include "uotkit/linalg.hpp"
#include "uotkit/stain_optics.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uotkit::io {

// UMAT: "UMAT" | u32 version (1) | u64 rows | u64 cols | rows*cols f64, row-major,
// all little-endian.
inline constexpr char umat_magic[4] = {'U', 'M', 'A', 'T'};
inline constexpr std::uint32_t umat_version = 1;
inline constexpr std::size_t umat_header_bytes = 24;

std::vector<std::uint8_t> encode_umat(const Matrix& m);
Matrix decode_umat(std::span<const std::uint8_t> bytes);

Matrix read_umat(const std::filesystem::path& path);
void write_umat(const Matrix& m, const std::filesystem::path& path);

// Rectangular numeric CSV. A first line containing any non-numeric cell is a
// header and is skipped. Decimal point is always '.'.
Matrix parse_csv_matrix(std::string_view text);
Matrix read_csv_matrix(const std::filesystem::path& path);
std::string format_csv_matrix(const Matrix& m);
void write_csv_matrix(const Matrix& m, const std::filesystem::path& path);

// .umat by extension, CSV otherwise.
Matrix read_matrix(const std::filesystem::path& path);
// Flattens a single-row or single-column matrix file.
Vector read_vector(const std::filesystem::path& path);

// 8-bit RGB PNG (grayscale and alpha are converted on read).
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& img, const std::filesystem::path& path);

// Single-channel OD map <-> matrix with rows = height, cols = width.
Matrix od_to_matrix(const OdMap& od);
OdMap matrix_to_od(const Matrix& m);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string file_digest(const std::filesystem::path& path);

} // namespace uotkit::io
