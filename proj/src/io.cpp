#include "uotkit/io.hpp"

#include "uotkit/error.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace uotkit::io {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int k = 0; k < bytes; ++k) out.push_back(static_cast<std::uint8_t>((v >> (8 * k)) & 0xFFu));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) v |= static_cast<std::uint64_t>(in[offset + static_cast<std::size_t>(k)]) << (8 * k);
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string display(const std::filesystem::path& p) { return p.string(); }

} // namespace

std::vector<std::uint8_t> encode_umat(const Matrix& m) {
    std::vector<std::uint8_t> out;
    out.reserve(umat_header_bytes + static_cast<std::size_t>(m.size()) * 8);
    out.insert(out.end(), std::begin(umat_magic), std::end(umat_magic));
    put_le(out, umat_version, 4);
    put_le(out, static_cast<std::uint64_t>(m.rows()), 8);
    put_le(out, static_cast<std::uint64_t>(m.cols()), 8);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::uint64_t bits = 0;
            const double v = m(i, j);
            std::memcpy(&bits, &v, sizeof bits);
            put_le(out, bits, 8);
        }
    }
    return out;
}

Matrix decode_umat(std::span<const std::uint8_t> bytes) {
    require(bytes.size() >= 4 && std::memcmp(bytes.data(), umat_magic, 4) == 0, ErrorCode::format_error,
            "missing UMAT magic");
    require(bytes.size() >= umat_header_bytes, ErrorCode::corrupt_file, "UMAT header is truncated");
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
    require(version == umat_version, ErrorCode::format_error, "unsupported UMAT version " + std::to_string(version));
    const std::uint64_t rows = get_le(bytes, 8, 8);
    const std::uint64_t cols = get_le(bytes, 16, 8);
    const std::uint64_t payload = bytes.size() - umat_header_bytes;
    require(cols == 0 || rows <= payload / 8 / cols, ErrorCode::corrupt_file, "UMAT payload is truncated");
    require(payload == rows * cols * 8, ErrorCode::corrupt_file,
            "UMAT payload has " + std::to_string(payload) + " bytes, expected " + std::to_string(rows * cols * 8));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t off = umat_header_bytes;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const std::uint64_t bits = get_le(bytes, off, 8);
            double v = 0.0;
            std::memcpy(&v, &bits, sizeof v);
            m(i, j) = v;
            off += 8;
        }
    }
    return m;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + display(path));
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + display(path));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::io_error, "short write to " + display(path));
}

Matrix read_umat(const std::filesystem::path& path) { return decode_umat(read_bytes(path)); }

void write_umat(const Matrix& m, const std::filesystem::path& path) { write_bytes(path, encode_umat(m)); }

Matrix parse_csv_matrix(std::string_view text) {
    std::vector<std::vector<double>> rows;
    bool first = true;
    std::size_t width = 0;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        std::vector<double> values(cells.size());
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size() && numeric; ++k) numeric = parse_double(cells[k], values[k]);
        if (!numeric) {
            require(first, ErrorCode::parse_error, "non-numeric cell on line " + std::to_string(line_no));
            first = false;
            continue; // header
        }
        first = false;
        if (rows.empty()) width = values.size();
        require(values.size() == width, ErrorCode::format_error,
                "line " + std::to_string(line_no) + " has " + std::to_string(values.size()) + " cells, expected " +
                    std::to_string(width));
        rows.push_back(std::move(values));
    }
    require(!rows.empty(), ErrorCode::format_error, "CSV contains no numeric rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    return parse_csv_matrix(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_csv_matrix(const Matrix& m) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
    return os.str();
}

void write_csv_matrix(const Matrix& m, const std::filesystem::path& path) {
    const std::string s = format_csv_matrix(m);
    write_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Matrix read_matrix(const std::filesystem::path& path) {
    return path.extension() == ".umat" ? read_umat(path) : read_csv_matrix(path);
}

Vector read_vector(const std::filesystem::path& path) {
    const Matrix m = read_matrix(path);
    require(m.rows() == 1 || m.cols() == 1, ErrorCode::format_error,
            display(path) + " is a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                " matrix, expected a vector");
    return Eigen::Map<const Vector>(m.data(), m.size());
}

RgbImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    const std::string name = path.string();
    require(png_image_begin_read_from_file(&image, name.c_str()) != 0, ErrorCode::format_error,
            "cannot read PNG " + name + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    RgbImage img;
    img.width = image.width;
    img.height = image.height;
    img.pixels.resize(PNG_IMAGE_SIZE(image));
    const png_color white{255, 255, 255};
    if (png_image_finish_read(&image, &white, img.pixels.data(), 0, nullptr) == 0) {
        const std::string msg = image.message;
        png_image_free(&image);
        fail(ErrorCode::corrupt_file, "cannot decode PNG " + name + ": " + msg);
    }
    img.validate();
    return img;
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
    img.validate();
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;
    const std::string name = path.string();
    require(png_image_write_to_file(&image, name.c_str(), 0, img.pixels.data(), 0, nullptr) != 0,
            ErrorCode::io_error, "cannot write PNG " + name + ": " + image.message);
}

Matrix od_to_matrix(const OdMap& od) {
    require(od.channels == 1, ErrorCode::invalid_argument, "only single-channel OD maps map to matrices");
    Matrix m(static_cast<Eigen::Index>(od.height), static_cast<Eigen::Index>(od.width));
    for (std::size_t y = 0; y < od.height; ++y)
        for (std::size_t x = 0; x < od.width; ++x) m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = od.at(x, y);
    return m;
}

OdMap matrix_to_od(const Matrix& m) {
    require(m.allFinite(), ErrorCode::non_finite, "OD matrix has non-finite entries");
    require((m.array() >= 0.0).all(), ErrorCode::invalid_argument, "OD matrix has negative entries");
    OdMap od(static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.rows()));
    for (std::size_t y = 0; y < od.height; ++y)
        for (std::size_t x = 0; x < od.width; ++x) od.at(x, y) = m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x));
    return od;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    require(ctx != nullptr, ErrorCode::io_error, "cannot allocate digest context");
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) == 1 &&
                EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) == 1 &&
                EVP_DigestFinal_ex(ctx.get(), digest, &len) == 1,
            ErrorCode::io_error, "SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xF]);
    }
    return out;
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

} // namespace uotkit::io
