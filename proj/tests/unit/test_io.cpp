#include "support.hpp"

#include "uotkit/error.hpp"
#include "uotkit/io.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <limits>

using namespace uotkit;
using namespace uotkit::io;
using namespace testsupport;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_argument;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

} // namespace

TEST_SUITE("io") {
    TEST_CASE("UMAT 1x1 layout") {
        TempDir dir("io");
        Matrix m(1, 1);
        m << 42.0;
        write_umat(m, dir / "one.umat");
        const auto bytes = read_bytes(dir / "one.umat");
        // 4 magic + 4 version + 8 rows + 8 cols, then one 8-byte value
        CHECK(bytes.size() == 32);
        CHECK(std::memcmp(bytes.data(), "UMAT", 4) == 0);
        CHECK(bytes[4] == 1);
        CHECK(bytes[8] == 1);
        CHECK(bytes[16] == 1);
        CHECK(read_umat(dir / "one.umat")(0, 0) == 42.0);
    }

    TEST_CASE("UMAT roundtrip is bit-exact") {
        SplitMix64 rng(1);
        Matrix m = random_matrix(rng, 2, 3, -1e300, 1e300);
        m(0, 0) = -0.0;
        m(1, 2) = std::numeric_limits<double>::denorm_min();
        const Matrix back = decode_umat(encode_umat(m));
        REQUIRE(back.rows() == 2);
        REQUIRE(back.cols() == 3);
        CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * 6) == 0);
        CHECK(decode_umat(encode_umat(Matrix(0, 4))).cols() == 4);
    }

    TEST_CASE("UMAT errors") {
        auto bytes = encode_umat(Matrix::Ones(2, 2));
        auto bad_magic = bytes;
        std::memcpy(bad_magic.data(), "XMAT", 4);
        CHECK(code_of([&] { decode_umat(bad_magic); }) == ErrorCode::format_error);
        auto truncated = bytes;
        truncated.pop_back();
        CHECK(code_of([&] { decode_umat(truncated); }) == ErrorCode::corrupt_file);
        auto extra = bytes;
        extra.push_back(0);
        CHECK(code_of([&] { decode_umat(extra); }) == ErrorCode::corrupt_file);
        auto short_header = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10);
        CHECK(code_of([&] { decode_umat(short_header); }) == ErrorCode::corrupt_file);
        auto version = bytes;
        version[4] = 2;
        CHECK(code_of([&] { decode_umat(version); }) == ErrorCode::format_error);
        auto huge = bytes;
        for (int k = 8; k < 24; ++k) huge[static_cast<std::size_t>(k)] = 0xFF;
        CHECK(code_of([&] { decode_umat(huge); }) == ErrorCode::corrupt_file);
        CHECK(code_of([] { read_umat("/nonexistent/file.umat"); }) == ErrorCode::io_error);
    }

    TEST_CASE("CSV parsing") {
        const Matrix a = parse_csv_matrix("1,2\n3,4");
        REQUIRE(a.rows() == 2);
        CHECK(a(1, 0) == 3.0);
        CHECK(a(1, 1) == 4.0);
        const Matrix h = parse_csv_matrix("a,b\n1,2\n");
        REQUIRE(h.rows() == 1);
        CHECK(h(0, 1) == 2.0);
        CHECK(parse_csv_matrix("1.5e-3, -2\r\n+3,4\r\n\r\n")(0, 0) == 0.0015);
        CHECK(code_of([] { parse_csv_matrix("1,2\n3"); }) == ErrorCode::format_error);
        CHECK(code_of([] { parse_csv_matrix("1,2\n3,x"); }) == ErrorCode::parse_error);
        CHECK(code_of([] { parse_csv_matrix("a,b\nc,d"); }) == ErrorCode::parse_error);
        CHECK(code_of([] { parse_csv_matrix(""); }) == ErrorCode::format_error);
        CHECK(code_of([] { parse_csv_matrix("1,,2"); }) == ErrorCode::format_error);
        CHECK(code_of([] { parse_csv_matrix("1,2,3\n1,,2"); }) == ErrorCode::parse_error);
    }

    TEST_CASE("CSV write-read roundtrip is exact") {
        TempDir dir("csv");
        SplitMix64 rng(2);
        const Matrix m = random_matrix(rng, 3, 4, -10, 10);
        write_csv_matrix(m, dir / "m.csv");
        CHECK(read_csv_matrix(dir / "m.csv") == m);
        CHECK(read_matrix(dir / "m.csv") == m);
        write_umat(m, dir / "m.umat");
        CHECK(read_matrix(dir / "m.umat") == m);
    }

    TEST_CASE("vectors from rows or columns") {
        TempDir dir("vec");
        write_text(dir / "row.csv", "1,2,3\n");
        write_text(dir / "col.csv", "p\n1\n2\n3\n");
        write_text(dir / "mat.csv", "1,2\n3,4\n");
        CHECK(read_vector(dir / "row.csv").size() == 3);
        CHECK(read_vector(dir / "col.csv")[2] == 3.0);
        CHECK(code_of([&] { read_vector(dir / "mat.csv"); }) == ErrorCode::format_error);
    }

    TEST_CASE("PNG roundtrip") {
        TempDir dir("png");
        SplitMix64 rng(3);
        RgbImage img(7, 5);
        for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng.next());
        write_png(img, dir / "a.png");
        const RgbImage back = read_png(dir / "a.png");
        CHECK(back.width == 7);
        CHECK(back.height == 5);
        CHECK(back.pixels == img.pixels);
        write_png(img, dir / "b.png");
        CHECK(read_bytes(dir / "a.png") == read_bytes(dir / "b.png"));
        write_text(dir / "bad.png", "not a png");
        CHECK(code_of([&] { read_png(dir / "bad.png"); }) == ErrorCode::format_error);
    }

    TEST_CASE("OD maps as matrices") {
        OdMap od(3, 2);
        od.values = {0, 1, 2, 3, 4, 5};
        const Matrix m = od_to_matrix(od);
        CHECK(m.rows() == 2);
        CHECK(m(1, 0) == 3.0);
        CHECK(matrix_to_od(m).values == od.values);
        CHECK(code_of([] { matrix_to_od(-Matrix::Ones(1, 1)); }) == ErrorCode::invalid_argument);
    }

    TEST_CASE("SHA-256 digests") {
        CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        const std::string abc = "abc";
        CHECK(sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(abc.data()), 3)) ==
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
