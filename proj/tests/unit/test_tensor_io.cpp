#include <doctest.h>

#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "thermkit/error.hpp"
#include "thermkit/tensor_io.hpp"

using namespace thermkit;
using namespace testing;

namespace {

Tensor sample_tensor() {
    Tensor t;
    t.dims = {2, 3, 4};
    for (int i = 0; i < 24; ++i) t.data.push_back(0.5f * i - 3.25f);
    return t;
}

FormatError::Kind kind_of(std::span<const std::uint8_t> b, std::span<const std::uint64_t> expect = {}) {
    try {
        (void)decode_tensor(b, expect);
    } catch (const FormatError& e) {
        return e.kind();
    }
    FAIL("decode succeeded");
    return FormatError::Kind::Io;
}

}  // namespace

TEST_CASE("byte layout") {
    Tensor t;
    t.dims = {2};
    t.data = {1.0f, -2.0f};
    const auto b = encode_tensor(t);
    REQUIRE(b.size() == 8 + 4 + 8 + 8);
    CHECK(std::memcmp(b.data(), "THERMFM1", 8) == 0);
    CHECK(b[8] == 1);
    CHECK(b[9] == 0);
    CHECK(b[12] == 2);
    // 1.0f little-endian is 00 00 80 3f.
    CHECK(b[20] == 0x00);
    CHECK(b[22] == 0x80);
    CHECK(b[23] == 0x3f);
}

TEST_CASE("round trip") {
    const Tensor t = sample_tensor();
    CHECK(decode_tensor(encode_tensor(t)) == t);
    const std::vector<std::uint64_t> dims{2, 3, 4};
    CHECK(decode_tensor(encode_tensor(t), dims) == t);
    Tensor scalar;
    scalar.data = {7.0f};
    CHECK(scalar.count() == 1);
    CHECK(decode_tensor(encode_tensor(scalar)) == scalar);
    Tensor empty;
    empty.dims = {3, 0};
    CHECK(decode_tensor(encode_tensor(empty)) == empty);

    Gen g(4);
    for (int i = 0; i < 100; ++i) {
        Tensor r;
        const int rank = g.integer(1, 4);
        for (int d = 0; d < rank; ++d) r.dims.push_back(static_cast<std::uint64_t>(g.integer(1, 5)));
        for (std::uint64_t k = 0; k < r.count(); ++k) r.data.push_back(static_cast<float>(g.uniform(-1e3, 1e3)));
        CHECK(decode_tensor(encode_tensor(r)) == r);
    }

    TempDir dir("tio");
    write_tensor(dir.path / "a.tfm", t);
    CHECK(read_tensor(dir.path / "a.tfm") == t);
    CHECK_FALSE(std::filesystem::exists(dir.path / "a.tfm.tmp"));
}

TEST_CASE("corruption is classified") {
    const auto good = encode_tensor(sample_tensor());

    SUBCASE("every truncation") {
        for (std::size_t n = 0; n < good.size(); ++n) {
            CAPTURE(n);
            CHECK(kind_of(std::span(good.data(), n)) == FormatError::Kind::Truncated);
        }
    }
    SUBCASE("bad magic") {
        auto b = good;
        b[0] = 'X';
        CHECK(kind_of(b) == FormatError::Kind::Magic);
    }
    SUBCASE("byte-swapped header") {
        auto b = good;
        std::swap(b[8], b[11]);
        std::swap(b[9], b[10]);
        CHECK(kind_of(b) == FormatError::Kind::Magic);
    }
    SUBCASE("trailing bytes") {
        auto b = good;
        b.push_back(0);
        CHECK(kind_of(b) == FormatError::Kind::Shape);
    }
    SUBCASE("unexpected dims") {
        const std::vector<std::uint64_t> want{2, 4, 3};
        CHECK(kind_of(good, want) == FormatError::Kind::Shape);
        const std::vector<std::uint64_t> rank2{6, 4};
        CHECK(kind_of(good, rank2) == FormatError::Kind::Shape);
    }
    SUBCASE("dims that overflow") {
        Tensor t;
        t.dims = {1};
        t.data = {0.0f};
        auto b = encode_tensor(t);
        for (int i = 12; i < 20; ++i) b[i] = 0xff;
        CHECK(kind_of(b) == FormatError::Kind::Truncated);
    }
    SUBCASE("file errors name the file") {
        TempDir dir("tio_bad");
        std::ofstream(dir.path / "cut.tfm", std::ios::binary).write(reinterpret_cast<const char*>(good.data()), 30);
        CHECK_THROWS_WITH(read_tensor(dir.path / "cut.tfm"), doctest::Contains("cut.tfm"));
        try {
            (void)read_tensor(dir.path / "missing.tfm");
            FAIL("expected failure");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::Io);
        }
    }
}
