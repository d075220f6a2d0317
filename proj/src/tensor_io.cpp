#include "thermkit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "thermkit/error.hpp"

namespace thermkit {

static_assert(std::endian::native == std::endian::little, "tensor files are written in host order");

std::uint64_t Tensor::count() const noexcept {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return n;
}

bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims == b.dims && a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

namespace {

template <class T>
T get(std::span<const std::uint8_t> bytes, std::size_t at) {
    T v;
    std::memcpy(&v, bytes.data() + at, sizeof(T));
    return v;
}

std::string dims_str(std::span<const std::uint64_t> d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s + "]";
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
    if (t.count() != t.data.size()) {
        throw FormatError(FormatError::Kind::Shape, "tensor dims " + dims_str(t.dims) + " do not match " +
                                                        std::to_string(t.data.size()) + " values");
    }
    const auto rank = static_cast<std::uint32_t>(t.dims.size());
    std::vector<std::uint8_t> out(12 + 8 * t.dims.size() + sizeof(float) * t.data.size());
    std::uint8_t* w = out.data();
    std::memcpy(w, kTensorMagic, 8);
    std::memcpy(w + 8, &rank, 4);
    for (std::size_t i = 0; i < t.dims.size(); ++i) std::memcpy(w + 12 + 8 * i, &t.dims[i], 8);
    if (!t.data.empty()) std::memcpy(w + 12 + 8 * t.dims.size(), t.data.data(), sizeof(float) * t.data.size());
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::span<const std::uint64_t> expect_dims) {
    using K = FormatError::Kind;
    if (bytes.size() < 12) {
        if (bytes.size() >= 8 && std::memcmp(bytes.data(), kTensorMagic, 8) != 0) {
            throw FormatError(K::Magic, "not a tensor file (bad magic)");
        }
        throw FormatError(K::Truncated, "tensor header truncated at " + std::to_string(bytes.size()) + " bytes");
    }
    if (std::memcmp(bytes.data(), kTensorMagic, 8) != 0) throw FormatError(K::Magic, "not a tensor file (bad magic)");
    const auto rank = get<std::uint32_t>(bytes, 8);
    if (rank > kMaxTensorRank) {
        throw FormatError(K::Magic, "implausible rank " + std::to_string(rank) +
                                        " (foreign byte order or unsupported version)");
    }
    const std::size_t header = 12 + 8 * static_cast<std::size_t>(rank);
    if (bytes.size() < header) throw FormatError(K::Truncated, "tensor dims truncated");
    Tensor t;
    for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(get<std::uint64_t>(bytes, 12 + 8 * i));
    // Guard the multiplication itself; a corrupt dim must not wrap around.
    std::uint64_t n = 1;
    for (std::uint64_t d : t.dims) {
        if (d != 0 && n > (bytes.size() / 4) / d) {
            throw FormatError(K::Truncated, "dims " + dims_str(t.dims) + " exceed the file size");
        }
        n *= d;
    }
    const std::size_t want = header + 4 * n;
    if (bytes.size() < want) {
        throw FormatError(K::Truncated, "tensor data truncated: " + std::to_string(bytes.size()) + " of " +
                                            std::to_string(want) + " bytes");
    }
    if (bytes.size() > want) throw FormatError(K::Shape, "trailing bytes after tensor data");
    if (!expect_dims.empty() && !std::equal(t.dims.begin(), t.dims.end(), expect_dims.begin(), expect_dims.end())) {
        throw FormatError(K::Shape, "tensor dims " + dims_str(t.dims) + ", expected " + dims_str(expect_dims));
    }
    t.data.resize(n);
    std::memcpy(t.data.data(), bytes.data() + header, 4 * n);
    return t;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError(FormatError::Kind::Io, "cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FormatError(FormatError::Kind::Io, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw FormatError(FormatError::Kind::Io, "rename to '" + path.string() + "' failed: " + ec.message());
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_file_atomic(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> expect_dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Kind::Io, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_tensor(bytes, expect_dims);
    } catch (const FormatError& e) {
        throw FormatError(e.kind(), path.filename().string() + ": " + e.what());
    }
}

}  // namespace thermkit
