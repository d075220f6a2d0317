#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace thermkit {

/// Dense float32 tensor, row-major, dims outermost first.
struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> data;

    std::uint64_t count() const noexcept;
};

bool operator==(const Tensor& a, const Tensor& b);

inline constexpr char kTensorMagic[8] = {'T', 'H', 'E', 'R', 'M', 'F', 'M', '1'};
inline constexpr std::uint32_t kMaxTensorRank = 16;

/// Serializes to the on-disk layout: magic, uint32 rank, uint64 dims, float32
/// data, all little-endian.
std::vector<std::uint8_t> encode_tensor(const Tensor& t);

/// Throws FormatError with kind Magic (bad magic or implausible rank, which is
/// how a byte-swapped header shows up), Truncated (short file) or Shape
/// (trailing bytes, or dims that disagree with `expect_dims` when given).
Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::span<const std::uint64_t> expect_dims = {});

/// Writes to a sibling temp file, then renames over `path`.
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> expect_dims = {});

/// Same atomic write for arbitrary bytes (used for manifests).
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace thermkit
