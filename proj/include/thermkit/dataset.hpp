#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermkit/grid.hpp"
#include "thermkit/tensor_io.hpp"

namespace thermkit::dataset {

inline constexpr const char* kFormatVersion = "thermkit-dataset/1";

enum class Mode { Steady, Transient };
enum class Split { Train, Val, Test };

std::string to_string(Mode m);
std::string to_string(Split s);
Mode mode_from_string(const std::string& s);

struct GenerateOptions {
    std::string case_name = "ind8c";
    int n_high = 30;  // train split
    int n_low = 90;   // train split
    int n_val = 0;    // HF only
    int n_test = 0;   // HF only
    std::uint64_t seed = 0;
    Mode mode = Mode::Steady;
    int grid_h = 32;
    int grid_w = 32;
    // transient only
    int frames = 5;
    double t_end = 1.0;  // s
    double dt = 0.0;     // 0 selects t_end / (10 (frames - 1))
    int segments = 1;
    HfResolution hf;
    LfResolution lf;
    int jobs = 1;
};

/// One exported sample. Steady records have F = 1 and times = {0}.
///   power_map   [F, C, H, W] W/m^2, one channel per active layer
///   power_vec   [F, n_cores] W, stack core order
///   temperature [F, H, W]    K, observation plane
///   times       [F]          s
struct SampleRecord {
    std::string id;
    Split split = Split::Train;
    Fidelity fidelity = Fidelity::High;
    std::uint64_t seed = 0;
    Tensor power_map;
    Tensor power_vec;
    Tensor temperature;
    Tensor times;
};

/// Per-channel standardization, x_hat = (x - mean) / std.
struct NormStats {
    std::vector<std::string> channels;
    std::vector<double> mean;
    std::vector<double> std;

    std::size_t channel(const std::string& name) const;
    double normalize(std::size_t c, double x) const { return (x - mean[c]) / std[c]; }
    double denormalize(std::size_t c, double x) const { return x * std[c] + mean[c]; }
};

/// Channels are "power:<layer>" for each power_map channel, then
/// "temperature". Population statistics over every voxel and frame. Throws
/// DatasetError on an empty split or a zero-variance channel.
NormStats compute_norm_stats(std::span<const SampleRecord> train, std::span<const std::string> power_layers);

nlohmann::json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

/// Files are <dir>/records/<id>.<tensor>.tfm.
void write_record(const std::filesystem::path& dir, const SampleRecord& rec);
SampleRecord read_record(const std::filesystem::path& dir, const nlohmann::json& manifest_entry);

/// Generates records, verifies them by re-reading, then writes manifest.json
/// (its presence marks a complete dataset). Returns the manifest.
nlohmann::json generate(const GenerateOptions& opts, const std::filesystem::path& dir);

/// Throws DatasetError if the manifest is absent or has another version.
nlohmann::json load_manifest(const std::filesystem::path& dir);
std::vector<SampleRecord> load_records(const std::filesystem::path& dir, const nlohmann::json& manifest);

/// Exact per-layer power map on an h x w grid over the layer footprint (W/m^2).
std::vector<double> power_density_map(const Layer& layer, const PowerAssignment& p, int h, int w);

}  // namespace thermkit::dataset
