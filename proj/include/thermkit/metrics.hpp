#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace thermkit::metrics {

struct SampleMetrics {
    std::string id;
    double rmse = 0.0;      // K
    double mape = 0.0;      // %
    double pape = 0.0;      // % (this sample's peak)
    double mean_abs = 0.0;  // K
    double max_abs = 0.0;   // K
};

/// rmse, mean_abs and max_abs pool every voxel of every sample; mape is
/// 100 mean(|p - t| / t) over the same pool; pape is the mean over samples of
/// each sample's peak 100 |p - t| / t. Percentages use absolute-Kelvin truth.
struct MetricReport {
    double rmse = 0.0;
    double mape = 0.0;
    double pape = 0.0;
    double mean_abs = 0.0;
    double max_abs = 0.0;
    std::size_t samples = 0;
    std::size_t values = 0;
    std::vector<SampleMetrics> per_sample;
};

/// A field is one sample (all frames flattened).
struct Field {
    std::string id;
    std::vector<double> values;
};

/// Throws Error on mismatched sample counts or sizes, and on a nonpositive or
/// nonfinite truth value.
MetricReport evaluate(std::span<const Field> pred, std::span<const Field> truth);

/// Baseline over ours, so a smaller error gives a larger ratio. A zero
/// denominator yields infinity with `infinite` set.
struct Ratio {
    double value = 0.0;
    bool infinite = false;
};
Ratio improvement_ratio(double ours, double baseline);

struct Improvement {
    Ratio mean;
    Ratio max;
};
Improvement improvement(const MetricReport& ours, const MetricReport& baseline);

nlohmann::json to_json(const MetricReport& r, bool per_sample = true);
MetricReport report_from_json(const nlohmann::json& j);

/// Temperature fields of every record in a dataset directory, by manifest
/// order. Records are matched by id when evaluating two directories.
std::vector<Field> load_dataset_fields(const std::filesystem::path& dir);
MetricReport evaluate_dirs(const std::filesystem::path& pred, const std::filesystem::path& truth);

}  // namespace thermkit::metrics
