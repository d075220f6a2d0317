#include "thermkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "thermkit/dataset.hpp"
#include "thermkit/error.hpp"

namespace thermkit::metrics {

MetricReport evaluate(std::span<const Field> pred, std::span<const Field> truth) {
    if (pred.size() != truth.size()) {
        throw Error("sample count mismatch: " + std::to_string(pred.size()) + " predictions, " +
                    std::to_string(truth.size()) + " truths");
    }
    if (truth.empty()) throw Error("no samples to evaluate");
    MetricReport r;
    double sq = 0.0, ab = 0.0, rel = 0.0, pape_sum = 0.0;
    for (std::size_t s = 0; s < truth.size(); ++s) {
        const auto& p = pred[s].values;
        const auto& t = truth[s].values;
        if (p.size() != t.size() || t.empty()) {
            throw Error("shape mismatch in sample '" + truth[s].id + "': " + std::to_string(p.size()) + " vs " +
                        std::to_string(t.size()) + " values");
        }
        SampleMetrics m;
        m.id = truth[s].id;
        double s_sq = 0.0, s_ab = 0.0, s_rel = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!(t[i] > 0.0) || !std::isfinite(t[i])) {
                throw Error("truth value " + std::to_string(t[i]) + " in sample '" + truth[s].id +
                            "' is not a positive absolute temperature");
            }
            const double e = std::abs(p[i] - t[i]);
            const double pct = 100.0 * e / t[i];
            s_sq += e * e;
            s_ab += e;
            s_rel += pct;
            m.max_abs = std::max(m.max_abs, e);
            m.pape = std::max(m.pape, pct);
        }
        const auto n = static_cast<double>(t.size());
        m.rmse = std::sqrt(s_sq / n);
        m.mean_abs = s_ab / n;
        m.mape = s_rel / n;
        sq += s_sq;
        ab += s_ab;
        rel += s_rel;
        pape_sum += m.pape;
        r.max_abs = std::max(r.max_abs, m.max_abs);
        r.values += t.size();
        r.per_sample.push_back(std::move(m));
    }
    const auto n = static_cast<double>(r.values);
    r.samples = truth.size();
    r.rmse = std::sqrt(sq / n);
    r.mean_abs = ab / n;
    r.mape = rel / n;
    r.pape = pape_sum / static_cast<double>(r.samples);
    return r;
}

Ratio improvement_ratio(double ours, double baseline) {
    if (!(baseline > 0.0)) throw Error("baseline error must be positive");
    if (ours < 0.0) throw Error("error values cannot be negative");
    if (ours == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {baseline / ours, false};
}

Improvement improvement(const MetricReport& ours, const MetricReport& baseline) {
    return {improvement_ratio(ours.mean_abs, baseline.mean_abs), improvement_ratio(ours.max_abs, baseline.max_abs)};
}

nlohmann::json to_json(const MetricReport& r, bool per_sample) {
    nlohmann::json j = {{"rmse", r.rmse},         {"mape", r.mape},       {"pape", r.pape},
                        {"mean_abs", r.mean_abs}, {"max_abs", r.max_abs}, {"samples", r.samples},
                        {"values", r.values},     {"units", {{"rmse", "K"}, {"mean_abs", "K"}, {"max_abs", "K"},
                                                             {"mape", "%"}, {"pape", "%"}}}};
    if (per_sample) {
        nlohmann::json ps = nlohmann::json::array();
        for (const SampleMetrics& m : r.per_sample) {
            ps.push_back({{"id", m.id},
                          {"rmse", m.rmse},
                          {"mape", m.mape},
                          {"pape", m.pape},
                          {"mean_abs", m.mean_abs},
                          {"max_abs", m.max_abs}});
        }
        j["per_sample"] = ps;
    }
    return j;
}

MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    r.rmse = j.at("rmse").get<double>();
    r.mape = j.at("mape").get<double>();
    r.pape = j.at("pape").get<double>();
    r.mean_abs = j.at("mean_abs").get<double>();
    r.max_abs = j.at("max_abs").get<double>();
    r.samples = j.value("samples", std::size_t{0});
    r.values = j.value("values", std::size_t{0});
    return r;
}

std::vector<Field> load_dataset_fields(const std::filesystem::path& dir) {
    const auto manifest = dataset::load_manifest(dir);
    std::vector<Field> out;
    for (const auto& e : manifest.at("records")) {
        const dataset::SampleRecord r = dataset::read_record(dir, e);
        out.push_back({r.id, std::vector<double>(r.temperature.data.begin(), r.temperature.data.end())});
    }
    return out;
}

MetricReport evaluate_dirs(const std::filesystem::path& pred, const std::filesystem::path& truth) {
    const auto t = load_dataset_fields(truth);
    std::map<std::string, Field> by_id;
    for (Field& f : load_dataset_fields(pred)) by_id[f.id] = std::move(f);
    std::vector<Field> p;
    for (const Field& f : t) {
        auto it = by_id.find(f.id);
        if (it == by_id.end()) throw Error("prediction directory has no record '" + f.id + "'");
        p.push_back(it->second);
    }
    if (by_id.size() != t.size()) throw Error("prediction directory has records the truth lacks");
    return evaluate(p, t);
}

}  // namespace thermkit::metrics
