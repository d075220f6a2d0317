#include "thermkit/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "thermkit/assembly.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/error.hpp"
#include "thermkit/solver.hpp"
#include "thermkit/stack_json.hpp"

namespace thermkit::dataset {

using nlohmann::json;

std::string to_string(Mode m) { return m == Mode::Steady ? "steady" : "transient"; }

std::string to_string(Split s) {
    switch (s) {
        case Split::Train:
            return "train";
        case Split::Val:
            return "val";
        case Split::Test:
            return "test";
    }
    return "train";
}

Mode mode_from_string(const std::string& s) {
    if (s == "steady") return Mode::Steady;
    if (s == "transient") return Mode::Transient;
    throw Error("unknown mode '" + s + "' (expected steady or transient)");
}

namespace {

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw DatasetError("unknown split '" + s + "'");
}

const char* const kTensorNames[] = {"power_map", "power_vec", "temperature", "times"};

std::filesystem::path tensor_path(const std::filesystem::path& dir, const std::string& id, const char* name) {
    return dir / "records" / (id + "." + name + ".tfm");
}

Tensor make_tensor(std::vector<std::uint64_t> dims, const std::vector<double>& v) {
    Tensor t;
    t.dims = std::move(dims);
    t.data.assign(v.begin(), v.end());
    return t;
}

struct Job {
    std::string id;
    Split split;
    Fidelity fidelity;
    std::uint64_t seed;
};

struct Model {
    VoxelGrid grid;
    SparseSystem sys;
    SteadyOptions steady;
};

std::vector<std::size_t> active_layers(const PackageStack& st) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < st.layers.size(); ++i) {
        if (st.layers[i].is_active()) out.push_back(i);
    }
    return out;
}

}  // namespace

std::vector<double> power_density_map(const Layer& layer, const PowerAssignment& p, int h, int w) {
    const double bx = layer.extent_x / w;
    const double by = layer.extent_y / h;
    std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
    for (const CoreRegion& c : layer.power_regions) {
        auto it = p.watts.find(c.id);
        if (it == p.watts.end() || it->second == 0.0) continue;
        const double density = it->second / c.rect.area();
        const int i0 = std::max(0, static_cast<int>(std::floor(c.rect.x0 / bx)));
        const int i1 = std::min(w - 1, static_cast<int>(std::ceil(c.rect.x1 / bx)));
        const int j0 = std::max(0, static_cast<int>(std::floor(c.rect.y0 / by)));
        const int j1 = std::min(h - 1, static_cast<int>(std::ceil(c.rect.y1 / by)));
        for (int j = j0; j <= j1; ++j) {
            const double oy = std::min(c.rect.y1, (j + 1) * by) - std::max(c.rect.y0, j * by);
            if (oy <= 0.0) continue;
            for (int i = i0; i <= i1; ++i) {
                const double ox = std::min(c.rect.x1, (i + 1) * bx) - std::max(c.rect.x0, i * bx);
                if (ox <= 0.0) continue;
                out[static_cast<std::size_t>(j) * w + i] += density * ox * oy / (bx * by);
            }
        }
    }
    return out;
}

std::size_t NormStats::channel(const std::string& name) const {
    auto it = std::find(channels.begin(), channels.end(), name);
    if (it == channels.end()) throw DatasetError("no normalization channel '" + name + "'");
    return static_cast<std::size_t>(it - channels.begin());
}

NormStats compute_norm_stats(std::span<const SampleRecord> train, std::span<const std::string> power_layers) {
    if (train.empty()) throw DatasetError("cannot compute normalization stats of an empty split");
    const std::size_t n_power = power_layers.size();
    NormStats s;
    for (const std::string& l : power_layers) s.channels.push_back("power:" + l);
    s.channels.push_back("temperature");

    // visit(c, fn) calls fn on every value of channel c across the split.
    auto visit = [&](std::size_t c, auto&& fn) {
        for (const SampleRecord& r : train) {
            if (c < n_power) {
                const auto& d = r.power_map.dims;
                if (d.size() != 4 || d[1] != n_power) throw DatasetError("record " + r.id + " has wrong power channels");
                const std::size_t plane = d[2] * d[3];
                for (std::size_t f = 0; f < d[0]; ++f) {
                    const float* p = r.power_map.data.data() + (f * n_power + c) * plane;
                    for (std::size_t i = 0; i < plane; ++i) fn(p[i]);
                }
            } else {
                for (float v : r.temperature.data) fn(v);
            }
        }
    };
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
        double sum = 0.0;
        std::size_t n = 0;
        visit(c, [&](double v) {
            sum += v;
            ++n;
        });
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        visit(c, [&](double v) { ss += (v - mean) * (v - mean); });
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            throw DatasetError("channel '" + s.channels[c] + "' has zero variance over the training split");
        }
        s.mean.push_back(mean);
        s.std.push_back(sd);
    }
    return s;
}

nlohmann::json norm_stats_to_json(const NormStats& s) {
    json out = json::object();
    for (std::size_t c = 0; c < s.channels.size(); ++c) out[s.channels[c]] = {{"mean", s.mean[c]}, {"std", s.std[c]}};
    return out;
}

NormStats norm_stats_from_json(const nlohmann::json& j) {
    NormStats s;
    for (const auto& [name, v] : j.items()) {
        s.channels.push_back(name);
        s.mean.push_back(v.at("mean").get<double>());
        s.std.push_back(v.at("std").get<double>());
    }
    return s;
}

void write_record(const std::filesystem::path& dir, const SampleRecord& rec) {
    std::filesystem::create_directories(dir / "records");
    const Tensor* ts[] = {&rec.power_map, &rec.power_vec, &rec.temperature, &rec.times};
    for (int i = 0; i < 4; ++i) write_tensor(tensor_path(dir, rec.id, kTensorNames[i]), *ts[i]);
}

SampleRecord read_record(const std::filesystem::path& dir, const nlohmann::json& e) {
    SampleRecord r;
    try {
        r.id = e.at("id").get<std::string>();
        r.split = split_from_string(e.at("split").get<std::string>());
        r.fidelity = fidelity_from_string(e.at("fidelity").get<std::string>());
        r.seed = e.at("seed").get<std::uint64_t>();
        Tensor* ts[] = {&r.power_map, &r.power_vec, &r.temperature, &r.times};
        for (int i = 0; i < 4; ++i) {
            const auto dims = e.at("dims").at(kTensorNames[i]).get<std::vector<std::uint64_t>>();
            *ts[i] = read_tensor(tensor_path(dir, r.id, kTensorNames[i]), dims);
        }
    } catch (const json::exception& ex) {
        throw DatasetError(std::string("malformed manifest record entry: ") + ex.what());
    }
    return r;
}

nlohmann::json load_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw DatasetError("'" + dir.string() + "' has no manifest.json (missing or incomplete dataset)");
    json m;
    try {
        in >> m;
    } catch (const json::exception& e) {
        throw DatasetError("manifest.json is not valid JSON: " + std::string(e.what()));
    }
    const std::string v = m.value("format", std::string());
    if (v != kFormatVersion) {
        throw DatasetError("dataset version '" + v + "' is not supported (expected " + kFormatVersion + ")");
    }
    return m;
}

std::vector<SampleRecord> load_records(const std::filesystem::path& dir, const nlohmann::json& manifest) {
    std::vector<SampleRecord> out;
    for (const json& e : manifest.at("records")) out.push_back(read_record(dir, e));
    return out;
}

nlohmann::json generate(const GenerateOptions& o, const std::filesystem::path& dir) {
    if (o.n_high < 0 || o.n_low < 0 || o.n_val < 0 || o.n_test < 0) throw DatasetError("sample counts must be >= 0");
    if (o.n_high + o.n_low <= 0) throw DatasetError("need n_high + n_low > 0");
    if (o.grid_h < 1 || o.grid_w < 1) throw DatasetError("export grid must be at least 1x1");
    if (o.mode == Mode::Transient && (o.frames < 2 || o.t_end <= 0.0 || o.segments < 1)) {
        throw DatasetError("transient datasets need frames >= 2, t_end > 0 and segments >= 1");
    }

    const PackageStack stack = make_case(o.case_name);
    const auto active = active_layers(stack);
    if (active.empty()) throw DatasetError("case '" + o.case_name + "' has no power regions");
    const std::size_t obs_layer = active.back();
    std::vector<std::string> power_layers;
    for (std::size_t l : active) power_layers.push_back(stack.layers[l].name);
    const auto cores = stack.core_ids();

    // Seeds: train HF and LF ranges both start at `seed`, so the first
    // min(n_high, n_low) seeds exist at both fidelities with the same power.
    const std::uint64_t after_train = o.seed + static_cast<std::uint64_t>(std::max(o.n_high, o.n_low));
    struct Range {
        Split split;
        Fidelity fid;
        std::uint64_t first;
        int count;
    };
    const std::vector<Range> ranges = {
        {Split::Train, Fidelity::High, o.seed, o.n_high},
        {Split::Train, Fidelity::Low, o.seed, o.n_low},
        {Split::Val, Fidelity::High, after_train, o.n_val},
        {Split::Test, Fidelity::High, after_train + static_cast<std::uint64_t>(o.n_val), o.n_test},
    };
    std::vector<Job> jobs;
    for (const Range& r : ranges) {
        for (int i = 0; i < r.count; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s-%s-%04d", to_string(r.split).c_str(),
                          r.fid == Fidelity::High ? "hf" : "lf", i);
            jobs.push_back({id, r.split, r.fid, r.first + static_cast<std::uint64_t>(i)});
        }
    }

    const bool need_hf = o.n_high + o.n_val + o.n_test > 0;
    std::optional<Model> hf, lf;
    if (need_hf) {
        Model m{build_hf_mesh(stack, o.hf), {}, {}};
        m.sys = assemble(m.grid, stack);
        hf = std::move(m);
    }
    if (o.n_low > 0) {
        Model m{build_lf_mesh(stack, o.lf), {}, {}};
        m.sys = assemble(m.grid, stack);
        lf = std::move(m);
    }

    const int F = o.mode == Mode::Steady ? 1 : o.frames;
    const double dt = o.mode == Mode::Steady ? 0.0 : (o.dt > 0.0 ? o.dt : o.t_end / (10.0 * (o.frames - 1)));
    const auto H = static_cast<std::uint64_t>(o.grid_h);
    const auto W = static_cast<std::uint64_t>(o.grid_w);
    const std::size_t plane = H * W;

    // Remove any stale manifest first so a partial directory never looks complete.
    std::filesystem::create_directories(dir / "records");
    std::filesystem::remove(dir / "manifest.json");

    auto run = [&](const Job& job) -> SampleRecord {
        const Model& m = job.fidelity == Fidelity::High ? *hf : *lf;
        const PowerWaveform wave = o.mode == Mode::Steady
                                       ? PowerWaveform::constant(sample_power(stack, job.seed))
                                       : sample_waveform(stack, job.seed, o.segments, o.t_end);
        const SourceSchedule sched = rasterize_waveform(m.grid, stack, wave);

        std::vector<double> times, temp;
        if (o.mode == Mode::Steady) {
            auto [field, rep] = solve_steady(m.sys, sched.q.at(0), m.steady);
            times = {0.0};
            temp = top_plane(m.grid, field.values, obs_layer, o.grid_h, o.grid_w);
        } else {
            TransientOptions to;
            to.t_end = o.t_end;
            to.dt = dt;
            to.frames = o.frames;
            to.t_initial = stack.ambient;
            auto [res, rep] = solve_transient(m.sys, sched, to);
            times = res.times;
            for (const TemperatureField& f : res.frames) {
                auto p = top_plane(m.grid, f.values, obs_layer, o.grid_h, o.grid_w);
                temp.insert(temp.end(), p.begin(), p.end());
            }
        }

        std::vector<double> pmap, pvec;
        for (std::size_t f = 0; f < times.size(); ++f) {
            // The power that drove the step ending at this frame.
            const double t_probe = f == 0 ? 0.0 : times[f] - 0.5 * (times[f] - times[f - 1]);
            const PowerAssignment& p = wave.at(t_probe);
            for (std::size_t l : active) {
                auto mp = power_density_map(stack.layers[l], p, o.grid_h, o.grid_w);
                pmap.insert(pmap.end(), mp.begin(), mp.end());
            }
            for (const std::string& c : cores) pvec.push_back(p.watts.at(c));
        }

        SampleRecord r;
        r.id = job.id;
        r.split = job.split;
        r.fidelity = job.fidelity;
        r.seed = job.seed;
        r.power_map = make_tensor({static_cast<std::uint64_t>(F), active.size(), H, W}, pmap);
        r.power_vec = make_tensor({static_cast<std::uint64_t>(F), cores.size()}, pvec);
        r.temperature = make_tensor({static_cast<std::uint64_t>(F), H, W}, temp);
        r.times = make_tensor({static_cast<std::uint64_t>(F)}, times);
        write_record(dir, r);
        return r;
    };

    std::vector<std::optional<SampleRecord>> out(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                out[i] = run(jobs[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(o.jobs, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty()) {
            throw DatasetError("sample " + jobs[i].id + " (seed " + std::to_string(jobs[i].seed) +
                               ") failed: " + errors[i]);
        }
    }

    json records = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const SampleRecord& r = *out[i];
        json dims = json::object();
        dims["power_map"] = r.power_map.dims;
        dims["power_vec"] = r.power_vec.dims;
        dims["temperature"] = r.temperature.dims;
        dims["times"] = r.times.dims;
        json e = {{"id", r.id},
                  {"split", to_string(r.split)},
                  {"fidelity", to_string(r.fidelity)},
                  {"seed", r.seed},
                  {"dims", dims}};
        if (!(read_record(dir, e).temperature == r.temperature)) {
            throw DatasetError("record " + r.id + " did not read back identically");
        }
        records.push_back(e);
    }

    std::vector<SampleRecord> train;
    for (auto& r : out) {
        if (r->split == Split::Train) train.push_back(*r);
    }
    const NormStats stats = compute_norm_stats(train, power_layers);

    // Matched-seed fidelity gap on the observation plane, final frame.
    double gap = 0.0;
    const int pairs = std::min(o.n_high, o.n_low);
    for (int i = 0; i < pairs; ++i) {
        const SampleRecord& h = *out[static_cast<std::size_t>(i)];
        const SampleRecord& l = *out[static_cast<std::size_t>(o.n_high + i)];
        const std::size_t base = (static_cast<std::size_t>(F) - 1) * plane;
        double mean = 0.0, diff = 0.0;
        for (std::size_t k = 0; k < plane; ++k) {
            mean += h.temperature.data[base + k];
            diff = std::max(diff, std::abs(static_cast<double>(l.temperature.data[base + k]) -
                                           static_cast<double>(h.temperature.data[base + k])));
        }
        mean /= static_cast<double>(plane);
        if (mean - stack.ambient > 0.0) gap = std::max(gap, diff / (mean - stack.ambient));
    }

    json seeds = json::array();
    for (const Range& r : ranges) {
        if (r.count > 0) {
            seeds.push_back({{"split", to_string(r.split)},
                             {"fidelity", to_string(r.fid)},
                             {"first", r.first},
                             {"count", r.count}});
        }
    }
    json m = {
        {"format", kFormatVersion},
        {"case", o.case_name},
        {"mode", to_string(o.mode)},
        {"material_table", kMaterialTableVersion},
        {"stack", stack_to_json(stack)},
        {"observation_plane",
         {{"layer", stack.layers[obs_layer].name},
          {"surface", "top"},
          {"z_m", stack.layer_z0(obs_layer) + stack.layers[obs_layer].thickness}}},
        {"export", {{"h", o.grid_h}, {"w", o.grid_w}, {"frames", F}}},
        {"power_channels", power_layers},
        {"core_ids", cores},
        {"counts",
         {{"train", {{"high", o.n_high}, {"low", o.n_low}}},
          {"val", {{"high", o.n_val}, {"low", 0}}},
          {"test", {{"high", o.n_test}, {"low", 0}}}}},
        {"seeds", seeds},
        {"base_seed", o.seed},
        {"resolution",
         {{"high",
           {{"cells_per_mm", o.hf.cells_per_mm},
            {"z_cells_per_layer", o.hf.z_cells_per_layer},
            {"z_cells_per_mm", o.hf.z_cells_per_mm},
            {"max_cells_per_axis", o.hf.max_cells_per_axis},
            {"subsamples", o.hf.subsamples},
            {"cells", hf ? hf->grid.size() : 0}}},
          {"low",
           {{"cells_per_mm", o.lf.cells_per_mm},
            {"z_cells_per_layer", o.lf.z_cells_per_layer},
            {"max_cells_per_axis", o.lf.max_cells_per_axis},
            {"subsamples", o.lf.subsamples},
            {"cells", lf ? lf->grid.size() : 0}}}}},
        {"norm_stats", norm_stats_to_json(stats)},
        {"fidelity_gap", {{"pairs", pairs}, {"max_rel", gap}}},
        {"records", records},
    };
    if (o.mode == Mode::Transient) {
        m["transient"] = {{"t_end", o.t_end}, {"dt", dt}, {"segments", o.segments}, {"t_initial", stack.ambient}};
    }
    const std::string text = m.dump(2) + "\n";
    write_file_atomic(dir / "manifest.json",
                      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return m;
}

}  // namespace thermkit::dataset
