// thermkit command-line entry point.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermkit/assembly.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/dataset.hpp"
#include "thermkit/emt.hpp"
#include "thermkit/error.hpp"
#include "thermkit/grid.hpp"
#include "thermkit/metrics.hpp"
#include "thermkit/simd/kernels.hpp"
#include "thermkit/solver.hpp"
#include "thermkit/stack_json.hpp"
#include "thermkit/tensor_io.hpp"
#include "thermkit/validate.hpp"

using nlohmann::json;
using namespace thermkit;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDomain = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One global setting and where its value came from.
template <class T>
struct Setting {
    T value;
    std::string source = "default";
};

struct Globals {
    Setting<std::uint64_t> seed{0};
    Setting<int> jobs{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
    Setting<bool> json_out{false};
    bool show_config = false;
};

template <class T>
void resolve(Setting<T>& s, const CLI::Option* opt, const T& flag_value, const char* env) {
    if (opt->count() > 0) {
        s.value = flag_value;
        s.source = "flag";
        return;
    }
    const char* e = std::getenv(env);
    if (e == nullptr || *e == '\0') return;
    const std::string v = e;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            s.value = v == "1" || v == "true" || v == "yes" || v == "on";
        } else if constexpr (std::is_same_v<T, int>) {
            s.value = std::stoi(v);
        } else {
            s.value = static_cast<T>(std::stoull(v));
        }
    } catch (const std::exception&) {
        throw UsageError(std::string(env) + "='" + v + "' is not a valid value");
    }
    s.source = "env";
}

json config_json(const Globals& g, const std::string& command) {
    const char* simd = std::getenv("THERMKIT_SIMD");
    return {{"command", command},
            {"seed", {{"value", g.seed.value}, {"source", g.seed.source}}},
            {"jobs", {{"value", g.jobs.value}, {"source", g.jobs.source}}},
            {"json", {{"value", g.json_out.value}, {"source", g.json_out.source}}},
            {"simd", {{"value", simd::active_kernels().name}, {"source", simd ? "env" : "default"}}},
            {"material_table", kMaterialTableVersion}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

void emit(const Globals& g, const json& j, const std::string& human) {
    if (g.json_out.value) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << human;
    }
}

PowerAssignment parse_power(const std::string& spec, const PackageStack& stack) {
    if (spec.rfind("random:", 0) == 0) {
        std::uint64_t seed = 0;
        try {
            seed = std::stoull(spec.substr(7));
        } catch (const std::exception&) {
            throw UsageError("--power random:<seed> needs an integer seed, got '" + spec + "'");
        }
        return sample_power(stack, seed);
    }
    std::ifstream in(spec);
    if (!in) throw UsageError("--power must be random:<seed> or a readable JSON file, got '" + spec + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("'" + spec + "' is not valid JSON: " + e.what());
    }
    return power_from_json(j);
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermkit: multi-fidelity thermal toolkit for stacked 3D-IC packages"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed_flag = 0;
    int jobs_flag = 1;
    bool json_flag = false;
    auto* o_seed = app.add_option("--seed", seed_flag, "Random seed (env THERMKIT_SEED)");
    auto* o_jobs = app.add_option("--jobs", jobs_flag, "Worker threads (env THERMKIT_JOBS)")->check(CLI::PositiveNumber);
    auto* o_json = app.add_flag("--json", json_flag, "Machine-readable JSON on stdout (env THERMKIT_JSON)");
    app.add_flag("--show-config", g.show_config, "Print the resolved configuration and exit");

    // gen
    auto* gen = app.add_subcommand("gen", "Write a built-in case as a stack JSON file");
    std::string gen_case, gen_out, gen_units = "mm";
    gen->add_option("--case", gen_case, "Case name")->required()->check(CLI::IsMember(case_names()));
    gen->add_option("--out", gen_out, "Output stack JSON")->required();
    gen->add_option("--units", gen_units, "Length units in the file")->check(CLI::IsMember({"mm", "m"}));

    // homogenize
    auto* hom = app.add_subcommand("homogenize", "Equivalent properties of interconnect layers");
    std::string hom_stack, hom_layer, hom_out;
    hom->add_option("--stack", hom_stack, "Case name or stack JSON")->required();
    hom->add_option("--layer", hom_layer, "Only this layer");
    hom->add_option("--out", hom_out, "Also write the JSON result here");

    // mesh
    auto* msh = app.add_subcommand("mesh", "Build a mesh and report its size");
    std::string msh_stack, msh_fid = "low", msh_dump;
    bool msh_stats = false;
    msh->add_option("--stack", msh_stack, "Case name or stack JSON")->required();
    msh->add_option("--fidelity", msh_fid)->check(CLI::IsMember({"high", "low"}));
    msh->add_flag("--stats", msh_stats, "Print element counts");
    msh->add_option("--dump", msh_dump, "Write a [5, N] tensor of kx, ky, kz, cv, q");

    // solve
    auto* slv = app.add_subcommand("solve", "Steady or transient solve");
    std::string slv_stack, slv_fid = "low", slv_power, slv_out = "solve_out";
    bool slv_transient = false, slv_report = false;
    double slv_t_end = 1.0, slv_dt = 0.0;
    int slv_frames = 5, slv_segments = 1, slv_grid = 32;
    slv->add_option("--stack", slv_stack, "Case name or stack JSON")->required();
    slv->add_option("--fidelity", slv_fid)->check(CLI::IsMember({"high", "low"}));
    slv->add_option("--power", slv_power, "random:<seed> or a power JSON file")->required();
    slv->add_flag("--transient", slv_transient);
    slv->add_option("--t-end", slv_t_end, "s")->check(CLI::PositiveNumber);
    slv->add_option("--dt", slv_dt, "s (0 = automatic)")->check(CLI::NonNegativeNumber);
    slv->add_option("--frames", slv_frames)->check(CLI::Range(2, 100000));
    slv->add_option("--segments", slv_segments, "Power segments for random transient power")
        ->check(CLI::PositiveNumber);
    slv->add_option("--grid", slv_grid, "Observation-plane export size")->check(CLI::PositiveNumber);
    slv->add_option("--out", slv_out, "Output directory");
    slv->add_flag("--report", slv_report, "Print the solve report as JSON");

    // power
    auto* pwr = app.add_subcommand("power", "Sample a per-core power assignment");
    std::string pwr_case, pwr_out;
    int pwr_segments = 1;
    double pwr_t_end = 1.0;
    pwr->add_option("--case", pwr_case, "Case name or stack JSON")->required();
    pwr->add_option("--segments", pwr_segments)->check(CLI::PositiveNumber);
    pwr->add_option("--t-end", pwr_t_end)->check(CLI::PositiveNumber);
    pwr->add_option("--out", pwr_out, "Write JSON here");

    // dataset
    auto* dst = app.add_subcommand("dataset", "Generate a mixed-fidelity dataset");
    dataset::GenerateOptions dopt;
    std::string dst_mode = "steady", dst_out;
    std::vector<int> dst_grid;
    dst->add_option("--case", dopt.case_name)->check(CLI::IsMember(case_names()));
    dst->add_option("--n-high", dopt.n_high)->check(CLI::NonNegativeNumber);
    dst->add_option("--n-low", dopt.n_low)->check(CLI::NonNegativeNumber);
    dst->add_option("--n-val", dopt.n_val, "HF validation samples")->check(CLI::NonNegativeNumber);
    dst->add_option("--n-test", dopt.n_test, "HF test samples")->check(CLI::NonNegativeNumber);
    dst->add_option("--mode", dst_mode)->check(CLI::IsMember({"steady", "transient"}));
    dst->add_option("--grid", dst_grid, "Export grid H W")->expected(2);
    dst->add_option("--frames", dopt.frames)->check(CLI::Range(2, 100000));
    dst->add_option("--t-end", dopt.t_end)->check(CLI::PositiveNumber);
    dst->add_option("--dt", dopt.dt)->check(CLI::NonNegativeNumber);
    dst->add_option("--segments", dopt.segments)->check(CLI::PositiveNumber);
    dst->add_option("--out", dst_out)->required();

    // metrics
    auto* met = app.add_subcommand("metrics", "Compare predicted and true fields");
    std::string met_pred, met_truth, met_baseline;
    met->add_option("--pred", met_pred, "Dataset directory with predictions")->required();
    met->add_option("--truth", met_truth, "Dataset directory with truth")->required();
    met->add_option("--baseline", met_baseline, "Metric report JSON of a baseline (adds improvement ratios)");

    // validate
    auto* val = app.add_subcommand("validate", "Homogenization validation runs");
    val->require_subcommand(1);
    std::string val_case = "ind8c", val_out, val_csv;
    bool val_strict = false;
    int val_cpp = 0, val_z = 0;
    double val_t_end = 1.5, val_dt = 0.01, val_power = 0.2;
    std::vector<double> val_fractions;
    val->add_option("--case", val_case)->check(CLI::IsMember(case_names()));
    val->add_option("--out", val_out, "Report JSON");
    val->add_option("--csv", val_csv, "Also write a CSV table");
    val->add_flag("--strict", val_strict, "Exit 2 when a threshold is missed");
    val->add_option("--cells-per-pitch", val_cpp, "HF cells per pitch (step, sweep)")->check(CLI::PositiveNumber);
    val->add_option("--z-cells", val_z, "Cells per layer in z (step, sweep)")->check(CLI::PositiveNumber);
    val->fallthrough();
    auto* v_step = val->add_subcommand("step", "Step response, HF vs LF");
    v_step->add_option("--t-end", val_t_end)->check(CLI::PositiveNumber);
    v_step->add_option("--dt", val_dt)->check(CLI::PositiveNumber);
    v_step->add_option("--power", val_power, "W over the reference layer")->check(CLI::PositiveNumber);
    auto* v_sweep = val->add_subcommand("sweep", "Steady error against TSV volume fraction");
    v_sweep->add_option("--fractions", val_fractions)->delimiter(',');
    auto* v_cost = val->add_subcommand("cost", "Element count and wall time, HF vs LF");
    v_step->fallthrough();
    v_sweep->fallthrough();
    v_cost->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        resolve(g.seed, o_seed, seed_flag, "THERMKIT_SEED");
        resolve(g.jobs, o_jobs, jobs_flag, "THERMKIT_JOBS");
        resolve(g.json_out, o_json, json_flag, "THERMKIT_JSON");
        if (g.jobs.value < 1) throw UsageError("jobs must be >= 1");

        const auto subs = app.get_subcommands();
        const std::string command = subs.empty() ? "" : subs.front()->get_name();
        if (g.show_config) {
            std::cout << config_json(g, command).dump(2) << '\n';
            return kOk;
        }
        if (subs.empty()) throw UsageError("a subcommand is required (see --help)");

        if (*gen) {
            save_stack(make_case(gen_case), gen_out, gen_units);
            emit(g, {{"case", gen_case}, {"out", gen_out}}, "wrote " + gen_out + "\n");
        } else if (*hom) {
            const PackageStack st = resolve_stack(hom_stack);
            json rows = json::array();
            std::string human;
            for (const Layer& l : st.layers) {
                if (!l.array || (!hom_layer.empty() && l.name != hom_layer)) continue;
                const auto f = emt::volume_fractions(*l.array);
                const auto eq = emt::homogenize_layer(l);
                const bool out_of_range = emt::outside_validated_range(l);
                rows.push_back({{"layer", l.name},
                                {"f_core", f.core},
                                {"f_shell", f.shell},
                                {"f_inclusion", f.inclusion()},
                                {"k_x", eq.k_x},
                                {"k_y", eq.k_y},
                                {"k_z", eq.k_z},
                                {"c_v", eq.c_v},
                                {"outside_validated_range", out_of_range}});
                human += l.name + ": f=" + fmt(f.inclusion(), 4) + " k_xy=" + fmt(eq.k_x) + " k_z=" + fmt(eq.k_z) +
                         " W/(m K) c_v=" + fmt(eq.c_v) + " J/(m^3 K)" + (out_of_range ? " [outside validated range]" : "") +
                         "\n";
            }
            if (!hom_layer.empty() && rows.empty()) {
                throw LookupError("no interconnect layer named '" + hom_layer + "'");
            }
            json j = {{"stack", st.name}, {"layers", rows}};
            if (!hom_out.empty()) write_text(hom_out, j.dump(2) + "\n");
            emit(g, j, human);
        } else if (*msh) {
            const PackageStack st = resolve_stack(msh_stack);
            const VoxelGrid grid = fidelity_from_string(msh_fid) == Fidelity::High ? build_hf_mesh(st) : build_lf_mesh(st);
            json slabs = json::array();
            std::string human = "fidelity " + msh_fid + ", " + std::to_string(grid.size()) + " cells\n";
            for (const Slab& s : grid.slabs) {
                slabs.push_back({{"layer", st.layers[s.layer].name}, {"nx", s.nx}, {"ny", s.ny}, {"nz", s.nz},
                                 {"cells", s.cells()}});
                if (msh_stats) {
                    human += "  " + st.layers[s.layer].name + ": " + std::to_string(s.nx) + " x " + std::to_string(s.ny) +
                             " x " + std::to_string(s.nz) + " = " + std::to_string(s.cells()) + "\n";
                }
            }
            if (!msh_dump.empty()) {
                Tensor t;
                t.dims = {5, grid.size()};
                for (const auto* v : {&grid.kx, &grid.ky, &grid.kz, &grid.cv, &grid.q}) {
                    t.data.insert(t.data.end(), v->begin(), v->end());
                }
                write_tensor(msh_dump, t);
            }
            emit(g, {{"stack", st.name}, {"fidelity", msh_fid}, {"cells", grid.size()}, {"slabs", slabs}}, human);
        } else if (*slv) {
            const PackageStack st = resolve_stack(slv_stack);
            VoxelGrid grid = fidelity_from_string(slv_fid) == Fidelity::High ? build_hf_mesh(st) : build_lf_mesh(st);
            const SparseSystem sys = assemble(grid, st);
            PowerWaveform wave;
            if (slv_transient && slv_power.rfind("random:", 0) == 0) {
                wave = sample_waveform(st, std::stoull(slv_power.substr(7)), slv_segments, slv_t_end);
            } else {
                wave = PowerWaveform::constant(parse_power(slv_power, st));
            }
            stack_total_power(st, wave.segments.front().power);
            const SourceSchedule sched = rasterize_waveform(grid, st, wave);
            std::size_t obs = 0;
            for (std::size_t i = 0; i < st.layers.size(); ++i) {
                if (st.layers[i].is_active()) obs = i;
            }
            std::vector<std::vector<double>> frames;
            std::vector<double> times;
            SolveReport rep;
            if (slv_transient) {
                TransientOptions to;
                to.t_end = slv_t_end;
                to.dt = slv_dt > 0.0 ? slv_dt : default_time_step(grid);
                to.frames = slv_frames;
                to.t_initial = st.ambient;
                auto [res, r] = solve_transient(sys, sched, to);
                rep = r;
                times = res.times;
                for (auto& f : res.frames) frames.push_back(std::move(f.values));
            } else {
                auto [f, r] = solve_steady(sys, sched.q.at(0));
                rep = r;
                times = {0.0};
                frames.push_back(std::move(f.values));
            }
            std::filesystem::create_directories(slv_out);
            Tensor field, plane, tt;
            field.dims = {frames.size(), grid.size()};
            plane.dims = {frames.size(), static_cast<std::uint64_t>(slv_grid), static_cast<std::uint64_t>(slv_grid)};
            tt.dims = {times.size()};
            double t_max = 0.0;
            for (const auto& f : frames) {
                field.data.insert(field.data.end(), f.begin(), f.end());
                const auto p = top_plane(grid, f, obs, slv_grid, slv_grid);
                plane.data.insert(plane.data.end(), p.begin(), p.end());
                for (double v : f) t_max = std::max(t_max, v);
            }
            tt.data.assign(times.begin(), times.end());
            const std::filesystem::path out = slv_out;
            write_tensor(out / "field.tfm", field);
            write_tensor(out / "plane.tfm", plane);
            write_tensor(out / "times.tfm", tt);
            json rj = {{"iterations", rep.iterations},
                       {"relative_residual", rep.relative_residual},
                       {"wall_time_s", rep.wall_time_s},
                       {"energy_defect_w", rep.energy_defect_w},
                       {"steps", rep.steps}};
            json j = {{"stack", st.name},     {"fidelity", slv_fid},      {"cells", grid.size()},
                      {"frames", frames.size()}, {"t_max_k", t_max},        {"out", slv_out},
                      {"observation_layer", st.layers[obs].name}, {"report", rj}};
            if (slv_report) {
                std::cout << rj.dump(2) << '\n';
            } else {
                emit(g, j,
                     std::to_string(grid.size()) + " cells, T_max " + fmt(t_max, 8) + " K, " +
                         std::to_string(rep.iterations) + " iterations, fields in " + slv_out + "\n");
            }
        } else if (*pwr) {
            const PackageStack st = resolve_stack(pwr_case);
            json j;
            if (pwr_segments == 1) {
                j = power_to_json(sample_power(st, g.seed.value));
            } else {
                const PowerWaveform w = sample_waveform(st, g.seed.value, pwr_segments, pwr_t_end);
                json segs = json::array();
                for (const auto& s : w.segments) segs.push_back({{"t_start", s.t_start}, {"power", power_to_json(s.power)}});
                j = {{"seed", g.seed.value}, {"t_end", pwr_t_end}, {"segments", segs}};
            }
            if (!pwr_out.empty()) write_text(pwr_out, j.dump(2) + "\n");
            std::cout << j.dump(2) << '\n';
        } else if (*dst) {
            dopt.mode = dataset::mode_from_string(dst_mode);
            dopt.seed = g.seed.value;
            dopt.jobs = g.jobs.value;
            if (!dst_grid.empty()) {
                dopt.grid_h = dst_grid[0];
                dopt.grid_w = dst_grid[1];
            }
            const json m = dataset::generate(dopt, dst_out);
            json summary = {{"out", dst_out},
                            {"records", m["records"].size()},
                            {"counts", m["counts"]},
                            {"fidelity_gap", m["fidelity_gap"]}};
            emit(g, summary,
                 "wrote " + std::to_string(m["records"].size()) + " records to " + dst_out + " (fidelity gap " +
                     fmt(100.0 * m["fidelity_gap"]["max_rel"].get<double>(), 3) + "%)\n");
        } else if (*met) {
            const auto r = metrics::evaluate_dirs(met_pred, met_truth);
            json j = metrics::to_json(r);
            if (!met_baseline.empty()) {
                std::ifstream in(met_baseline);
                if (!in) throw Error("cannot open '" + met_baseline + "'");
                json b;
                in >> b;
                const auto imp = metrics::improvement(r, metrics::report_from_json(b));
                j["improvement"] = {{"mean", imp.mean.value},
                                    {"mean_infinite", imp.mean.infinite},
                                    {"max", imp.max.value},
                                    {"max_infinite", imp.max.infinite}};
            }
            emit(g, j,
                 "samples " + std::to_string(r.samples) + "\nrmse " + fmt(r.rmse) + " K\nmape " + fmt(r.mape) +
                     " %\npape " + fmt(r.pape) + " %\nmean " + fmt(r.mean_abs) + " K\nmax " + fmt(r.max_abs) + " K\n");
        } else if (*val) {
            json report;
            std::string csv, human;
            bool pass = true;
            auto with_flags = [&](validate::Resolution r) {
                if (val_cpp > 0) r.cells_per_pitch = val_cpp;
                if (val_z > 0) r.z_cells_per_layer = val_z;
                return r;
            };
            if (*v_step) {
                validate::StepConfig cfg;
                cfg.structure.reference_case = val_case;
                cfg.structure.power = val_power;
                cfg.t_end = val_t_end;
                cfg.dt = val_dt;
                cfg.resolution = with_flags(cfg.resolution);
                const auto r = validate::transient_step_check(cfg);
                report = validate::to_json(r);
                pass = r.max_rel_error <= 0.02;
                report["threshold"] = 0.02;
                csv = validate::to_csv(r);
                human = "step: max relative error " + fmt(100.0 * r.max_rel_error, 4) + "% (f_TSV " +
                        fmt(100.0 * r.f_tsv, 4) + "%)\n";
            } else if (*v_sweep) {
                validate::SweepConfig cfg;
                cfg.structure.reference_case = val_case;
                cfg.resolution = with_flags(cfg.resolution);
                cfg.jobs = g.jobs.value;
                if (!val_fractions.empty()) cfg.fractions = val_fractions;
                const auto pts = validate::fraction_sweep(cfg);
                report = validate::to_json(pts);
                for (const auto& p : pts) {
                    if (p.skipped) {
                        human += "f=" + fmt(p.fraction) + ": skipped (" + p.note + ")\n";
                        continue;
                    }
                    const double limit = p.fraction <= 0.20 + 1e-12 ? 0.01 : (p.fraction >= 0.5 - 1e-12 ? 0.05 : 1.0);
                    if (p.error >= limit) pass = false;
                    human += "f=" + fmt(p.fraction) + ": " + fmt(100.0 * p.error, 4) + "%\n";
                }
                csv = validate::to_csv(pts);
            } else {
                validate::CostConfig cfg;
                cfg.case_name = val_case;
                cfg.seed = g.seed.source == "default" ? cfg.seed : g.seed.value;
                const auto r = validate::cost_comparison(cfg);
                report = validate::to_json(r);
                pass = r.element_ratio >= 100.0 && r.speedup >= 10.0 && r.plane_error <= 0.02;
                csv = "hf_cells,lf_cells,element_ratio,hf_wall_s,lf_wall_s,speedup,plane_error\n" +
                      std::to_string(r.hf_cells) + "," + std::to_string(r.lf_cells) + "," + fmt(r.element_ratio, 10) +
                      "," + fmt(r.hf_wall_s, 10) + "," + fmt(r.lf_wall_s, 10) + "," + fmt(r.speedup, 10) + "," +
                      fmt(r.plane_error, 10) + "\n";
                human = "elements " + std::to_string(r.hf_cells) + " / " + std::to_string(r.lf_cells) + " = " +
                        fmt(r.element_ratio, 4) + "x\nwall time " + fmt(r.hf_wall_s, 4) + " s / " +
                        fmt(r.lf_wall_s, 4) + " s = " + fmt(r.speedup, 4) + "x\nobservation-plane error " +
                        fmt(100.0 * r.plane_error, 4) + "%\n";
            }
            report["case"] = val_case;
            report["pass"] = pass;
            if (!val_out.empty()) write_text(val_out, report.dump(2) + "\n");
            if (!val_csv.empty()) write_text(val_csv, csv);
            emit(g, report, human + (pass ? "thresholds met\n" : "thresholds missed\n"));
            if (val_strict && !pass) return kDomain;
        }
        return kOk;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
}
