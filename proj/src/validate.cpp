#include "thermkit/validate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "thermkit/assembly.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/emt.hpp"
#include "thermkit/error.hpp"
#include "thermkit/solver.hpp"

namespace thermkit::validate {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Tall single-column LF systems are nearly one-dimensional; CG on them needs
// about as many iterations as there are cells, more than the default budget.
SteadyOptions generous(std::size_t n) {
    SteadyOptions o;
    o.max_iter = std::max<std::size_t>(4 * n, 10 * default_max_iter(n));
    o.max_iter = std::min<std::size_t>(o.max_iter, std::max<std::size_t>(4 * n, 20000));
    return o;
}

}  // namespace

const Layer& reference_tsv_layer(const PackageStack& stack) {
    for (const Layer& l : stack.layers) {
        if (l.is_active() && l.array && l.array->kind == ArrayKind::Tsv) return l;
    }
    throw GeometryError("stack '" + stack.name + "' has no heated TSV layer");
}

UnitCell build_tsv_structure(const TsvStructure& s) {
    const PackageStack ref = make_case(s.reference_case);
    const Layer& tl = reference_tsv_layer(ref);
    InterconnectArray a = *tl.array;
    const double p = a.pitch;
    if (s.fraction > 0.0) {
        const double ratio = a.r_core / a.r_outer();
        const double r_out = p * std::sqrt(s.fraction / std::numbers::pi);
        if (2.0 * r_out >= p) {
            throw GeometryError("f_TSV = " + std::to_string(s.fraction) +
                                " needs overlapping cylinders (limit pi/4 for a square array)");
        }
        a.r_core = ratio * r_out;
        a.t_shell = r_out - a.r_core;
    }
    if (s.uniform_materials) a.core = a.shell = a.matrix;
    const int cells = a.count_x * a.count_y;
    a.count_x = a.count_y = 1;

    UnitCell u;
    u.f_tsv = std::numbers::pi * a.r_outer() * a.r_outer() / (p * p);
    u.cells_in_layer = cells;
    u.power = s.power / cells;
    PackageStack& st = u.stack;
    st.name = "tsv-structure";
    st.ambient = s.sink.kind == BoundaryCondition::Kind::Adiabatic ? ref.ambient : s.sink.t_ref;
    st.bc_bottom = s.sink;
    st.bc_top = BoundaryCondition::adiabatic();
    Layer below;
    below.name = "below";
    below.thickness = s.neighbor_thickness;
    below.extent_x = below.extent_y = p;
    below.bulk = a.matrix;
    Layer mid = below;
    mid.name = "tsv";
    mid.thickness = tl.thickness;
    mid.array = a;
    mid.power_regions = {{"heater", Rect{0.0, 0.0, p, p}}};
    Layer above = below;
    above.name = "above";
    st.layers = {below, mid, above};
    return u;
}

VoxelGrid structure_hf_mesh(const UnitCell& u, const Resolution& r) {
    const InterconnectArray& a = *u.stack.layers[1].array;
    // Keep at least 2.5 cells across the core radius at small fractions.
    const double cpp = std::max<double>(r.cells_per_pitch, std::ceil(2.5 * a.pitch / a.r_core));
    HfResolution hr;
    hr.cells_per_mm = cpp / to_mm(a.pitch);
    hr.max_cells_per_axis = static_cast<int>(cpp) + 1;
    hr.z_cells_per_layer = r.z_cells_per_layer;
    hr.z_cells_per_mm = 0.0;
    return build_hf_mesh(u.stack, hr);
}

VoxelGrid structure_lf_mesh(const UnitCell& u, const Resolution& r) {
    LfResolution lr;
    lr.cells_per_mm = 1.0 / to_mm(u.stack.layers[1].array->pitch);
    lr.max_cells_per_axis = 1;
    lr.z_cells_per_layer = r.z_cells_per_layer;
    return build_lf_mesh(u.stack, lr);
}

double rise_normalized_error(const VoxelGrid& hf, const std::vector<double>& t_hf, const VoxelGrid& lf,
                             const std::vector<double>& t_lf, double t_inf) {
    const auto r = resample_to(hf, t_hf, lf);
    double diff = 0.0, rise = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        diff = std::max(diff, std::abs(t_lf[i] - r[i]));
        rise = std::max(rise, r[i] - t_inf);
    }
    return rise > 0.0 ? diff / rise : 0.0;
}

StepResult transient_step_check(const StepConfig& cfg) {
    const UnitCell u = build_tsv_structure(cfg.structure);
    const double t_inf = u.stack.ambient;
    VoxelGrid hf = structure_hf_mesh(u, cfg.resolution);
    VoxelGrid lf = structure_lf_mesh(u, cfg.resolution);
    PowerAssignment p;
    p.watts["heater"] = u.power;
    const PowerWaveform wave = PowerWaveform::constant(p);

    TransientOptions to;
    to.t_end = cfg.t_end;
    to.dt = cfg.dt;
    to.frames = 0;
    to.t_initial = t_inf;

    StepResult res;
    res.f_tsv = u.f_tsv;
    res.t_inf = t_inf;
    res.hf_cells = hf.size();
    res.lf_cells = lf.size();

    auto t0 = Clock::now();
    const SparseSystem lsys = assemble(lf, u.stack);
    to.max_iter = generous(lf.size()).max_iter;
    auto [lres, lrep] = solve_transient(lsys, rasterize_waveform(lf, u.stack, wave), to);
    res.lf_wall_s = seconds_since(t0);

    t0 = Clock::now();
    const SparseSystem hsys = assemble(hf, u.stack);
    to.max_iter = 0;
    std::vector<std::vector<float>> hf_steps;
    std::vector<double> step_err;
    std::size_t step = 0;
    auto [hres, hrep] = solve_transient(hsys, rasterize_waveform(hf, u.stack, wave), to,
                                        [&](double, std::span<const double> t) {
                                            ++step;
                                            hf_steps.emplace_back(t.begin(), t.end());
                                            const std::vector<double> th(t.begin(), t.end());
                                            step_err.push_back(rise_normalized_error(
                                                hf, th, lf, lres.frames.at(step).values, t_inf));
                                        });
    res.hf_wall_s = seconds_since(t0);

    const auto& final_hf = hres.frames.back().values;
    const std::size_t probe = static_cast<std::size_t>(
        std::max_element(final_hf.begin(), final_hf.end()) - final_hf.begin());
    // LF cell containing the probe voxel centre: same layer, same z index
    // fraction (z cells match), one cell in-plane.
    const Slab& hs = hf.slab_of(probe);
    const std::size_t local = probe - hs.offset;
    const int kz = static_cast<int>(local / (static_cast<std::size_t>(hs.nx) * hs.ny));
    const Slab& ls = lf.slabs.at(hs.layer);
    const std::size_t lprobe = ls.index(0, 0, std::min(kz * ls.nz / hs.nz, ls.nz - 1));

    res.times = lres.times;
    res.error.push_back(0.0);
    res.probe_hf.push_back(t_inf);
    res.probe_lf.push_back(lres.frames.front().values[lprobe]);
    for (std::size_t s = 0; s < hf_steps.size(); ++s) {
        res.probe_hf.push_back(hf_steps[s][probe]);
        res.probe_lf.push_back(lres.frames[s + 1].values[lprobe]);
        res.error.push_back(step_err[s]);
    }
    res.max_rel_error = *std::max_element(res.error.begin(), res.error.end());
    return res;
}

std::vector<SweepPoint> fraction_sweep(const SweepConfig& cfg) {
    std::vector<double> fr = cfg.fractions;
    std::sort(fr.begin(), fr.end());
    std::vector<SweepPoint> out(fr.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < fr.size(); i = next++) {
            SweepPoint& pt = out[i];
            pt.fraction = fr[i];
            TsvStructure s = cfg.structure;
            s.fraction = fr[i];
            UnitCell u;
            try {
                u = build_tsv_structure(s);
            } catch (const GeometryError& e) {
                pt.skipped = true;
                pt.note = e.what();
                continue;
            }
            const InterconnectArray& a = *u.stack.layers[1].array;
            pt.r_core = a.r_core;
            pt.r_outer = a.r_outer();
            pt.pitch = a.pitch;
            VoxelGrid hf = structure_hf_mesh(u, cfg.resolution);
            VoxelGrid lf = structure_lf_mesh(u, cfg.resolution);
            PowerAssignment p;
            p.watts["heater"] = u.power;
            rasterize_power(hf, u.stack, p);
            rasterize_power(lf, u.stack, p);
            auto [th, rh] = solve_steady(assemble(hf, u.stack), hf.q);
            auto [tl, rl] = solve_steady(assemble(lf, u.stack), lf.q, generous(lf.size()));
            pt.hf_cells = hf.size();
            pt.error = rise_normalized_error(hf, th.values, lf, tl.values, u.stack.ambient);
            pt.rise_k = *std::max_element(th.values.begin(), th.values.end()) - u.stack.ambient;
        }
    };
    const int n = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(fr.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

CostResult cost_comparison(const CostConfig& cfg) {
    const PackageStack stack = make_case(cfg.case_name);
    const PowerAssignment p = sample_power(stack, cfg.seed);
    CostResult r;
    r.case_name = cfg.case_name;
    r.total_power = stack_total_power(stack, p);

    auto t0 = Clock::now();
    VoxelGrid hf = build_hf_mesh(stack, cfg.hf);
    rasterize_power(hf, stack, p);
    const SparseSystem hsys = assemble(hf, stack);
    auto t1 = Clock::now();
    auto [th, hrep] = solve_steady(hsys, hf.q);
    r.hf_solve_s = seconds_since(t1);
    r.hf_wall_s = seconds_since(t0);
    r.hf_iterations = hrep.iterations;

    // The LF pipeline takes milliseconds; keep the fastest of a few runs.
    VoxelGrid lf;
    TemperatureField tl;
    r.lf_wall_s = r.lf_solve_s = 1e300;
    for (int rep = 0; rep < std::max(1, cfg.lf_repeats); ++rep) {
        t0 = Clock::now();
        lf = build_lf_mesh(stack, cfg.lf);
        rasterize_power(lf, stack, p);
        const SparseSystem lsys = assemble(lf, stack);
        t1 = Clock::now();
        auto [field, lrep] = solve_steady(lsys, lf.q);
        r.lf_solve_s = std::min(r.lf_solve_s, seconds_since(t1));
        r.lf_wall_s = std::min(r.lf_wall_s, seconds_since(t0));
        r.lf_iterations = lrep.iterations;
        tl = std::move(field);
    }

    r.hf_cells = hf.size();
    r.lf_cells = lf.size();
    r.element_ratio = static_cast<double>(r.hf_cells) / static_cast<double>(r.lf_cells);
    r.speedup = r.hf_wall_s / r.lf_wall_s;

    const double t_inf = stack.ambient;
    std::size_t obs = 0;
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        if (stack.layers[i].is_active()) obs = i;
    }
    r.observation_layer = stack.layers[obs].name;
    const Slab& ls = lf.slabs[obs];
    const auto ph = top_plane(hf, th.values, obs, ls.ny, ls.nx);
    const auto pl = top_plane(lf, tl.values, obs, ls.ny, ls.nx);
    double diff = 0.0, rise = 0.0;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        diff = std::max(diff, std::abs(pl[i] - ph[i]));
        rise = std::max(rise, ph[i] - t_inf);
    }
    r.plane_error = diff / rise;

    const auto rh = resample_to(hf, th.values, lf);
    const auto vol = lf.cell_volumes();
    double vmax = 0.0, vrise = 0.0, ss = 0.0, vs = 0.0;
    for (std::size_t i = 0; i < rh.size(); ++i) {
        const double d = tl.values[i] - rh[i];
        vmax = std::max(vmax, std::abs(d));
        vrise = std::max(vrise, rh[i] - t_inf);
        ss += d * d * vol[i];
        vs += vol[i];
    }
    r.rise_k = vrise;
    r.volume_max_error = vmax / vrise;
    r.volume_rms_error = std::sqrt(ss / vs) / vrise;
    return r;
}

nlohmann::json to_json(const StepResult& r) {
    return {{"kind", "step"},
            {"f_tsv", r.f_tsv},
            {"t_inf", r.t_inf},
            {"max_rel_error", r.max_rel_error},
            {"hf_cells", r.hf_cells},
            {"lf_cells", r.lf_cells},
            {"hf_wall_s", r.hf_wall_s},
            {"lf_wall_s", r.lf_wall_s},
            {"times", r.times},
            {"probe_hf", r.probe_hf},
            {"probe_lf", r.probe_lf},
            {"error", r.error}};
}

nlohmann::json to_json(const std::vector<SweepPoint>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const SweepPoint& p : pts) {
        nlohmann::json j = {{"fraction", p.fraction}, {"skipped", p.skipped}};
        if (p.skipped) {
            j["note"] = p.note;
        } else {
            j.update({{"error", p.error},
                      {"r_core_m", p.r_core},
                      {"r_outer_m", p.r_outer},
                      {"pitch_m", p.pitch},
                      {"hf_cells", p.hf_cells},
                      {"rise_k", p.rise_k}});
        }
        a.push_back(j);
    }
    return {{"kind", "sweep"}, {"points", a}};
}

nlohmann::json to_json(const CostResult& r) {
    return {{"kind", "cost"},
            {"case", r.case_name},
            {"hf_cells", r.hf_cells},
            {"lf_cells", r.lf_cells},
            {"element_ratio", r.element_ratio},
            {"hf_wall_s", r.hf_wall_s},
            {"lf_wall_s", r.lf_wall_s},
            {"hf_solve_s", r.hf_solve_s},
            {"lf_solve_s", r.lf_solve_s},
            {"speedup", r.speedup},
            {"hf_iterations", r.hf_iterations},
            {"lf_iterations", r.lf_iterations},
            {"total_power_w", r.total_power},
            {"observation_layer", r.observation_layer},
            {"plane_error", r.plane_error},
            {"volume_max_error", r.volume_max_error},
            {"volume_rms_error", r.volume_rms_error},
            {"rise_k", r.rise_k}};
}

std::string to_csv(const StepResult& r) {
    std::ostringstream os;
    os.precision(10);
    os << "t_s,probe_hf_k,probe_lf_k,rel_error\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        os << r.times[i] << ',' << r.probe_hf[i] << ',' << r.probe_lf[i] << ',' << r.error[i] << '\n';
    }
    return os.str();
}

std::string to_csv(const std::vector<SweepPoint>& pts) {
    std::ostringstream os;
    os.precision(10);
    os << "fraction,rel_error,skipped\n";
    for (const SweepPoint& p : pts) os << p.fraction << ',' << (p.skipped ? 0.0 : p.error) << ',' << p.skipped << '\n';
    return os.str();
}

}  // namespace thermkit::validate
