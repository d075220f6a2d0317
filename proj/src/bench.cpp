#include "thermkit/bench.hpp"

#include <algorithm>

#include "thermkit/error.hpp"

namespace thermkit {

namespace {

// Row-major n_x by n_y partition of a layer footprint into cores.
std::vector<CoreRegion> partition(const std::string& prefix, double ex, double ey, int n_x, int n_y) {
    std::vector<CoreRegion> cores;
    for (int j = 0; j < n_y; ++j) {
        for (int i = 0; i < n_x; ++i) {
            CoreRegion c;
            c.id = prefix + ".c" + std::to_string(j * n_x + i);
            c.rect = Rect{ex * i / n_x, ey * j / n_y, ex * (i + 1) / n_x, ey * (j + 1) / n_y};
            cores.push_back(std::move(c));
        }
    }
    return cores;
}

InterconnectArray tsv_array() {
    InterconnectArray a;
    a.kind = ArrayKind::Tsv;
    a.pitch = mm(0.1);
    a.count_x = a.count_y = 10;
    a.r_core = mm(0.02);
    a.t_shell = mm(0.01);
    a.core = default_material("Cu");
    a.shell = default_material("SiO2");
    a.matrix = default_material("Si");
    return a;
}

InterconnectArray bump_array(ArrayKind kind, double pitch, int count, double r) {
    InterconnectArray a;
    a.kind = kind;
    a.pitch = pitch;
    a.count_x = a.count_y = count;
    a.r_core = r;
    a.t_shell = 0.0;
    a.core = default_material("solder");
    a.shell = default_material("solder");
    a.matrix = default_material("underfill");
    return a;
}

Layer make_layer(std::string name, double thickness, double extent, const Material& bulk) {
    Layer l;
    l.name = std::move(name);
    l.thickness = thickness;
    l.extent_x = l.extent_y = extent;
    l.bulk = bulk;
    return l;
}

PackageStack industrial(const std::string& name, int cores_per_side) {
    PackageStack s;
    s.name = name;
    s.ambient = 293.15;
    s.bc_top = BoundaryCondition::convective(1000.0, 293.15);
    s.bc_bottom = BoundaryCondition::convective(100.0, 293.15);

    const double die = mm(1.0);
    Layer substrate = make_layer("substrate", mm(1.0), mm(10.0), default_material("substrate"));

    Layer c4 = make_layer("c4", mm(0.1), die, default_material("underfill"));
    c4.array = bump_array(ArrayKind::C4, die / 2, 2, mm(0.05));

    Layer base = make_layer("base_die", mm(0.2), die, default_material("Si"));
    base.array = tsv_array();

    Layer bottom = make_layer("bottom_core", mm(0.2), die, default_material("Si"));
    bottom.array = tsv_array();
    bottom.power_regions = partition("bottom_core", die, die, cores_per_side, cores_per_side);

    Layer ubump = make_layer("ubump", mm(0.04), die, default_material("underfill"));
    ubump.array = bump_array(ArrayKind::Microbump, mm(0.1), 10, mm(0.02));

    Layer top = make_layer("top_core", mm(0.2), die, default_material("Si"));
    top.power_regions = partition("top_core", die, die, cores_per_side, cores_per_side);

    s.layers = {substrate, c4, base, bottom, ubump, top};
    return s;
}

// Single die under a copper spreader; convective top, adiabatic bottom.
PackageStack hotspot_like(const std::string& name, int n_x, int n_y) {
    PackageStack s;
    s.name = name;
    s.ambient = 293.15;
    s.bc_top = BoundaryCondition::convective(1000.0, 293.15);
    s.bc_bottom = BoundaryCondition::adiabatic();
    const double die = mm(4.0);
    Layer d = make_layer("die", mm(0.15), die, default_material("Si"));
    d.power_regions = partition("die", die, die, n_x, n_y);
    Layer spreader = make_layer("spreader", mm(0.5), die, default_material("Cu"));
    s.layers = {d, spreader};
    return s;
}

}  // namespace

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names{"ind8c", "ind32c", "hs-like-1c", "hs-like-4c", "hs-like-8c"};
    return names;
}

PackageStack make_case(const std::string& name) {
    if (name == "ind8c") return industrial(name, 2);
    if (name == "ind32c") return industrial(name, 4);
    if (name == "hs-like-1c") return hotspot_like(name, 1, 1);
    if (name == "hs-like-4c") return hotspot_like(name, 2, 2);
    if (name == "hs-like-8c") return hotspot_like(name, 4, 2);
    throw LookupError("unknown case '" + name + "'");
}

PowerAssignment sample_power(const PackageStack& stack, std::uint64_t seed) {
    SplitMix64 rng(seed);
    PowerAssignment p;
    p.seed = seed;
    for (const std::string& id : stack.core_ids()) p.watts[id] = kMaxCorePower * rng.uniform();
    return p;
}

std::size_t PowerWaveform::segment_at(double t) const {
    if (segments.empty()) throw LookupError("empty power waveform");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].t_start <= t) idx = i;
    }
    return idx;
}

PowerWaveform sample_waveform(const PackageStack& stack, std::uint64_t seed, int n_segments, double t_end) {
    if (n_segments < 1) throw Error("n_segments must be >= 1");
    SplitMix64 rng(seed);
    const std::vector<std::string> ids = stack.core_ids();
    PowerWaveform w;
    for (int s = 0; s < n_segments; ++s) {
        PowerWaveform::Segment seg;
        seg.t_start = t_end * s / n_segments;
        seg.power.seed = seed;
        for (const std::string& id : ids) seg.power.watts[id] = kMaxCorePower * rng.uniform();
        w.segments.push_back(std::move(seg));
    }
    return w;
}

}  // namespace thermkit
