#include "thermkit/stack_json.hpp"

#include <fstream>
#include <map>

#include "thermkit/bench.hpp"
#include "thermkit/error.hpp"

namespace thermkit {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "thermkit-stack/1";

double unit_scale(const std::string& units) {
    if (units == "mm") return 1e-3;
    if (units == "m") return 1.0;
    throw ParseError("unknown units '" + units + "' (expected \"mm\" or \"m\")");
}

const char* kind_name(ArrayKind k) {
    switch (k) {
        case ArrayKind::Tsv:
            return "tsv";
        case ArrayKind::Microbump:
            return "microbump";
        case ArrayKind::C4:
            return "c4";
    }
    return "tsv";
}

ArrayKind kind_from(const std::string& s) {
    if (s == "tsv") return ArrayKind::Tsv;
    if (s == "microbump") return ArrayKind::Microbump;
    if (s == "c4") return ArrayKind::C4;
    throw ParseError("unknown array kind '" + s + "'");
}

json bc_to_json(const BoundaryCondition& bc) {
    switch (bc.kind) {
        case BoundaryCondition::Kind::Adiabatic:
            return {{"kind", "adiabatic"}};
        case BoundaryCondition::Kind::Convective:
            return {{"kind", "convective"}, {"h", bc.h}, {"t_inf", bc.t_ref}};
        case BoundaryCondition::Kind::Dirichlet:
            return {{"kind", "dirichlet"}, {"t", bc.t_ref}};
    }
    return {};
}

BoundaryCondition bc_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "adiabatic") return BoundaryCondition::adiabatic();
    if (kind == "convective") return BoundaryCondition::convective(j.at("h").get<double>(), j.at("t_inf").get<double>());
    if (kind == "dirichlet") return BoundaryCondition::dirichlet(j.at("t").get<double>());
    throw ParseError("unknown boundary kind '" + kind + "'");
}

json material_to_json(const Material& m) { return {{"k", m.k}, {"rho", m.rho}, {"cp", m.cp}}; }

}  // namespace

nlohmann::json stack_to_json(const PackageStack& stack, const std::string& units) {
    const double inv = 1.0 / unit_scale(units);
    // Materials are emitted once by name; differing definitions under one name are rejected.
    std::map<std::string, Material> mats;
    auto note = [&](const Material& m) {
        auto [it, inserted] = mats.emplace(m.name, m);
        if (!inserted && !(it->second == m)) throw ParseError("two different materials named '" + m.name + "'");
    };
    json layers = json::array();
    for (const Layer& l : stack.layers) {
        note(l.bulk);
        json jl = {{"name", l.name},
                   {"thickness", l.thickness * inv},
                   {"extent", {l.extent_x * inv, l.extent_y * inv}},
                   {"material", l.bulk.name}};
        if (l.array) {
            const InterconnectArray& a = *l.array;
            note(a.core);
            note(a.shell);
            note(a.matrix);
            jl["array"] = {{"kind", kind_name(a.kind)},  {"pitch", a.pitch * inv},
                           {"count", {a.count_x, a.count_y}}, {"r_core", a.r_core * inv},
                           {"t_shell", a.t_shell * inv}, {"core", a.core.name},
                           {"shell", a.shell.name},     {"matrix", a.matrix.name}};
        }
        json cores = json::array();
        for (const CoreRegion& c : l.power_regions) {
            cores.push_back({{"id", c.id}, {"rect", {c.rect.x0 * inv, c.rect.y0 * inv, c.rect.x1 * inv, c.rect.y1 * inv}}});
        }
        if (!cores.empty()) jl["cores"] = cores;
        layers.push_back(jl);
    }
    json jm = json::object();
    for (const auto& [name, m] : mats) jm[name] = material_to_json(m);
    return {{"format", kFormat},
            {"name", stack.name},
            {"units", units},
            {"ambient", stack.ambient},
            {"materials", jm},
            {"bc_top", bc_to_json(stack.bc_top)},
            {"bc_bottom", bc_to_json(stack.bc_bottom)},
            {"layers", layers}};
}

PackageStack stack_from_json(const nlohmann::json& doc) {
    try {
        if (doc.contains("format") && doc.at("format").get<std::string>() != kFormat) {
            throw ParseError("unsupported stack format '" + doc.at("format").get<std::string>() + "'");
        }
        const double s = unit_scale(doc.at("units").get<std::string>());
        std::map<std::string, Material> mats;
        for (const auto& [name, m] : default_materials()) mats[name] = m;
        if (doc.contains("materials")) {
            for (const auto& [name, jm] : doc.at("materials").items()) {
                mats[name] = Material{name, jm.at("k").get<double>(), jm.at("rho").get<double>(), jm.at("cp").get<double>()};
            }
        }
        auto mat = [&](const json& j) {
            const std::string name = j.get<std::string>();
            auto it = mats.find(name);
            if (it == mats.end()) throw ParseError("unknown material '" + name + "'");
            return it->second;
        };

        PackageStack st;
        st.name = doc.value("name", std::string("custom"));
        st.ambient = doc.value("ambient", 293.15);
        st.bc_top = bc_from_json(doc.at("bc_top"));
        st.bc_bottom = bc_from_json(doc.at("bc_bottom"));
        for (const json& jl : doc.at("layers")) {
            Layer l;
            l.name = jl.at("name").get<std::string>();
            l.thickness = jl.at("thickness").get<double>() * s;
            l.extent_x = jl.at("extent").at(0).get<double>() * s;
            l.extent_y = jl.at("extent").at(1).get<double>() * s;
            l.bulk = mat(jl.at("material"));
            if (jl.contains("array")) {
                const json& ja = jl.at("array");
                InterconnectArray a;
                a.kind = kind_from(ja.at("kind").get<std::string>());
                a.pitch = ja.at("pitch").get<double>() * s;
                a.count_x = ja.at("count").at(0).get<int>();
                a.count_y = ja.at("count").at(1).get<int>();
                a.r_core = ja.at("r_core").get<double>() * s;
                a.t_shell = ja.value("t_shell", 0.0) * s;
                a.core = mat(ja.at("core"));
                a.shell = ja.contains("shell") ? mat(ja.at("shell")) : a.core;
                a.matrix = mat(ja.at("matrix"));
                l.array = a;
            }
            if (jl.contains("cores")) {
                for (const json& jc : jl.at("cores")) {
                    const json& r = jc.at("rect");
                    l.power_regions.push_back({jc.at("id").get<std::string>(),
                                               Rect{r.at(0).get<double>() * s, r.at(1).get<double>() * s,
                                                    r.at(2).get<double>() * s, r.at(3).get<double>() * s}});
                }
            }
            st.layers.push_back(std::move(l));
        }
        return st;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed stack document: ") + e.what());
    }
}

PackageStack load_stack(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open stack file '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return stack_from_json(doc);
}

void save_stack(const PackageStack& stack, const std::filesystem::path& path, const std::string& units) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << stack_to_json(stack, units).dump(2) << '\n';
}

PackageStack resolve_stack(const std::string& name_or_path) {
    for (const std::string& n : case_names()) {
        if (n == name_or_path) return make_case(n);
    }
    if (std::filesystem::exists(name_or_path)) return load_stack(name_or_path);
    throw LookupError("'" + name_or_path + "' is neither a built-in case nor a readable stack file");
}

PowerAssignment power_from_json(const nlohmann::json& doc) {
    try {
        PowerAssignment p;
        const json& cores = doc.contains("cores") ? doc.at("cores") : doc;
        for (const auto& [id, w] : cores.items()) {
            if (id == "seed") continue;
            p.watts[id] = w.get<double>();
        }
        if (doc.contains("seed")) p.seed = doc.at("seed").get<std::uint64_t>();
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed power document: ") + e.what());
    }
}

nlohmann::json power_to_json(const PowerAssignment& p) {
    json cores = json::object();
    for (const auto& [id, w] : p.watts) cores[id] = w;
    return {{"cores", cores}, {"seed", p.seed}};
}

}  // namespace thermkit
