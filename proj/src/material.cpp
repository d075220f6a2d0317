#include "thermkit/material.hpp"

#include "thermkit/error.hpp"

namespace thermkit {

namespace {

// Densities are textbook values; cp is chosen so that rho * cp hits the
// tabulated volumetric heat capacity.
Material make(const char* name, double k, double rho, double cv) {
    return Material{name, k, rho, cv / rho};
}

}  // namespace

const std::map<std::string, Material>& default_materials() {
    static const std::map<std::string, Material> table = [] {
        std::map<std::string, Material> t;
        for (const Material& m : {
                 make("Cu", 400.0, 8960.0, 3.45e6),
                 make("Si", 130.0, 2330.0, 1.63e6),
                 make("SiO2", 1.4, 2200.0, 1.63e6),
                 make("solder", 50.0, 7400.0, 1.69e6),
                 make("underfill", 0.5, 1700.0, 1.70e6),
                 make("substrate", 0.8, 1850.0, 1.60e6),
             }) {
            t.emplace(m.name, m);
        }
        return t;
    }();
    return table;
}

const Material& default_material(const std::string& name) {
    const auto& table = default_materials();
    auto it = table.find(name);
    if (it == table.end()) {
        throw LookupError("unknown material '" + name + "'");
    }
    return it->second;
}

}  // namespace thermkit
