#pragma once

#include <map>
#include <string>

namespace thermkit {

/// Isotropic bulk material. `cv()` is always the product rho * cp.
struct Material {
    std::string name;
    double k = 0.0;    // W/(m K)
    double rho = 0.0;  // kg/m^3
    double cp = 0.0;   // J/(kg K)

    double cv() const noexcept { return rho * cp; }
};

inline bool operator==(const Material& a, const Material& b) {
    return a.name == b.name && a.k == b.k && a.rho == b.rho && a.cp == b.cp;
}

/// Version tag of the built-in material table. Bump whenever a constant changes,
/// since every derived reference value in the tests depends on it.
inline constexpr const char* kMaterialTableVersion = "thermkit-materials/1";

/// Built-in materials: Cu, Si, SiO2, solder, underfill, substrate.
const std::map<std::string, Material>& default_materials();

/// Looks up a built-in material; throws LookupError for unknown names.
const Material& default_material(const std::string& name);

}  // namespace thermkit
