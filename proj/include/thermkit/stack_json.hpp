#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "thermkit/stack.hpp"

namespace thermkit {

/// Stack documents (docs/stack-format.md). Lengths are written in the
/// document's declared unit ("mm" or "m"); converted to metres on load.
PackageStack stack_from_json(const nlohmann::json& doc);
nlohmann::json stack_to_json(const PackageStack& stack, const std::string& units = "mm");

PackageStack load_stack(const std::filesystem::path& path);
void save_stack(const PackageStack& stack, const std::filesystem::path& path, const std::string& units = "mm");

/// Built-in case name or path to a stack JSON file.
PackageStack resolve_stack(const std::string& name_or_path);

/// {"cores": {"id": watts, ...}, "seed": n}; a bare object of id -> watts is
/// also accepted.
PowerAssignment power_from_json(const nlohmann::json& doc);
nlohmann::json power_to_json(const PowerAssignment& p);

}  // namespace thermkit
