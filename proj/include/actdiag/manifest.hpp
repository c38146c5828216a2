#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actdiag/tensor_io.hpp"
#include "json.hpp"

namespace actdiag {

inline constexpr const char* kManifestSchema = "actdiag-manifest/1";

struct ManifestLayer {
  std::string name;
  std::filesystem::path path;  // resolved against the manifest's directory
  std::size_t samples = 0;
  std::size_t neurons = 0;
};

/// Index written by an activation exporter: one NPY matrix per captured layer.
struct Manifest {
  std::string model;
  std::vector<ManifestLayer> layers;
  std::uint64_t seed = 0;

  const ManifestLayer& layer(const std::string& name) const;
};

/// Structural parse; throws MalformedReport on schema violations.
Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads one layer and checks it against the declared shape.
ActivationMatrix load_layer(const ManifestLayer& layer);

}  // namespace actdiag
