#include "actdiag/manifest.hpp"

#include <string_view>

#include "actdiag/error.hpp"

namespace actdiag {

using nlohmann::json;

namespace {

[[noreturn]] void bad_manifest(const std::string& what) {
  throw Error(ErrorKind::MalformedReport, "manifest: " + what);
}

}  // namespace

const ManifestLayer& Manifest::layer(const std::string& name) const {
  for (const auto& l : layers) {
    if (l.name == name) return l;
  }
  bad_manifest("no layer named '" + name + "'");
}

Manifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad_manifest("not an object");
  if (j.value("schema", std::string()) != kManifestSchema) bad_manifest("schema is not " + std::string(kManifestSchema));
  if (!j.contains("layers") || !j["layers"].is_array()) bad_manifest("missing layers array");
  Manifest m;
  try {
    m.model = j.value("model", std::string());
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& l : j["layers"]) {
      ManifestLayer layer;
      layer.name = l.at("name").get<std::string>();
      std::filesystem::path p = l.at("path").get<std::string>();
      layer.path = p.is_absolute() ? p : base_dir / p;
      layer.samples = l.at("samples").get<std::size_t>();
      layer.neurons = l.at("neurons").get<std::size_t>();
      for (const auto& seen : m.layers) {
        if (seen.name == layer.name) bad_manifest("duplicate layer '" + layer.name + "'");
      }
      m.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    bad_manifest(e.what());
  }
  if (m.layers.empty()) bad_manifest("no layers");
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) bad_manifest("not valid JSON: " + path.string());
  return manifest_from_json(j, path.parent_path());
}

ActivationMatrix load_layer(const ManifestLayer& layer) {
  auto m = read_array(layer.path);
  if (m.samples() != layer.samples || m.neurons() != layer.neurons) {
    throw Error(ErrorKind::MalformedReport, "manifest: layer '" + layer.name + "' declares " +
                                                std::to_string(layer.samples) + "x" + std::to_string(layer.neurons) +
                                                " but file holds " + std::to_string(m.samples()) + "x" +
                                                std::to_string(m.neurons()));
  }
  m.source = layer.path.string();
  return m;
}

}  // namespace actdiag
