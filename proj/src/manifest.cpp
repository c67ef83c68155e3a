#include "tsp/manifest.hpp"

#include "tsp/binio.hpp"
#include "tsp/config.hpp"
#include "tsp/hash.hpp"

namespace tsp {

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs[path.string()] = sha256_file(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs[path.string()] = sha256_file(path);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_echo;
  j["config_hash"] = config_hash;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["versions"] = {
      {"tsplidar", "1.0.0"},
      {"formats",
       {{"tspm", 1}, {"tspd", 1}, {"tspn", 1}, {"tspb", 1}, {"tspk", 1}}}};
  if (!extra.is_null()) j["details"] = extra;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

std::string config_hash_of(const nlohmann::json& config) {
  return sha256_hex(canonical_dump(config));
}

std::string short_hash(const std::string& full_hash) {
  return full_hash.substr(0, 16);
}

}  // namespace tsp
