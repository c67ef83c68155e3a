#ifndef TSP_MANIFEST_HPP
#define TSP_MANIFEST_HPP

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace tsp {

// Provenance record written beside every command's outputs: the exact config
// (echo + hash), SHA-256 of every input and output artifact, and format
// versions. Contains nothing time- or host-dependent, so identical runs
// produce identical manifests.
struct RunManifest {
  std::string command;
  nlohmann::json config_echo;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  nlohmann::json extra;                        // command-specific payload

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

// Full SHA-256 of the canonical config dump.
std::string config_hash_of(const nlohmann::json& config);
// 16-hex-char prefix used in result tables.
std::string short_hash(const std::string& full_hash);

}  // namespace tsp

#endif  // TSP_MANIFEST_HPP
