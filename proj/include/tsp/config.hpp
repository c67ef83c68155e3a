#ifndef TSP_CONFIG_HPP
#define TSP_CONFIG_HPP

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsp/baseline.hpp"
#include "tsp/dataset.hpp"
#include "tsp/eval.hpp"
#include "tsp/net.hpp"
#include "tsp/split.hpp"

namespace tsp {

// Strict accessor over a JSON object: requested keys are tracked and
// finish() rejects anything left over, naming the full key path.
class StrictObj {
 public:
  StrictObj(const nlohmann::json& j, std::string path);

  bool has(const std::string& key) const;
  const nlohmann::json& require(const std::string& key);
  const nlohmann::json* optional(const std::string& key);

  template <typename T>
  T require_as(const std::string& key) {
    return convert<T>(require(key), path_ + "." + key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    const nlohmann::json* j = optional(key);
    if (!j) return fallback;
    return convert<T>(*j, path_ + "." + key);
  }

  void finish();

  const std::string& path() const { return path_; }

  template <typename T>
  static T convert(const nlohmann::json& j, const std::string& path);

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

nlohmann::json load_json_file(const std::filesystem::path& path);

// Canonical dump (sorted keys, minimal whitespace) used for hashing.
std::string canonical_dump(const nlohmann::json& j);

DatasetConfig parse_dataset_config(const nlohmann::json& j,
                                   const std::string& path = "config");

struct GenScenesConfig {
  std::uint64_t seed = 0;
  std::uint32_t width = 32, height = 32;
  std::uint32_t variants_per_class = 4;
  std::vector<SceneClassSpec> classes;
};
GenScenesConfig parse_gen_scenes_config(const nlohmann::json& j);

struct TrainCommandConfig {
  std::filesystem::path dataset;
  SplitSpec split;
  bool baseline = false;
  std::vector<std::uint32_t> labels;  // empty = all
  TrainConfig net;
  BaselineConfig base;
};
TrainCommandConfig parse_train_config(const nlohmann::json& j);

struct SkbBuildConfig {
  std::filesystem::path dataset;
  std::filesystem::path model;
  SplitSpec split;
  double var_floor = kVarFloor;
};
SkbBuildConfig parse_skb_build_config(const nlohmann::json& j);

struct EvalClosedConfig {
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path skb;
  std::filesystem::path baseline;
  SplitSpec split;
};
EvalClosedConfig parse_eval_closed_config(const nlohmann::json& j);

struct EvalOpenConfig {
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path skb;
  OpenEvalSettings settings;
};
EvalOpenConfig parse_eval_open_config(const nlohmann::json& j);

struct PlotConfig {
  std::vector<std::filesystem::path> tables;
};
PlotConfig parse_plot_config(const nlohmann::json& j);

}  // namespace tsp

#endif  // TSP_CONFIG_HPP
