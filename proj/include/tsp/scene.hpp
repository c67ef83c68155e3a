#ifndef TSP_SCENE_HPP
#define TSP_SCENE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tsp {

// Per-pixel depth (meters, 0 = background) and reflectivity in [0,1].
// Invariant: reflectivity[p] == 0 exactly where depth[p] == 0.
struct DepthReflMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> depth;         // row-major, height*width
  std::vector<float> reflectivity;  // row-major, height*width

  float& depth_at(std::uint32_t x, std::uint32_t y) {
    return depth[static_cast<std::size_t>(y) * width + x];
  }
  float depth_at(std::uint32_t x, std::uint32_t y) const {
    return depth[static_cast<std::size_t>(y) * width + x];
  }
  float& refl_at(std::uint32_t x, std::uint32_t y) {
    return reflectivity[static_cast<std::size_t>(y) * width + x];
  }
  float refl_at(std::uint32_t x, std::uint32_t y) const {
    return reflectivity[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const DepthReflMap&) const = default;
};

// Procedural shape families. Each family realizes a characteristic
// depth-density profile so classes remain distinguishable from the temporal
// histogram alone (silhouette area cancels under normalization).
enum class Family {
  kFlatPlate,      // single depth peak
  kTwoPlate,       // two peaks, weight/gap parameterized
  kRamp,           // uniform plateau between z0 and z0+span
  kSphereCap,      // convex cap: linearly decreasing density
  kPyramid,        // apex-on: linearly increasing density
  kCylinderSide,   // sharp near-edge spike with decaying tail
  kStaircase3,     // three equal-weight steps
  kStaircase5,     // five equal-weight steps
  kAsymWedge,      // two-level decreasing step profile
  kPlatePlusRamp,  // peak plus offset plateau
  kBowl,           // concave cap: linearly increasing toward far edge
  kCross2Depth,    // cross silhouette, arms at two depths
  kNotchedPlate,   // plate with a recessed notch
  kGaussBump,      // back plate with smooth protrusion
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);
std::vector<Family> all_families();

// Closed interval a parameter is drawn from; lo == hi pins the value,
// lo > hi is a configuration error.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
};

// One target class: a shape family plus geometric parameter ranges.
// Ranges not listed fall back to family defaults. Parameter names are
// validated per family (see family_param_names).
struct SceneClassSpec {
  int class_id = 0;
  Family family = Family::kFlatPlate;
  std::map<std::string, ParamRange> params;
  bool continuous_reflectivity = false;  // binary {0,1} by default
};

// Parameter names accepted by a family, with their default ranges.
const std::map<std::string, ParamRange>& family_param_defaults(Family f);

// Deterministic scene synthesis: identical (spec, variant_seed, width,
// height) yields bit-identical maps. Requires width, height >= 8.
DepthReflMap gen_scene(const SceneClassSpec& spec, std::uint64_t variant_seed,
                       std::uint32_t width, std::uint32_t height);

// TSPM map file: magic "TSPM", u16 version=1, u32 width, u32 height,
// then row-major f32 depth grid and f32 reflectivity grid. Little-endian,
// bit-exact round trip.
void save_map(const DepthReflMap& map, const std::filesystem::path& path);
DepthReflMap load_map(const std::filesystem::path& path);

std::vector<char> map_to_bytes(const DepthReflMap& map);
DepthReflMap map_from_bytes(const std::vector<char>& bytes,
                            const std::string& name);

}  // namespace tsp

#endif  // TSP_SCENE_HPP
