#include "tsp/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"
#include "tsp/rng.hpp"

namespace tsp {

namespace {

struct FamilyInfo {
  Family family;
  const char* name;
  // Parameter draw order is part of the determinism contract.
  std::vector<std::pair<std::string, ParamRange>> params;
};

// Depth ranges are sized for the desk axis (256 x 10 ps -> 0.384 m
// unambiguous depth); every family tops out at 0.36 m.
const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> table = {
      {Family::kFlatPlate,
       "flat_plate",
       {{"z0", {0.10, 0.30}},
        {"size", {0.55, 0.95}},
        {"cx", {0.38, 0.62}},
        {"cy", {0.38, 0.62}}}},
      {Family::kTwoPlate,
       "two_plate",
       {{"z0", {0.08, 0.24}},
        {"gap", {0.04, 0.10}},
        {"weight", {0.35, 0.65}},
        {"size", {0.60, 0.95}}}},
      {Family::kRamp,
       "ramp",
       {{"z0", {0.06, 0.20}},
        {"span", {0.06, 0.16}},
        {"orient", {0.0, 1.0}},
        {"size", {0.60, 0.95}}}},
      {Family::kSphereCap,
       "sphere_cap",
       {{"z0", {0.10, 0.24}},
        {"bulge", {0.05, 0.12}},
        {"radius", {0.28, 0.46}}}},
      {Family::kPyramid,
       "pyramid",
       {{"z0", {0.08, 0.22}},
        {"height", {0.06, 0.14}},
        {"size", {0.50, 0.90}}}},
      {Family::kCylinderSide,
       "cylinder_side",
       {{"z0", {0.08, 0.22}},
        {"bulge", {0.06, 0.14}},
        {"radius", {0.25, 0.45}},
        {"hband", {0.60, 0.95}}}},
      {Family::kStaircase3,
       "staircase3",
       {{"z0", {0.06, 0.20}},
        {"step", {0.035, 0.060}},
        {"size", {0.60, 0.95}}}},
      {Family::kStaircase5,
       "staircase5",
       {{"z0", {0.05, 0.16}},
        {"step", {0.030, 0.050}},
        {"size", {0.60, 0.95}}}},
      {Family::kAsymWedge,
       "asym_wedge",
       {{"z0", {0.07, 0.18}},
        {"span_a", {0.02, 0.05}},
        {"span_b", {0.10, 0.18}},
        {"ridge", {0.35, 0.65}},
        {"size", {0.60, 0.95}}}},
      {Family::kPlatePlusRamp,
       "plate_plus_ramp",
       {{"z0", {0.06, 0.12}},
        {"gap", {0.05, 0.10}},
        {"span", {0.08, 0.14}},
        {"weight", {0.30, 0.50}},
        {"size", {0.60, 0.95}}}},
      {Family::kBowl,
       "bowl",
       {{"z0", {0.10, 0.24}},
        {"bulge", {0.05, 0.12}},
        {"radius", {0.28, 0.46}}}},
      {Family::kCross2Depth,
       "cross_2depth",
       {{"z0", {0.08, 0.16}},
        {"gap", {0.12, 0.20}},
        {"arm_w", {0.18, 0.30}},
        {"size", {0.70, 0.95}}}},
      {Family::kNotchedPlate,
       "notched_plate",
       {{"z0", {0.05, 0.08}},
        {"gap", {0.20, 0.28}},
        {"notch", {0.30, 0.50}},
        {"size", {0.60, 0.95}}}},
      {Family::kGaussBump,
       "gauss_bump",
       {{"z0", {0.08, 0.20}},
        {"bulge", {0.06, 0.14}},
        {"sigma", {0.15, 0.30}},
        {"size", {0.60, 0.95}}}},
  };
  return table;
}

const FamilyInfo& info_for(Family f) {
  for (const auto& fi : family_table())
    if (fi.family == f) return fi;
  throw ConfigError("unknown scene family");
}

}  // namespace

const char* family_name(Family f) { return info_for(f).name; }

Family family_from_name(const std::string& name) {
  for (const auto& fi : family_table())
    if (name == fi.name) return fi.family;
  throw ConfigError("unknown scene family \"" + name + "\"");
}

std::vector<Family> all_families() {
  std::vector<Family> out;
  for (const auto& fi : family_table()) out.push_back(fi.family);
  return out;
}

const std::map<std::string, ParamRange>& family_param_defaults(Family f) {
  static std::map<Family, std::map<std::string, ParamRange>> cache;
  auto it = cache.find(f);
  if (it == cache.end()) {
    std::map<std::string, ParamRange> m;
    for (const auto& [name, range] : info_for(f).params) m[name] = range;
    it = cache.emplace(f, std::move(m)).first;
  }
  return it->second;
}

namespace {

struct DrawnParams {
  std::map<std::string, double> v;
  double at(const std::string& k) const { return v.at(k); }
};

DrawnParams draw_params(const SceneClassSpec& spec, Rng& rng) {
  const FamilyInfo& fi = info_for(spec.family);
  for (const auto& [name, range] : spec.params) {
    bool known = false;
    for (const auto& [pname, _] : fi.params) known |= (pname == name);
    if (!known)
      throw ConfigError("class " + std::to_string(spec.class_id) +
                        ": family " + std::string(fi.name) +
                        " has no parameter \"" + name + "\"");
    if (range.lo > range.hi)
      throw ConfigError("class " + std::to_string(spec.class_id) +
                        ": empty parameter range for \"" + name + "\"");
  }
  DrawnParams out;
  for (const auto& [name, def] : fi.params) {
    auto it = spec.params.find(name);
    const ParamRange r = (it == spec.params.end()) ? def : it->second;
    out.v[name] = rng.uniform(r.lo, r.hi);
  }
  return out;
}

// Returns depth in meters at normalized pixel center (u, v), or 0 for
// background.
double family_depth(Family f, const DrawnParams& p, double u, double v) {
  auto in_rect = [&](double cx, double cy, double hx, double hy) {
    return std::abs(u - cx) <= hx && std::abs(v - cy) <= hy;
  };
  switch (f) {
    case Family::kFlatPlate: {
      const double h = p.at("size") / 2;
      return in_rect(p.at("cx"), p.at("cy"), h, h) ? p.at("z0") : 0.0;
    }
    case Family::kTwoPlate: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double su = (u - (0.5 - h)) / p.at("size");
      return su < p.at("weight") ? p.at("z0") : p.at("z0") + p.at("gap");
    }
    case Family::kRamp: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double s = p.at("orient") < 0.5 ? (u - (0.5 - h)) / p.at("size")
                                            : (v - (0.5 - h)) / p.at("size");
      return p.at("z0") + p.at("span") * s;
    }
    case Family::kSphereCap: {
      const double r = p.at("radius");
      const double q2 =
          ((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5)) / (r * r);
      if (q2 > 1.0) return 0.0;
      return p.at("z0") + p.at("bulge") * (1.0 - std::sqrt(1.0 - q2));
    }
    case Family::kPyramid: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double s = std::max(std::abs(u - 0.5), std::abs(v - 0.5)) / h;
      return p.at("z0") + p.at("height") * s;
    }
    case Family::kCylinderSide: {
      const double r = p.at("radius");
      if (std::abs(u - 0.5) > r || std::abs(v - 0.5) > p.at("hband") / 2)
        return 0.0;
      const double q = (u - 0.5) / r;
      return p.at("z0") + p.at("bulge") * (1.0 - std::sqrt(1.0 - q * q));
    }
    case Family::kStaircase3:
    case Family::kStaircase5: {
      const int steps = (f == Family::kStaircase3) ? 3 : 5;
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double su = (u - (0.5 - h)) / p.at("size");
      const int j = std::min(steps - 1, static_cast<int>(su * steps));
      return p.at("z0") + j * p.at("step");
    }
    case Family::kAsymWedge: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double su = (u - (0.5 - h)) / p.at("size");
      const double ridge = p.at("ridge");
      if (su < ridge)
        return p.at("z0") + p.at("span_a") * (ridge - su) / ridge;
      return p.at("z0") + p.at("span_b") * (su - ridge) / (1.0 - ridge);
    }
    case Family::kPlatePlusRamp: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double su = (u - (0.5 - h)) / p.at("size");
      const double w = p.at("weight");
      if (su < w) return p.at("z0");
      return p.at("z0") + p.at("gap") +
             p.at("span") * (su - w) / (1.0 - w);
    }
    case Family::kBowl: {
      const double r = p.at("radius");
      const double q2 =
          ((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5)) / (r * r);
      if (q2 > 1.0) return 0.0;
      return p.at("z0") + p.at("bulge") * std::sqrt(1.0 - q2);
    }
    case Family::kCross2Depth: {
      const double hv = p.at("arm_w") / 2, hs = p.at("size") / 2;
      const bool vert = std::abs(u - 0.5) <= hv && std::abs(v - 0.5) <= hs;
      const bool horz = std::abs(v - 0.5) <= hv && std::abs(u - 0.5) <= hs;
      if (vert) return p.at("z0");  // vertical arm occludes
      if (horz) return p.at("z0") + p.at("gap");
      return 0.0;
    }
    case Family::kNotchedPlate: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double hn = p.at("notch") * h;
      if (in_rect(0.5, 0.5, hn, hn)) return p.at("z0") + p.at("gap");
      return p.at("z0");
    }
    case Family::kGaussBump: {
      const double h = p.at("size") / 2;
      if (!in_rect(0.5, 0.5, h, h)) return 0.0;
      const double s2 = p.at("sigma") * p.at("sigma");
      const double q2 = (u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5);
      return p.at("z0") + p.at("bulge") * (1.0 - std::exp(-q2 / (2 * s2)));
    }
  }
  throw ConfigError("unknown scene family");
}

}  // namespace

DepthReflMap gen_scene(const SceneClassSpec& spec, std::uint64_t variant_seed,
                       std::uint32_t width, std::uint32_t height) {
  if (width < 8 || height < 8)
    throw ConfigError("scene dimensions must be at least 8x8, got " +
                      std::to_string(width) + "x" + std::to_string(height));

  Rng rng(variant_seed);
  const DrawnParams params = draw_params(spec, rng);

  DepthReflMap map;
  map.width = width;
  map.height = height;
  map.depth.assign(static_cast<std::size_t>(width) * height, 0.0f);
  map.reflectivity.assign(static_cast<std::size_t>(width) * height, 0.0f);

  std::size_t target_pixels = 0;
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      const double d = family_depth(spec.family, params, u, v);
      if (d <= 0.0) continue;
      map.depth_at(x, y) = static_cast<float>(d);
      map.refl_at(x, y) =
          spec.continuous_reflectivity
              ? static_cast<float>(rng.uniform(0.25, 1.0))
              : 1.0f;
      ++target_pixels;
    }
  }
  if (target_pixels == 0)
    throw ConfigError("class " + std::to_string(spec.class_id) +
                      ": generated scene has no target pixels");
  return map;
}

static const char kMapMagic[4] = {'T', 'S', 'P', 'M'};
static constexpr std::uint16_t kMapVersion = 1;

std::vector<char> map_to_bytes(const DepthReflMap& map) {
  BinWriter w;
  w.put_magic(kMapMagic);
  w.put<std::uint16_t>(kMapVersion);
  w.put<std::uint32_t>(map.width);
  w.put<std::uint32_t>(map.height);
  w.put_bytes(map.depth.data(), map.depth.size() * sizeof(float));
  w.put_bytes(map.reflectivity.data(),
              map.reflectivity.size() * sizeof(float));
  return w.bytes();
}

DepthReflMap map_from_bytes(const std::vector<char>& bytes,
                            const std::string& name) {
  BinReader r(bytes, name);
  r.expect_magic(kMapMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kMapVersion)
    throw FormatError(name + ": unsupported map version " +
                      std::to_string(version) + " at byte offset 4");
  DepthReflMap map;
  map.width = r.get<std::uint32_t>();
  map.height = r.get<std::uint32_t>();
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
  map.depth.resize(n);
  map.reflectivity.resize(n);
  r.get_bytes(map.depth.data(), n * sizeof(float));
  r.get_bytes(map.reflectivity.data(), n * sizeof(float));
  r.expect_end();
  return map;
}

void save_map(const DepthReflMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, map_to_bytes(map));
}

DepthReflMap load_map(const std::filesystem::path& path) {
  return map_from_bytes(read_file(path), path.string());
}

}  // namespace tsp
