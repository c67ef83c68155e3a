#include "tsp/config.hpp"

#include <fstream>

#include "tsp/error.hpp"

namespace tsp {

StrictObj::StrictObj(const nlohmann::json& j, std::string path)
    : j_(j), path_(std::move(path)) {
  if (!j_.is_object())
    throw ConfigError(path_ + " must be a JSON object");
}

bool StrictObj::has(const std::string& key) const { return j_.contains(key); }

const nlohmann::json& StrictObj::require(const std::string& key) {
  if (!j_.contains(key))
    throw ConfigError("missing key " + path_ + "." + key);
  used_.insert(key);
  return j_.at(key);
}

const nlohmann::json* StrictObj::optional(const std::string& key) {
  if (!j_.contains(key)) return nullptr;
  used_.insert(key);
  return &j_.at(key);
}

void StrictObj::finish() {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key()))
      throw ConfigError("unknown key " + path_ + "." + it.key());
}

template <typename T>
T StrictObj::convert(const nlohmann::json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key " + path + " has the wrong type");
  }
}

template bool StrictObj::convert<bool>(const nlohmann::json&,
                                       const std::string&);
template double StrictObj::convert<double>(const nlohmann::json&,
                                           const std::string&);
template int StrictObj::convert<int>(const nlohmann::json&,
                                     const std::string&);
template std::uint32_t StrictObj::convert<std::uint32_t>(
    const nlohmann::json&, const std::string&);
template std::uint64_t StrictObj::convert<std::uint64_t>(
    const nlohmann::json&, const std::string&);
template std::string StrictObj::convert<std::string>(const nlohmann::json&,
                                                     const std::string&);
template std::vector<double> StrictObj::convert<std::vector<double>>(
    const nlohmann::json&, const std::string&);
template std::vector<int> StrictObj::convert<std::vector<int>>(
    const nlohmann::json&, const std::string&);
template std::vector<std::uint32_t>
StrictObj::convert<std::vector<std::uint32_t>>(const nlohmann::json&,
                                               const std::string&);
template std::vector<std::string> StrictObj::convert<std::vector<std::string>>(
    const nlohmann::json&, const std::string&);

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

std::string canonical_dump(const nlohmann::json& j) { return j.dump(); }

namespace {

TimeAxis parse_axis(const nlohmann::json& j, const std::string& path) {
  StrictObj o(j, path);
  TimeAxis axis;
  axis.bin_count = o.get_or<std::uint32_t>("bin_count", axis.bin_count);
  axis.bin_width_s = o.get_or<double>("bin_width_s", axis.bin_width_s);
  o.finish();
  return axis;
}

PulseModel parse_pulse(const nlohmann::json& j, const std::string& path) {
  StrictObj o(j, path);
  PulseModel pulse;
  pulse.width_fwhm_s = o.get_or<double>("width_fwhm_s", pulse.width_fwhm_s);
  pulse.jitter_fwhm_s =
      o.get_or<double>("jitter_fwhm_s", pulse.jitter_fwhm_s);
  o.finish();
  return pulse;
}

SceneClassSpec parse_class(const nlohmann::json& j, const std::string& path) {
  StrictObj o(j, path);
  SceneClassSpec spec;
  spec.class_id = o.require_as<int>("class_id");
  spec.family = family_from_name(o.require_as<std::string>("family"));
  spec.continuous_reflectivity =
      o.get_or<bool>("continuous_reflectivity", false);
  if (const nlohmann::json* params = o.optional("params")) {
    if (!params->is_object())
      throw ConfigError(path + ".params must be an object");
    for (auto it = params->begin(); it != params->end(); ++it) {
      const auto& v = it.value();
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
          !v[1].is_number())
        throw ConfigError(path + ".params." + it.key() +
                          " must be a [lo, hi] pair");
      spec.params[it.key()] = ParamRange{v[0].get<double>(),
                                         v[1].get<double>()};
    }
  }
  o.finish();
  return spec;
}

std::vector<SceneClassSpec> parse_classes(const nlohmann::json& j,
                                          const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ConfigError(path + " must be a non-empty array");
  std::vector<SceneClassSpec> classes;
  for (std::size_t i = 0; i < j.size(); ++i)
    classes.push_back(
        parse_class(j[i], path + "[" + std::to_string(i) + "]"));
  return classes;
}

SplitSpec parse_split(const nlohmann::json& j, const std::string& path) {
  StrictObj o(j, path);
  SplitSpec spec;
  spec.seed = o.require_as<std::uint64_t>("seed");
  spec.train_frac = o.get_or<double>("train_frac", spec.train_frac);
  spec.val_frac = o.get_or<double>("val_frac", spec.val_frac);
  spec.test_frac = o.get_or<double>("test_frac", spec.test_frac);
  o.finish();
  spec.validate();
  return spec;
}

}  // namespace

DatasetConfig parse_dataset_config(const nlohmann::json& j,
                                   const std::string& path) {
  StrictObj o(j, path);
  DatasetConfig cfg;
  cfg.seed = o.require_as<std::uint64_t>("seed");
  cfg.snr_db = o.require_as<std::vector<double>>("snr_db");
  cfg.samples_per_cell = o.require_as<std::uint32_t>("samples_per_cell");
  cfg.classes = parse_classes(o.require("classes"), path + ".classes");
  cfg.photon_budget = o.get_or<double>("photon_budget", cfg.photon_budget);
  cfg.rep_period_s = o.get_or<double>("rep_period_s", cfg.rep_period_s);
  if (const nlohmann::json* axis = o.optional("axis"))
    cfg.axis = parse_axis(*axis, path + ".axis");
  if (const nlohmann::json* pulse = o.optional("pulse"))
    cfg.pulse = parse_pulse(*pulse, path + ".pulse");
  if (const nlohmann::json* scene = o.optional("scene")) {
    StrictObj s(*scene, path + ".scene");
    cfg.scene_width = s.get_or<std::uint32_t>("width", cfg.scene_width);
    cfg.scene_height = s.get_or<std::uint32_t>("height", cfg.scene_height);
    s.finish();
  }
  o.finish();
  cfg.validate();
  return cfg;
}

GenScenesConfig parse_gen_scenes_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  GenScenesConfig cfg;
  cfg.seed = o.require_as<std::uint64_t>("seed");
  cfg.variants_per_class = o.require_as<std::uint32_t>("variants_per_class");
  cfg.width = o.get_or<std::uint32_t>("width", cfg.width);
  cfg.height = o.get_or<std::uint32_t>("height", cfg.height);
  cfg.classes = parse_classes(o.require("classes"), "config.classes");
  o.finish();
  if (cfg.variants_per_class < 1)
    throw ConfigError("config.variants_per_class must be at least 1");
  return cfg;
}

TrainCommandConfig parse_train_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  TrainCommandConfig cfg;
  cfg.dataset = o.require_as<std::string>("dataset");
  cfg.split = parse_split(o.require("split"), "config.split");
  const std::string model = o.require_as<std::string>("model");
  if (model == "baseline")
    cfg.baseline = true;
  else if (model != "semantic")
    throw ConfigError("config.model must be \"semantic\" or \"baseline\"");
  cfg.labels = o.get_or<std::vector<std::uint32_t>>("labels", {});

  StrictObj t(o.require("train"), "config.train");
  const std::uint64_t seed = t.require_as<std::uint64_t>("seed");
  if (cfg.baseline) {
    cfg.base.seed = seed;
    cfg.base.hidden = t.get_or<std::vector<int>>("hidden", cfg.base.hidden);
    cfg.base.learning_rate =
        t.get_or<double>("learning_rate", cfg.base.learning_rate);
    cfg.base.batch_size = t.get_or<int>("batch_size", cfg.base.batch_size);
    cfg.base.epochs = t.get_or<int>("epochs", cfg.base.epochs);
    cfg.base.validate();
  } else {
    cfg.net.seed = seed;
    cfg.net.latent_dim = t.get_or<int>("latent_dim", cfg.net.latent_dim);
    cfg.net.hidden = t.get_or<std::vector<int>>("hidden", cfg.net.hidden);
    cfg.net.learning_rate =
        t.get_or<double>("learning_rate", cfg.net.learning_rate);
    cfg.net.batch_size = t.get_or<int>("batch_size", cfg.net.batch_size);
    cfg.net.epochs = t.get_or<int>("epochs", cfg.net.epochs);
    cfg.net.beta = t.get_or<double>("beta", cfg.net.beta);
    const std::string rl =
        t.get_or<std::string>("recon_loss", std::string("squared"));
    if (rl == "squared")
      cfg.net.recon_loss = ReconLoss::kSquared;
    else if (rl == "poisson_nll")
      cfg.net.recon_loss = ReconLoss::kPoissonNll;
    else
      throw ConfigError(
          "config.train.recon_loss must be \"squared\" or \"poisson_nll\"");
    cfg.net.validate();
  }
  t.finish();
  o.finish();
  return cfg;
}

SkbBuildConfig parse_skb_build_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  SkbBuildConfig cfg;
  cfg.dataset = o.require_as<std::string>("dataset");
  cfg.model = o.require_as<std::string>("model");
  cfg.split = parse_split(o.require("split"), "config.split");
  cfg.var_floor = o.get_or<double>("var_floor", cfg.var_floor);
  o.finish();
  if (!(cfg.var_floor > 0))
    throw ConfigError("config.var_floor must be positive");
  return cfg;
}

EvalClosedConfig parse_eval_closed_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  EvalClosedConfig cfg;
  cfg.dataset = o.require_as<std::string>("dataset");
  cfg.model = o.require_as<std::string>("model");
  cfg.skb = o.require_as<std::string>("skb");
  cfg.baseline = o.require_as<std::string>("baseline");
  cfg.split = parse_split(o.require("split"), "config.split");
  o.finish();
  return cfg;
}

EvalOpenConfig parse_eval_open_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  EvalOpenConfig cfg;
  cfg.dataset = o.require_as<std::string>("dataset");
  cfg.model = o.require_as<std::string>("model");
  cfg.skb = o.require_as<std::string>("skb");
  cfg.settings.split = parse_split(o.require("split"), "config.split");

  StrictObj p(o.require("protocol"), "config.protocol");
  OpenSetProtocol& proto = cfg.settings.protocol;
  proto.known_labels =
      p.require_as<std::vector<std::uint32_t>>("known_labels");
  proto.unknown_labels =
      p.require_as<std::vector<std::uint32_t>>("unknown_labels");
  proto.order_seed = p.require_as<std::uint64_t>("order_seed");
  proto.tau_target = p.get_or<double>("tau_target", proto.tau_target);
  proto.assign_radius =
      p.get_or<double>("assign_radius", proto.assign_radius);
  proto.maturity = p.get_or<std::uint32_t>("maturity", proto.maturity);
  p.finish();
  proto.validate();

  cfg.settings.run_snr_sweep = o.get_or<bool>("snr_sweep", true);
  cfg.settings.unknown_counts =
      o.get_or<std::vector<std::uint32_t>>("unknown_counts", {});
  o.finish();
  return cfg;
}

PlotConfig parse_plot_config(const nlohmann::json& j) {
  StrictObj o(j, "config");
  PlotConfig cfg;
  for (const std::string& p :
       o.require_as<std::vector<std::string>>("tables"))
    cfg.tables.emplace_back(p);
  o.finish();
  if (cfg.tables.empty())
    throw ConfigError("config.tables must list at least one CSV");
  return cfg;
}

}  // namespace tsp
