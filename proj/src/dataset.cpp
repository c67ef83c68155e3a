#include "tsp/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"
#include "tsp/rng.hpp"

namespace tsp {

void DatasetConfig::validate() const {
  if (classes.empty()) throw ConfigError("dataset needs at least one class");
  std::set<int> ids;
  for (const auto& c : classes) {
    if (c.class_id < 0)
      throw ConfigError("class ids must be non-negative");
    if (!ids.insert(c.class_id).second)
      throw ConfigError("duplicate class id " + std::to_string(c.class_id));
  }
  if (snr_db.empty()) throw ConfigError("snr list must be non-empty");
  if (samples_per_cell < 1)
    throw ConfigError("samples per cell must be at least 1");
  if (!(photon_budget > 0))
    throw ConfigError("photon budget must be positive");
  if (axis.bin_width_s <= 0 || axis.bin_count < 16)
    throw ConfigError("time axis needs bin_width > 0 and at least 16 bins");
  if (axis.window_s() > rep_period_s)
    throw ConfigError("time axis window exceeds the repetition period");
  if (pulse.width_fwhm_s <= 0 || pulse.jitter_fwhm_s <= 0)
    throw ConfigError("pulse and jitter widths must be positive");
  if (pulse.width_fwhm_s >= axis.window_s() ||
      pulse.jitter_fwhm_s >= axis.window_s())
    throw ConfigError("pulse/jitter width must be smaller than the window");
  if (scene_width < 8 || scene_height < 8)
    throw ConfigError("scene dimensions must be at least 8x8");
}

std::vector<float> Dataset::snr_levels() const {
  std::set<float> s;
  for (const auto& r : records) s.insert(r.snr_db);
  return {s.begin(), s.end()};
}

std::vector<std::uint32_t> Dataset::labels() const {
  std::set<std::uint32_t> s;
  for (const auto& r : records) s.insert(r.label);
  return {s.begin(), s.end()};
}

TemporalHistogram Dataset::histogram(std::size_t index) const {
  const DatasetRecord& r = records.at(index);
  return TemporalHistogram{axis, r.counts, r.label, r.snr_db, r.photon_budget,
                           r.seed};
}

Dataset generate_dataset(const DatasetConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t n_classes = cfg.classes.size();
  const std::size_t n_snr = cfg.snr_db.size();
  const std::size_t n_samples = cfg.samples_per_cell;

  Dataset ds;
  ds.axis = cfg.axis;
  ds.records.resize(n_classes * n_snr * n_samples);

  // One task per (class, sample): the scene and its echo profile are shared
  // across the SNR sweep; each (class, snr, sample) slot is written exactly
  // once, so scheduling cannot affect the result.
  const std::size_t n_tasks = n_classes * n_samples;
  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto run_tasks = [&]() {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks || failed.load()) return;
      const std::size_t ci = task / n_samples;
      const std::size_t k = task % n_samples;
      try {
        const SceneClassSpec& spec = cfg.classes[ci];
        const auto cid = static_cast<std::uint64_t>(spec.class_id);
        const std::uint64_t scene_seed =
            derive_seed(cfg.seed, Stream::kScene, {cid, k});
        const DepthReflMap map =
            gen_scene(spec, scene_seed, cfg.scene_width, cfg.scene_height);
        const IdealIntensity s = ideal_intensity(map, cfg.pulse, cfg.axis);
        for (std::size_t si = 0; si < n_snr; ++si) {
          const std::uint64_t channel_seed =
              derive_seed(cfg.seed, Stream::kChannel, {cid, si, k});
          TemporalHistogram h =
              sample_histogram(s, cfg.snr_db[si], cfg.photon_budget,
                               static_cast<std::uint32_t>(spec.class_id),
                               channel_seed);
          DatasetRecord& rec = ds.records[(ci * n_snr + si) * n_samples + k];
          rec.label = h.label;
          rec.snr_db = h.snr_db;
          rec.photon_budget = h.photon_budget;
          rec.seed = h.seed;
          rec.counts = std::move(h.counts);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error_message = e.what();
        return;
      }
    }
  };

  if (workers <= 1) {
    run_tasks();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run_tasks);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw ConfigError(error_message);
  return ds;
}

static const char kDatasetMagic[4] = {'T', 'S', 'P', 'D'};
static constexpr std::uint16_t kDatasetVersion = 1;

std::vector<char> dataset_to_bytes(const Dataset& ds) {
  BinWriter w;
  w.put_magic(kDatasetMagic);
  w.put<std::uint16_t>(kDatasetVersion);
  w.put<std::uint32_t>(ds.axis.bin_count);
  w.put<double>(ds.axis.bin_width_s);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.records.size()));
  for (const auto& r : ds.records) {
    w.put<std::uint32_t>(r.label);
    w.put<float>(r.snr_db);
    w.put<double>(r.photon_budget);
    w.put<std::uint64_t>(r.seed);
    w.put_bytes(r.counts.data(), r.counts.size() * sizeof(std::uint32_t));
  }
  return w.bytes();
}

Dataset dataset_from_bytes(const std::vector<char>& bytes,
                           const std::string& name) {
  BinReader r(bytes, name);
  r.expect_magic(kDatasetMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kDatasetVersion)
    throw FormatError(name + ": unsupported dataset version " +
                      std::to_string(version) + " at byte offset 4");
  Dataset ds;
  ds.axis.bin_count = r.get<std::uint32_t>();
  ds.axis.bin_width_s = r.get<double>();
  const auto count = r.get<std::uint32_t>();
  ds.records.resize(count);
  for (auto& rec : ds.records) {
    rec.label = r.get<std::uint32_t>();
    rec.snr_db = r.get<float>();
    rec.photon_budget = r.get<double>();
    rec.seed = r.get<std::uint64_t>();
    rec.counts.resize(ds.axis.bin_count);
    r.get_bytes(rec.counts.data(),
                rec.counts.size() * sizeof(std::uint32_t));
  }
  r.expect_end();
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_bytes(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_bytes(read_file(path), path.string());
}

}  // namespace tsp
