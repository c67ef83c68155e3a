#ifndef TSP_DATASET_HPP
#define TSP_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tsp/photon.hpp"
#include "tsp/scene.hpp"

namespace tsp {

struct DatasetConfig {
  std::vector<SceneClassSpec> classes;
  std::vector<double> snr_db;        // one histogram cell per (class, snr)
  std::uint32_t samples_per_cell = 100;
  double photon_budget = 2e5;
  TimeAxis axis;
  PulseModel pulse;
  std::uint32_t scene_width = 32;
  std::uint32_t scene_height = 32;
  double rep_period_s = 5e-8;  // 20 MHz repetition
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetRecord {
  std::uint32_t label = 0;
  float snr_db = 0.0f;
  double photon_budget = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> counts;
};

struct Dataset {
  TimeAxis axis;
  std::vector<DatasetRecord> records;

  // Distinct SNR levels present, ascending.
  std::vector<float> snr_levels() const;
  // Distinct labels present, ascending.
  std::vector<std::uint32_t> labels() const;

  TemporalHistogram histogram(std::size_t index) const;
};

// Generates one record per (class, snr, sample), ordered class-major then
// SNR then sample. Record content depends only on the config: the scene
// variant seed is derived from (seed, class_id, sample) and the channel seed
// from (seed, class_id, snr_index, sample), so any worker count produces
// bit-identical output. A sample index shares its scene across SNR levels.
Dataset generate_dataset(const DatasetConfig& cfg, unsigned workers = 1);

// TSPD dataset file: magic "TSPD", u16 version=1, u32 bin_count,
// f64 bin_width_s, u32 record_count, then per record: u32 label, f32 snr_db,
// f64 budget, u64 seed, bin_count x u32 counts.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::vector<char> dataset_to_bytes(const Dataset& ds);
Dataset dataset_from_bytes(const std::vector<char>& bytes,
                           const std::string& name);

}  // namespace tsp

#endif  // TSP_DATASET_HPP
