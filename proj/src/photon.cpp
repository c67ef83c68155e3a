#include "tsp/photon.hpp"

#include <cmath>
#include <string>

#include "tsp/error.hpp"
#include "tsp/rng.hpp"

namespace tsp {

double PulseModel::kernel_sigma_s() const {
  const double sp = width_fwhm_s * kFwhmToSigma;
  const double sj = jitter_fwhm_s * kFwhmToSigma;
  return std::sqrt(sp * sp + sj * sj);
}

IdealIntensity ideal_intensity(const DepthReflMap& map, const PulseModel& pulse,
                               const TimeAxis& axis) {
  if (pulse.width_fwhm_s <= 0 || pulse.jitter_fwhm_s <= 0)
    throw ConfigError("pulse and jitter widths must be positive");
  if (axis.bin_width_s <= 0 || axis.bin_count < 16)
    throw ConfigError("time axis needs bin_width > 0 and at least 16 bins");

  const double sigma = pulse.kernel_sigma_s();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double t_max = axis.bin_time(axis.bin_count - 1);

  std::vector<double> values(axis.bin_count, 0.0);
  std::size_t target_pixels = 0;

  for (std::uint32_t y = 0; y < map.height; ++y) {
    for (std::uint32_t x = 0; x < map.width; ++x) {
      const double depth = map.depth_at(x, y);
      const double refl = map.refl_at(x, y);
      if (depth == 0.0f) continue;
      const double t_pix = 2.0 * depth / kSpeedOfLight;
      if (t_pix < 0.0 || t_pix > t_max)
        throw ConfigError("pixel (" + std::to_string(x) + "," +
                          std::to_string(y) + ") depth " +
                          std::to_string(depth) +
                          " m maps outside the time axis window");
      ++target_pixels;
      for (std::uint32_t i = 0; i < axis.bin_count; ++i) {
        const double dt = axis.bin_time(i) - t_pix;
        values[i] += refl * std::exp(-dt * dt * inv_two_var);
      }
    }
  }
  if (target_pixels == 0)
    throw ConfigError("map has no target pixels");

  double mass = 0.0;
  for (double v : values) mass += v;
  if (!(mass > 0.0))
    throw NumericError("echo profile has zero mass");
  for (double& v : values) v /= mass;

  return IdealIntensity{axis, std::move(values)};
}

double signal_photons(double snr_db, double budget) {
  return budget - background_photons(snr_db, budget);
}

double background_photons(double snr_db, double budget) {
  const double ratio = std::pow(10.0, snr_db / 10.0);
  return budget / (1.0 + ratio);
}

std::vector<double> expected_rates(const IdealIntensity& s, double snr_db,
                                   double budget) {
  if (!(budget > 0)) throw ConfigError("photon budget must be positive");
  const double n_bg = background_photons(snr_db, budget);
  const double n_sig = budget - n_bg;  // keeps n_sig + n_bg == budget exactly
  const double bg_per_bin = n_bg / static_cast<double>(s.values.size());
  std::vector<double> rates(s.values.size());
  for (std::size_t i = 0; i < rates.size(); ++i)
    rates[i] = n_sig * s.values[i] + bg_per_bin;
  return rates;
}

TemporalHistogram sample_histogram(const IdealIntensity& s, double snr_db,
                                   double budget, std::uint32_t label,
                                   std::uint64_t seed) {
  const std::vector<double> rates = expected_rates(s, snr_db, budget);
  Rng rng(seed);
  TemporalHistogram h;
  h.axis = s.axis;
  h.counts.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i)
    h.counts[i] = static_cast<std::uint32_t>(rng.poisson(rates[i]));
  h.label = label;
  h.snr_db = static_cast<float>(snr_db);
  h.photon_budget = budget;
  h.seed = seed;
  return h;
}

}  // namespace tsp
