#ifndef TSP_PHOTON_HPP
#define TSP_PHOTON_HPP

#include <cstdint>
#include <vector>

#include "tsp/scene.hpp"

namespace tsp {

// Nominal speed of light used for depth <-> round-trip-time conversion.
inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

// FWHM -> standard deviation for a Gaussian profile.
inline constexpr double kFwhmToSigma = 0.42466090014400953;  // 1/(2*sqrt(2*ln 2))

// Gaussian laser pulse plus Gaussian detector jitter; the two combine
// analytically into a single kernel of variance sigma_p^2 + sigma_j^2.
struct PulseModel {
  double width_fwhm_s = 10e-12;    // laser pulse FWHM
  double jitter_fwhm_s = 100e-12;  // detector timing jitter FWHM

  double kernel_sigma_s() const;
};

struct TimeAxis {
  double bin_width_s = 10e-12;
  std::uint32_t bin_count = 256;

  double window_s() const { return bin_width_s * bin_count; }
  // Sample point of bin i; a return at exactly i*bin_width peaks in bin i.
  double bin_time(std::uint32_t i) const { return i * bin_width_s; }

  bool operator==(const TimeAxis&) const = default;
};

// Unit-mass expected temporal profile of the echo.
struct IdealIntensity {
  TimeAxis axis;
  std::vector<double> values;  // >= 0, sums to 1 within 1e-9
};

struct TemporalHistogram {
  TimeAxis axis;
  std::vector<std::uint32_t> counts;
  std::uint32_t label = 0;
  float snr_db = 0.0f;
  double photon_budget = 0.0;
  std::uint64_t seed = 0;
};

// Expected echo profile of a scene: each target pixel contributes a Gaussian
// kernel centered at its round-trip time 2*depth/c, weighted by reflectivity;
// the sum is normalized to unit mass.
//
// Errors: a map without target pixels, or a pixel whose round-trip time falls
// outside [0, (bin_count-1)*bin_width], is rejected.
IdealIntensity ideal_intensity(const DepthReflMap& map, const PulseModel& pulse,
                               const TimeAxis& axis);

// Per-bin expected rates for a given SNR and photon budget:
//   rates[i] = n_sig * s[i] + n_bg / bin_count
// with n_sig + n_bg = budget and n_sig/n_bg = 10^(snr_db/10). The SNR is a
// total signal-to-background photon ratio; background is uniform over bins.
std::vector<double> expected_rates(const IdealIntensity& s, double snr_db,
                                   double budget);

double signal_photons(double snr_db, double budget);
double background_photons(double snr_db, double budget);

// Poisson-samples one histogram from the expected rates. Deterministic given
// the seed; the seed is recorded in the result.
TemporalHistogram sample_histogram(const IdealIntensity& s, double snr_db,
                                   double budget, std::uint32_t label,
                                   std::uint64_t seed);

}  // namespace tsp

#endif  // TSP_PHOTON_HPP
