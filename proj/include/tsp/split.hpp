#ifndef TSP_SPLIT_HPP
#define TSP_SPLIT_HPP

#include <cstdint>
#include <vector>

#include "tsp/dataset.hpp"

namespace tsp {

struct SplitSpec {
  double train_frac = 0.7;
  double val_frac = 0.1;
  double test_frac = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;
};

// Stratified per (class, SNR) cell: each cell is shuffled with its own
// derived seed and cut 7:1:2 (by the configured fractions). Every considered
// record lands in exactly one split; each cell needs at least 10 samples.
// When restrict_labels is non-empty, only those classes are considered.
Splits split_dataset(const Dataset& ds, const SplitSpec& spec,
                     const std::vector<std::uint32_t>& restrict_labels = {});

}  // namespace tsp

#endif  // TSP_SPLIT_HPP
