#include "tsp/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "tsp/error.hpp"
#include "tsp/rng.hpp"

namespace tsp {

void SplitSpec::validate() const {
  if (train_frac < 0 || val_frac < 0 || test_frac < 0)
    throw ConfigError("split fractions must be non-negative");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

Splits split_dataset(const Dataset& ds, const SplitSpec& spec,
                     const std::vector<std::uint32_t>& restrict_labels) {
  spec.validate();
  const std::set<std::uint32_t> keep(restrict_labels.begin(),
                                     restrict_labels.end());

  const std::vector<float> levels = ds.snr_levels();
  auto snr_index = [&](float snr) {
    const auto it = std::lower_bound(levels.begin(), levels.end(), snr);
    return static_cast<std::uint64_t>(it - levels.begin());
  };

  // Cells keyed by (label, snr index); indices are collected in record order
  // so the cell contents are canonical before shuffling.
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::vector<std::uint32_t>>
      cells;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (!keep.empty() && !keep.count(r.label)) continue;
    cells[{r.label, snr_index(r.snr_db)}].push_back(
        static_cast<std::uint32_t>(i));
  }
  if (cells.empty()) throw ConfigError("no records selected for splitting");

  Splits out;
  for (auto& [key, indices] : cells) {
    const auto n = indices.size();
    if (n < 10) {
      std::ostringstream msg;
      msg << "split cell (class " << key.first << ", snr "
          << levels[key.second] << " dB) has " << n
          << " samples; need at least 10";
      throw ConfigError(msg.str());
    }
    const auto n_val = static_cast<std::size_t>(
        std::llround(spec.val_frac * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_frac * static_cast<double>(n)));
    if (n_val + n_test >= n)
      throw ConfigError("split fractions leave no training samples");

    Rng rng(derive_seed(spec.seed, Stream::kSplit,
                        {key.first, key.second}));
    rng.shuffle(indices.begin(), indices.end());

    const std::size_t n_train = n - n_val - n_test;
    out.train.insert(out.train.end(), indices.begin(),
                     indices.begin() + n_train);
    out.val.insert(out.val.end(), indices.begin() + n_train,
                   indices.begin() + n_train + n_val);
    out.test.insert(out.test.end(), indices.begin() + n_train + n_val,
                    indices.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace tsp
