#ifndef TSP_EVAL_HPP
#define TSP_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsp/baseline.hpp"
#include "tsp/dataset.hpp"
#include "tsp/net.hpp"
#include "tsp/skb.hpp"
#include "tsp/split.hpp"

namespace tsp {

struct ResultRow {
  std::string method;
  double x = 0.0;  // snr_db or unknown-class count
  double accuracy = 0.0;
  std::uint64_t n = 0;
  std::string config_hash;
};

struct ResultTable {
  std::string x_name;  // "snr_db" or "unknown_count"
  std::vector<ResultRow> rows;
};

// Batched encoder means for the given records.
std::vector<VectorXd> extract_features(const EncoderDecoder& model,
                                       const Dataset& ds,
                                       const std::vector<std::uint32_t>& idx);

struct ClosedEvalResult {
  ResultTable table;  // methods: "semantic", "direct-classifier"
  std::string prediction_log;
};

// Per-SNR test accuracy of the semantic pipeline (feature -> cosine match
// against the SKB) and the direct softmax classifier. Only classes present in
// the SKB are evaluated; the SKB must have been built from validation data.
ClosedEvalResult eval_closed(const Dataset& ds, const EncoderDecoder& model,
                             const Skb& skb,
                             const SoftmaxClassifier& baseline,
                             const Splits& splits,
                             const std::string& config_hash);

struct OpenSetProtocol {
  std::vector<std::uint32_t> known_labels;
  std::vector<std::uint32_t> unknown_labels;  // sweeps take ordered prefixes
  double tau_target = 0.95;
  double assign_radius = 0.15;  // cosine distance for cluster assignment
  std::uint32_t maturity = 20;  // cluster size that triggers promotion
  std::uint64_t order_seed = 0;

  void validate() const;
};

struct OpenLogEntry {
  std::uint32_t record = 0;
  std::uint32_t truth = 0;
  double max_likelihood = 0.0;
  bool decided_known = false;
  int predicted = -1;
  bool correct = false;
};

struct StreamOutcome {
  double accuracy = 0.0;
  double known_accuracy = 0.0;
  double unknown_accuracy = 0.0;
  std::uint64_t n = 0, n_known = 0, n_unknown = 0;
  double tau = 0.0;
  std::vector<OpenLogEntry> log;
  std::vector<PromotedCluster> promoted;
  // self-added class id -> majority truth label of the absorbed members
  std::vector<std::pair<int, std::uint32_t>> cluster_truth_map;
  Skb final_skb{2};
};

// One seeded-random pass over a test stream. Known-class samples score as
// correct when accepted and matched to their class. Unknown-class samples
// score as correct when flagged unknown, or (update on) when matched to a
// self-added entry whose absorbed members map to their class by majority.
// With updates off the SKB is checked to come back byte-identical.
StreamOutcome run_open_stream(const EncoderDecoder& model, const Skb& skb0,
                              const Dataset& ds,
                              const std::vector<std::uint32_t>& stream,
                              const std::vector<VectorXd>& feature_cache,
                              double tau, bool update_on,
                              const OpenSetProtocol& protocol,
                              std::uint64_t order_seed);

struct OpenEvalSettings {
  SplitSpec split;
  OpenSetProtocol protocol;
  bool run_snr_sweep = true;              // one unknown class, all SNR levels
  std::vector<std::uint32_t> unknown_counts;  // count sweep at the top SNR
  std::string config_hash;
};

struct OpenEvalResult {
  ResultTable snr_table;
  ResultTable count_table;
  std::string prediction_log;  // CSV over all settings
  nlohmann::json summary;
};

OpenEvalResult eval_open(const Dataset& ds, const EncoderDecoder& model,
                         const Skb& skb0, const OpenEvalSettings& settings);

}  // namespace tsp

#endif  // TSP_EVAL_HPP
