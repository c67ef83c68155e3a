#ifndef TSP_BASELINE_HPP
#define TSP_BASELINE_HPP

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "tsp/dataset.hpp"
#include "tsp/mlp.hpp"
#include "tsp/params.hpp"

namespace tsp {

struct BaselineConfig {
  std::vector<int> hidden = {128, 64};  // same trunk widths as the encoder
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;
};

// Direct softmax classifier over normalized histograms, trained with
// cross-entropy. Serves as the comparison method for the semantic pipeline.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier(int input_dim, const std::vector<int>& hidden,
                    std::vector<std::uint32_t> class_labels);

  void init_weights(std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  const std::vector<std::uint32_t>& class_labels() const { return labels_; }

  MatrixXd probabilities(const MatrixXd& x) const;  // classes x batch
  std::uint32_t classify(const VectorXd& x) const;  // ties -> lowest label

  // Mean cross-entropy over the batch; grad gets the analytic gradient.
  double loss(const MatrixXd& x, const std::vector<std::uint32_t>& labels) const;
  double loss_grad(const MatrixXd& x, const std::vector<std::uint32_t>& labels,
                   VectorXd& grad) const;

  VectorXd& flat() { return pack_.flat(); }
  Eigen::Index param_count() const { return pack_.size(); }

  // TSPB checkpoint, same layout conventions as TSPN.
  std::vector<char> to_bytes() const;
  static SoftmaxClassifier from_bytes(const std::vector<char>& bytes,
                                      const std::string& name);
  void save(const std::filesystem::path& path) const;
  static SoftmaxClassifier load(const std::filesystem::path& path);

 private:
  Eigen::Index row_for(std::uint32_t label) const;

  int input_dim_;
  std::vector<int> hidden_;
  std::vector<std::uint32_t> labels_;
  ParamPack pack_;
  TrunkIdx trunk_;
  Eigen::Index w_out_, b_out_;
};

// Deterministic mini-batch Adam training; returns the model and the per-epoch
// mean loss trace.
std::pair<SoftmaxClassifier, std::vector<double>> train_baseline(
    const Dataset& ds, const std::vector<std::uint32_t>& indices,
    const BaselineConfig& cfg);

}  // namespace tsp

#endif  // TSP_BASELINE_HPP
