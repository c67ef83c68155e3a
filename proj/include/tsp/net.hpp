#ifndef TSP_NET_HPP
#define TSP_NET_HPP

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "tsp/dataset.hpp"
#include "tsp/mlp.hpp"
#include "tsp/params.hpp"

namespace tsp {

enum class ReconLoss { kSquared, kPoissonNll };

struct TrainConfig {
  int latent_dim = 16;
  std::vector<int> hidden = {128, 64};
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 200;
  double beta = 1.0;  // weight of the class-conditional KL term
  ReconLoss recon_loss = ReconLoss::kSquared;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double rec = 0.0;
  double kl = 0.0;
};

// L1-normalizes a histogram; rejects all-zero input. Normalization makes the
// downstream feature invariant to the photon budget.
VectorXd normalize_input(const TemporalHistogram& h);

// z = mean + exp(logvar/2) .* eps
VectorXd reparameterize(const VectorXd& mean, const VectorXd& logvar,
                        const VectorXd& eps);

// Probabilistic encoder-decoder over temporal histograms. The encoder maps a
// normalized histogram to (mean, logvar) of a diagonal Gaussian; the decoder
// reconstructs a unit-mass profile from a latent sample; a per-class center
// matrix defines the Gaussian each class is pulled toward by the KL loss.
//
// Batched evaluation: inputs are matrices with one sample per column.
class EncoderDecoder {
 public:
  EncoderDecoder(int input_dim, const std::vector<int>& hidden, int latent_dim,
                 std::vector<std::uint32_t> class_labels);

  void init_weights(std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int latent_dim() const { return latent_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  const std::vector<std::uint32_t>& class_labels() const { return labels_; }
  Eigen::Index center_row(std::uint32_t label) const;
  Eigen::Map<const MatrixXd> centers() const { return pack_.mat(centers_); }

  struct Forward {
    MatrixXd x;
    std::vector<MatrixXd> enc_acts;
    MatrixXd mean, logvar, eps, z;
    std::vector<MatrixXd> dec_acts;
    MatrixXd recon;
  };

  std::pair<MatrixXd, MatrixXd> encode(const MatrixXd& x) const;
  MatrixXd decode(const MatrixXd& z) const;
  Forward forward(const MatrixXd& x, const MatrixXd& eps) const;

  // Batch-mean loss terms; labels must all be in class_labels().
  LossTerms loss(const Forward& f, const std::vector<std::uint32_t>& labels,
                 double beta, ReconLoss rl) const;

  // Analytic gradient of the batch-mean total loss w.r.t. every parameter
  // (encoder, decoder, and class centers). grad is resized to match.
  LossTerms loss_grad(const Forward& f,
                      const std::vector<std::uint32_t>& labels, double beta,
                      ReconLoss rl, VectorXd& grad) const;

  VectorXd& flat() { return pack_.flat(); }
  const VectorXd& flat() const { return pack_.flat(); }
  Eigen::Index param_count() const { return pack_.size(); }

  // TSPN checkpoint: magic, u16 version=1, u32 input_dim, u32 latent_dim,
  // u32 hidden count + sizes, u32 class count + labels, then all tensors as
  // row-major f64 in declaration order.
  std::vector<char> to_bytes() const;
  static EncoderDecoder from_bytes(const std::vector<char>& bytes,
                                   const std::string& name);
  void save(const std::filesystem::path& path) const;
  static EncoderDecoder load(const std::filesystem::path& path);

 private:
  int input_dim_;
  int latent_dim_;
  std::vector<int> hidden_;
  std::vector<std::uint32_t> labels_;
  ParamPack pack_;
  TrunkIdx enc_, dec_;
  Eigen::Index w_mean_, b_mean_, w_logvar_, b_logvar_, w_out_, b_out_,
      centers_;
};

// Encoder mean of the normalized histogram; no latent sampling at inference.
VectorXd extract_feature(const EncoderDecoder& model,
                         const TemporalHistogram& h);

struct TrainTrace {
  std::vector<LossTerms> epochs;
};

// Mini-batch Adam training over the given record indices. Deterministic for
// a fixed (dataset, indices, config): weight init, shuffling, and latent
// noise all derive from cfg.seed. Runs single-threaded so results cannot
// depend on worker count.
std::pair<EncoderDecoder, TrainTrace> train_encoder_decoder(
    const Dataset& ds, const std::vector<std::uint32_t>& indices,
    const TrainConfig& cfg);

// Loss trace CSV: epoch,total,rec,kl
std::string trace_to_csv(const TrainTrace& trace);

}  // namespace tsp

#endif  // TSP_NET_HPP
