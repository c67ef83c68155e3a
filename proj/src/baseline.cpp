#include "tsp/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"
#include "tsp/net.hpp"

namespace tsp {

void BaselineConfig::validate() const {
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
}

SoftmaxClassifier::SoftmaxClassifier(int input_dim,
                                     const std::vector<int>& hidden,
                                     std::vector<std::uint32_t> class_labels)
    : input_dim_(input_dim), hidden_(hidden), labels_(std::move(class_labels)) {
  if (input_dim_ < 1) throw ConfigError("input_dim must be positive");
  if (labels_.size() < 2)
    throw ConfigError("classifier needs at least 2 classes");
  if (!std::is_sorted(labels_.begin(), labels_.end()) ||
      std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
    throw ConfigError("class labels must be sorted and unique");

  trunk_ = add_trunk(pack_, "trunk", input_dim_, hidden_);
  const Eigen::Index top = hidden_.empty() ? input_dim_ : hidden_.back();
  w_out_ = pack_.add("w_out", static_cast<Eigen::Index>(labels_.size()), top);
  b_out_ = pack_.add("b_out", static_cast<Eigen::Index>(labels_.size()), 1);
  pack_.allocate();
}

void SoftmaxClassifier::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < pack_.specs().size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (pack_.specs()[i].cols > 1) glorot_init(pack_.mat(idx), rng);
  }
}

Eigen::Index SoftmaxClassifier::row_for(std::uint32_t label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label)
    throw StateError("label " + std::to_string(label) +
                     " is not in the classifier label set");
  return static_cast<Eigen::Index>(it - labels_.begin());
}

MatrixXd SoftmaxClassifier::probabilities(const MatrixXd& x) const {
  if (x.rows() != input_dim_)
    throw ConfigError("classify: input has " + std::to_string(x.rows()) +
                      " rows, expected " + std::to_string(input_dim_));
  const std::vector<MatrixXd> acts = trunk_forward(pack_, trunk_, x);
  const MatrixXd& top = acts.empty() ? x : acts.back();
  MatrixXd logits = (pack_.mat(w_out_) * top).colwise() + pack_.vec(b_out_);
  return softmax_cols(logits);
}

std::uint32_t SoftmaxClassifier::classify(const VectorXd& x) const {
  const MatrixXd p = probabilities(x);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.rows(); ++i)
    if (p(i, 0) > p(best, 0)) best = i;  // strict: ties keep the lowest label
  return labels_[static_cast<std::size_t>(best)];
}

double SoftmaxClassifier::loss(const MatrixXd& x,
                               const std::vector<std::uint32_t>& labels) const {
  const MatrixXd p = probabilities(x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    total -= std::log(std::max(p(row_for(labels[j]), j), 1e-300));
  return total / static_cast<double>(p.cols());
}

double SoftmaxClassifier::loss_grad(const MatrixXd& x,
                                    const std::vector<std::uint32_t>& labels,
                                    VectorXd& grad) const {
  const auto n = x.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw StateError("loss: label count does not match the batch");
  grad = VectorXd::Zero(pack_.size());

  const std::vector<MatrixXd> acts = trunk_forward(pack_, trunk_, x);
  const MatrixXd& top = acts.empty() ? x : acts.back();
  MatrixXd logits = (pack_.mat(w_out_) * top).colwise() + pack_.vec(b_out_);
  MatrixXd p = softmax_cols(logits);

  double total = 0.0;
  MatrixXd dlogits = p;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index r = row_for(labels[j]);
    total -= std::log(std::max(p(r, j), 1e-300));
    dlogits(r, j) -= 1.0;
  }

  pack_.mat_in(grad, w_out_).noalias() += dlogits * top.transpose();
  pack_.mat_in(grad, b_out_).noalias() += dlogits.rowwise().sum();
  MatrixXd d_top = pack_.mat(w_out_).transpose() * dlogits;
  trunk_backward(pack_, trunk_, x, acts, std::move(d_top), grad);

  grad /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

static const char kBaselineMagic[4] = {'T', 'S', 'P', 'B'};
static constexpr std::uint16_t kBaselineVersion = 1;

std::vector<char> SoftmaxClassifier::to_bytes() const {
  BinWriter w;
  w.put_magic(kBaselineMagic);
  w.put<std::uint16_t>(kBaselineVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(input_dim_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hidden_.size()));
  for (int h : hidden_) w.put<std::uint32_t>(static_cast<std::uint32_t>(h));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(labels_.size()));
  for (std::uint32_t l : labels_) w.put<std::uint32_t>(l);
  for (std::size_t i = 0; i < pack_.specs().size(); ++i) {
    const auto m = pack_.mat(static_cast<Eigen::Index>(i));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.put<double>(m(r, c));
  }
  return w.bytes();
}

SoftmaxClassifier SoftmaxClassifier::from_bytes(const std::vector<char>& bytes,
                                                const std::string& name) {
  BinReader r(bytes, name);
  r.expect_magic(kBaselineMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kBaselineVersion)
    throw FormatError(name + ": unsupported baseline version " +
                      std::to_string(version) + " at byte offset 4");
  const auto input_dim = r.get<std::uint32_t>();
  const auto n_hidden = r.get<std::uint32_t>();
  std::vector<int> hidden(n_hidden);
  for (auto& h : hidden) h = static_cast<int>(r.get<std::uint32_t>());
  const auto n_labels = r.get<std::uint32_t>();
  std::vector<std::uint32_t> labels(n_labels);
  for (auto& l : labels) l = r.get<std::uint32_t>();

  SoftmaxClassifier model(static_cast<int>(input_dim), hidden,
                          std::move(labels));
  for (std::size_t i = 0; i < model.pack_.specs().size(); ++i) {
    auto m = model.pack_.mat(static_cast<Eigen::Index>(i));
    for (Eigen::Index rr = 0; rr < m.rows(); ++rr)
      for (Eigen::Index cc = 0; cc < m.cols(); ++cc)
        m(rr, cc) = r.get<double>();
  }
  r.expect_end();
  return model;
}

void SoftmaxClassifier::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_bytes());
}

SoftmaxClassifier SoftmaxClassifier::load(const std::filesystem::path& path) {
  return from_bytes(read_file(path), path.string());
}

std::pair<SoftmaxClassifier, std::vector<double>> train_baseline(
    const Dataset& ds, const std::vector<std::uint32_t>& indices,
    const BaselineConfig& cfg) {
  cfg.validate();
  if (indices.empty()) throw ConfigError("training split is empty");

  std::set<std::uint32_t> label_set;
  for (std::uint32_t i : indices) label_set.insert(ds.records.at(i).label);
  if (label_set.size() < 2)
    throw ConfigError("baseline training needs at least 2 classes");
  std::vector<std::uint32_t> labels(label_set.begin(), label_set.end());

  const auto B = static_cast<Eigen::Index>(ds.axis.bin_count);
  const auto N = static_cast<Eigen::Index>(indices.size());
  MatrixXd X(B, N);
  std::vector<std::uint32_t> y(indices.size());
  for (Eigen::Index j = 0; j < N; ++j) {
    X.col(j) = normalize_input(ds.histogram(indices[j]));
    y[j] = ds.records[indices[j]].label;
  }

  SoftmaxClassifier model(static_cast<int>(B), cfg.hidden, labels);
  model.init_weights(derive_seed(cfg.seed, Stream::kTrainBase, {0}));
  Rng shuffle_rng(derive_seed(cfg.seed, Stream::kTrainBase, {1}));

  AdamState adam(model.param_count(), cfg.learning_rate);
  VectorXd grad;
  std::vector<Eigen::Index> order(indices.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> trace;
  trace.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (Eigen::Index pos = 0; pos < N; pos += cfg.batch_size) {
      const Eigen::Index nb = std::min<Eigen::Index>(cfg.batch_size, N - pos);
      MatrixXd xb(B, nb);
      std::vector<std::uint32_t> yb(nb);
      for (Eigen::Index j = 0; j < nb; ++j) {
        xb.col(j) = X.col(order[pos + j]);
        yb[j] = y[order[pos + j]];
      }
      const double l = model.loss_grad(xb, yb, grad);
      if (!std::isfinite(l))
        throw NumericError("baseline training diverged at epoch " +
                           std::to_string(epoch));
      adam.step(model.flat(), grad);
      epoch_loss += l * static_cast<double>(nb);
    }
    trace.push_back(epoch_loss / static_cast<double>(N));
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace tsp
