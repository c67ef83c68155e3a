#include "tsp/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "tsp/binio.hpp"
#include "tsp/error.hpp"

namespace tsp {

void TrainConfig::validate() const {
  if (latent_dim < 2) throw ConfigError("latent_dim must be at least 2");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (beta < 0) throw ConfigError("beta must be non-negative");
}

VectorXd normalize_input(const TemporalHistogram& h) {
  std::uint64_t total = 0;
  for (std::uint32_t c : h.counts) total += c;
  if (total == 0)
    throw NumericError("empty signal: histogram has zero total count");
  VectorXd x(h.counts.size());
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    x[static_cast<Eigen::Index>(i)] = h.counts[i] * inv;
  return x;
}

VectorXd reparameterize(const VectorXd& mean, const VectorXd& logvar,
                        const VectorXd& eps) {
  if (mean.size() != logvar.size() || mean.size() != eps.size())
    throw StateError("reparameterize: dimension mismatch");
  return mean.array() + (logvar.array() / 2).exp() * eps.array();
}

EncoderDecoder::EncoderDecoder(int input_dim, const std::vector<int>& hidden,
                               int latent_dim,
                               std::vector<std::uint32_t> class_labels)
    : input_dim_(input_dim),
      latent_dim_(latent_dim),
      hidden_(hidden),
      labels_(std::move(class_labels)) {
  if (input_dim_ < 1) throw ConfigError("input_dim must be positive");
  if (latent_dim_ < 2) throw ConfigError("latent_dim must be at least 2");
  if (labels_.empty()) throw ConfigError("class label set must be non-empty");
  if (!std::is_sorted(labels_.begin(), labels_.end()) ||
      std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
    throw ConfigError("class labels must be sorted and unique");

  enc_ = add_trunk(pack_, "enc", input_dim_, hidden_);
  const Eigen::Index enc_top = hidden_.empty() ? input_dim_ : hidden_.back();
  w_mean_ = pack_.add("w_mean", latent_dim_, enc_top);
  b_mean_ = pack_.add("b_mean", latent_dim_, 1);
  w_logvar_ = pack_.add("w_logvar", latent_dim_, enc_top);
  b_logvar_ = pack_.add("b_logvar", latent_dim_, 1);

  std::vector<int> dec_sizes(hidden_.rbegin(), hidden_.rend());
  dec_ = add_trunk(pack_, "dec", latent_dim_, dec_sizes);
  const Eigen::Index dec_top = hidden_.empty() ? latent_dim_ : hidden_.front();
  w_out_ = pack_.add("w_out", input_dim_, dec_top);
  b_out_ = pack_.add("b_out", input_dim_, 1);

  centers_ = pack_.add("centers",
                       static_cast<Eigen::Index>(labels_.size()), latent_dim_);
  pack_.allocate();
}

void EncoderDecoder::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < pack_.specs().size(); ++i) {
    const auto& spec = pack_.specs()[i];
    const auto idx = static_cast<Eigen::Index>(i);
    if (spec.name == "centers") {
      auto c = pack_.mat(idx);
      for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index k = 0; k < c.cols(); ++k)
          c(r, k) = rng.uniform(-0.5, 0.5);
    } else if (spec.cols > 1) {
      glorot_init(pack_.mat(idx), rng);
    }  // biases stay zero
  }
}

Eigen::Index EncoderDecoder::center_row(std::uint32_t label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label)
    throw StateError("label " + std::to_string(label) +
                     " is not in the training label set");
  return static_cast<Eigen::Index>(it - labels_.begin());
}

std::pair<MatrixXd, MatrixXd> EncoderDecoder::encode(const MatrixXd& x) const {
  if (x.rows() != input_dim_)
    throw ConfigError("encode: input has " + std::to_string(x.rows()) +
                      " rows, expected " + std::to_string(input_dim_));
  const std::vector<MatrixXd> acts = trunk_forward(pack_, enc_, x);
  const MatrixXd& top = acts.empty() ? x : acts.back();
  MatrixXd mean = (pack_.mat(w_mean_) * top).colwise() + pack_.vec(b_mean_);
  MatrixXd logvar =
      (pack_.mat(w_logvar_) * top).colwise() + pack_.vec(b_logvar_);
  return {std::move(mean), std::move(logvar)};
}

MatrixXd EncoderDecoder::decode(const MatrixXd& z) const {
  if (z.rows() != latent_dim_)
    throw ConfigError("decode: latent has " + std::to_string(z.rows()) +
                      " rows, expected " + std::to_string(latent_dim_));
  const std::vector<MatrixXd> acts = trunk_forward(pack_, dec_, z);
  const MatrixXd& top = acts.empty() ? z : acts.back();
  MatrixXd logits = (pack_.mat(w_out_) * top).colwise() + pack_.vec(b_out_);
  return softmax_cols(logits);
}

EncoderDecoder::Forward EncoderDecoder::forward(const MatrixXd& x,
                                                const MatrixXd& eps) const {
  Forward f;
  f.x = x;
  f.enc_acts = trunk_forward(pack_, enc_, f.x);
  const MatrixXd& top = f.enc_acts.empty() ? f.x : f.enc_acts.back();
  f.mean = (pack_.mat(w_mean_) * top).colwise() + pack_.vec(b_mean_);
  f.logvar = (pack_.mat(w_logvar_) * top).colwise() + pack_.vec(b_logvar_);
  if (eps.rows() != f.mean.rows() || eps.cols() != f.mean.cols())
    throw StateError("forward: eps shape mismatch");
  f.eps = eps;
  f.z = f.mean.array() + (f.logvar.array() / 2).exp() * f.eps.array();
  f.dec_acts = trunk_forward(pack_, dec_, f.z);
  const MatrixXd& dtop = f.dec_acts.empty() ? f.z : f.dec_acts.back();
  MatrixXd logits = (pack_.mat(w_out_) * dtop).colwise() + pack_.vec(b_out_);
  f.recon = softmax_cols(logits);
  return f;
}

namespace {

constexpr double kTinyProb = 1e-300;

double recon_loss_value(ReconLoss rl, const MatrixXd& recon,
                        const MatrixXd& x) {
  if (rl == ReconLoss::kSquared) return (recon - x).squaredNorm();
  double total = 0.0;
  for (Eigen::Index j = 0; j < recon.cols(); ++j)
    for (Eigen::Index i = 0; i < recon.rows(); ++i) {
      const double p = std::max(recon(i, j), kTinyProb);
      total += recon(i, j) - x(i, j) * std::log(p);
    }
  return total;
}

// dL/dlogits for a softmax output feeding an elementwise loss with
// dL/dp = v:  J^T v = p .* v - p * (p . v)
MatrixXd softmax_backprop(const MatrixXd& p, const MatrixXd& v) {
  MatrixXd d = p.cwiseProduct(v);
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double s = p.col(j).dot(v.col(j));
    d.col(j) -= s * p.col(j);
  }
  return d;
}

MatrixXd recon_loss_dlogits(ReconLoss rl, const MatrixXd& recon,
                            const MatrixXd& x) {
  if (rl == ReconLoss::kSquared)
    return softmax_backprop(recon, 2.0 * (recon - x));
  MatrixXd v = MatrixXd::Ones(recon.rows(), recon.cols()) -
               x.cwiseQuotient(recon.cwiseMax(kTinyProb));
  return softmax_backprop(recon, v);
}

}  // namespace

LossTerms EncoderDecoder::loss(const Forward& f,
                               const std::vector<std::uint32_t>& labels,
                               double beta, ReconLoss rl) const {
  const auto n = f.x.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw StateError("loss: label count does not match the batch");
  const auto c = pack_.mat(centers_);

  double rec = recon_loss_value(rl, f.recon, f.x);
  double kl = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index m = center_row(labels[j]);
    for (Eigen::Index i = 0; i < latent_dim_; ++i) {
      const double lv = f.logvar(i, j);
      const double diff = f.mean(i, j) - c(m, i);
      kl += 0.5 * (std::exp(lv) + diff * diff - 1.0 - lv);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossTerms t;
  t.rec = rec * inv_n;
  t.kl = kl * inv_n;
  t.total = t.rec + beta * t.kl;
  return t;
}

LossTerms EncoderDecoder::loss_grad(const Forward& f,
                                    const std::vector<std::uint32_t>& labels,
                                    double beta, ReconLoss rl,
                                    VectorXd& grad) const {
  const auto n = f.x.cols();
  const LossTerms terms = loss(f, labels, beta, rl);
  grad = VectorXd::Zero(pack_.size());

  // Reconstruction path: softmax output -> decoder trunk -> latent sample.
  MatrixXd dlogits = recon_loss_dlogits(rl, f.recon, f.x);
  const MatrixXd& dtop = f.dec_acts.empty() ? f.z : f.dec_acts.back();
  pack_.mat_in(grad, w_out_).noalias() += dlogits * dtop.transpose();
  pack_.mat_in(grad, b_out_).noalias() += dlogits.rowwise().sum();
  MatrixXd d_dec_top = pack_.mat(w_out_).transpose() * dlogits;
  MatrixXd dz = trunk_backward(pack_, dec_, f.z, f.dec_acts,
                               std::move(d_dec_top), grad);

  // Through z = mean + exp(logvar/2)*eps:
  //   dz/dmean = 1,  dz/dlogvar = (z - mean)/2
  MatrixXd dmean = dz;
  MatrixXd dlogvar = dz.cwiseProduct(0.5 * (f.z - f.mean));

  // Class-conditional KL adds directly to mean/logvar and to the centers.
  const auto c = pack_.mat(centers_);
  auto dc = pack_.mat_in(grad, centers_);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index m = center_row(labels[j]);
    for (Eigen::Index i = 0; i < latent_dim_; ++i) {
      const double diff = f.mean(i, j) - c(m, i);
      dmean(i, j) += beta * diff;
      dlogvar(i, j) += beta * 0.5 * (std::exp(f.logvar(i, j)) - 1.0);
      dc(m, i) -= beta * diff;
    }
  }

  // Encoder heads and trunk.
  const MatrixXd& top = f.enc_acts.empty() ? f.x : f.enc_acts.back();
  pack_.mat_in(grad, w_mean_).noalias() += dmean * top.transpose();
  pack_.mat_in(grad, b_mean_).noalias() += dmean.rowwise().sum();
  pack_.mat_in(grad, w_logvar_).noalias() += dlogvar * top.transpose();
  pack_.mat_in(grad, b_logvar_).noalias() += dlogvar.rowwise().sum();
  MatrixXd d_enc_top = pack_.mat(w_mean_).transpose() * dmean +
                       pack_.mat(w_logvar_).transpose() * dlogvar;
  trunk_backward(pack_, enc_, f.x, f.enc_acts, std::move(d_enc_top), grad);

  grad /= static_cast<double>(n);
  return terms;
}

static const char kNetMagic[4] = {'T', 'S', 'P', 'N'};
static constexpr std::uint16_t kNetVersion = 1;

std::vector<char> EncoderDecoder::to_bytes() const {
  BinWriter w;
  w.put_magic(kNetMagic);
  w.put<std::uint16_t>(kNetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(input_dim_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(latent_dim_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hidden_.size()));
  for (int h : hidden_) w.put<std::uint32_t>(static_cast<std::uint32_t>(h));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(labels_.size()));
  for (std::uint32_t l : labels_) w.put<std::uint32_t>(l);
  for (std::size_t i = 0; i < pack_.specs().size(); ++i) {
    const auto m = pack_.mat(static_cast<Eigen::Index>(i));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index cidx = 0; cidx < m.cols(); ++cidx)
        w.put<double>(m(r, cidx));
  }
  return w.bytes();
}

EncoderDecoder EncoderDecoder::from_bytes(const std::vector<char>& bytes,
                                          const std::string& name) {
  BinReader r(bytes, name);
  r.expect_magic(kNetMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kNetVersion)
    throw FormatError(name + ": unsupported checkpoint version " +
                      std::to_string(version) + " at byte offset 4");
  const auto input_dim = r.get<std::uint32_t>();
  const auto latent_dim = r.get<std::uint32_t>();
  const auto n_hidden = r.get<std::uint32_t>();
  std::vector<int> hidden(n_hidden);
  for (auto& h : hidden) h = static_cast<int>(r.get<std::uint32_t>());
  const auto n_labels = r.get<std::uint32_t>();
  std::vector<std::uint32_t> labels(n_labels);
  for (auto& l : labels) l = r.get<std::uint32_t>();

  EncoderDecoder model(static_cast<int>(input_dim), hidden,
                       static_cast<int>(latent_dim), std::move(labels));
  for (std::size_t i = 0; i < model.pack_.specs().size(); ++i) {
    auto m = model.pack_.mat(static_cast<Eigen::Index>(i));
    for (Eigen::Index rr = 0; rr < m.rows(); ++rr)
      for (Eigen::Index cc = 0; cc < m.cols(); ++cc)
        m(rr, cc) = r.get<double>();
  }
  r.expect_end();
  return model;
}

void EncoderDecoder::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_bytes());
}

EncoderDecoder EncoderDecoder::load(const std::filesystem::path& path) {
  return from_bytes(read_file(path), path.string());
}

VectorXd extract_feature(const EncoderDecoder& model,
                         const TemporalHistogram& h) {
  const VectorXd x = normalize_input(h);
  auto [mean, logvar] = model.encode(x);
  return mean.col(0);
}

std::pair<EncoderDecoder, TrainTrace> train_encoder_decoder(
    const Dataset& ds, const std::vector<std::uint32_t>& indices,
    const TrainConfig& cfg) {
  cfg.validate();
  if (indices.empty()) throw ConfigError("training split is empty");

  std::set<std::uint32_t> label_set;
  for (std::uint32_t i : indices) label_set.insert(ds.records.at(i).label);
  if (label_set.size() < 2)
    throw ConfigError("training split needs at least 2 classes, has " +
                      std::to_string(label_set.size()));
  std::vector<std::uint32_t> labels(label_set.begin(), label_set.end());

  const auto B = static_cast<Eigen::Index>(ds.axis.bin_count);
  const auto N = static_cast<Eigen::Index>(indices.size());
  MatrixXd X(B, N);
  std::vector<std::uint32_t> y(indices.size());
  for (Eigen::Index j = 0; j < N; ++j) {
    X.col(j) = normalize_input(ds.histogram(indices[j]));
    y[j] = ds.records[indices[j]].label;
  }

  EncoderDecoder model(static_cast<int>(B), cfg.hidden, cfg.latent_dim,
                       labels);
  model.init_weights(derive_seed(cfg.seed, Stream::kTrainNet, {0}));
  Rng shuffle_rng(derive_seed(cfg.seed, Stream::kTrainNet, {1}));
  Rng eps_rng(derive_seed(cfg.seed, Stream::kTrainNet, {2}));

  AdamState adam(model.param_count(), cfg.learning_rate);
  VectorXd grad;
  std::vector<Eigen::Index> order(indices.size());
  std::iota(order.begin(), order.end(), 0);

  TrainTrace trace;
  trace.epochs.reserve(cfg.epochs);
  const auto d = static_cast<Eigen::Index>(cfg.latent_dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    LossTerms epoch_terms;
    for (Eigen::Index pos = 0; pos < N; pos += cfg.batch_size) {
      const Eigen::Index nb = std::min<Eigen::Index>(cfg.batch_size, N - pos);
      MatrixXd xb(B, nb);
      std::vector<std::uint32_t> yb(nb);
      for (Eigen::Index j = 0; j < nb; ++j) {
        xb.col(j) = X.col(order[pos + j]);
        yb[j] = y[order[pos + j]];
      }
      MatrixXd eps(d, nb);
      for (Eigen::Index j = 0; j < nb; ++j)
        for (Eigen::Index i = 0; i < d; ++i) eps(i, j) = eps_rng.normal();

      const auto f = model.forward(xb, eps);
      const LossTerms t =
          model.loss_grad(f, yb, cfg.beta, cfg.recon_loss, grad);
      if (!std::isfinite(t.total))
        throw NumericError("training diverged at epoch " +
                           std::to_string(epoch));
      adam.step(model.flat(), grad);
      const double w = static_cast<double>(nb);
      epoch_terms.total += t.total * w;
      epoch_terms.rec += t.rec * w;
      epoch_terms.kl += t.kl * w;
    }
    const double inv = 1.0 / static_cast<double>(N);
    epoch_terms.total *= inv;
    epoch_terms.rec *= inv;
    epoch_terms.kl *= inv;
    trace.epochs.push_back(epoch_terms);
  }
  return {std::move(model), std::move(trace)};
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::ostringstream out;
  out << "epoch,total,rec,kl\n";
  out.precision(17);
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    const auto& t = trace.epochs[e];
    out << e << ',' << t.total << ',' << t.rec << ',' << t.kl << '\n';
  }
  return out.str();
}

}  // namespace tsp
