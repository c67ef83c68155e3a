#ifndef TSP_MLP_HPP
#define TSP_MLP_HPP

#include <vector>

#include "tsp/params.hpp"
#include "tsp/rng.hpp"

namespace tsp {

// Indices of a tanh affine stack inside a ParamPack. Layer l maps
// sizes[l-1] -> sizes[l] (sizes[-1] being the stack input width) and applies
// tanh to its output.
struct TrunkIdx {
  std::vector<Eigen::Index> w;
  std::vector<Eigen::Index> b;
};

inline TrunkIdx add_trunk(ParamPack& pack, const std::string& prefix,
                          Eigen::Index in_dim,
                          const std::vector<int>& sizes) {
  TrunkIdx idx;
  Eigen::Index prev = in_dim;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    idx.w.push_back(pack.add(prefix + "_w" + std::to_string(l), sizes[l], prev));
    idx.b.push_back(pack.add(prefix + "_b" + std::to_string(l), sizes[l], 1));
    prev = sizes[l];
  }
  return idx;
}

// Forward through the stack; returns the tanh activation of every layer
// (inputs to the next layer / needed for backprop).
inline std::vector<MatrixXd> trunk_forward(const ParamPack& pack,
                                           const TrunkIdx& idx,
                                           const MatrixXd& x) {
  std::vector<MatrixXd> acts;
  acts.reserve(idx.w.size());
  const MatrixXd* in = &x;
  for (std::size_t l = 0; l < idx.w.size(); ++l) {
    MatrixXd a = (pack.mat(idx.w[l]) * (*in)).colwise() +
                 pack.vec(idx.b[l]);
    acts.push_back(a.array().tanh().matrix());
    in = &acts.back();
  }
  return acts;
}

// Backward through the stack. d_top is dL/d(activation of the last layer),
// including summation over the batch (columns). Gradients are accumulated
// into grad (same layout as pack); returns dL/d(stack input).
inline MatrixXd trunk_backward(const ParamPack& pack, const TrunkIdx& idx,
                               const MatrixXd& x,
                               const std::vector<MatrixXd>& acts,
                               MatrixXd d_top, VectorXd& grad) {
  MatrixXd delta = std::move(d_top);
  for (int l = static_cast<int>(idx.w.size()) - 1; l >= 0; --l) {
    // through tanh: a = tanh(pre), da/dpre = 1 - a^2
    delta.array() *= (1.0 - acts[l].array().square());
    const MatrixXd& below = (l == 0) ? x : acts[l - 1];
    pack.mat_in(grad, idx.w[l]).noalias() += delta * below.transpose();
    pack.mat_in(grad, idx.b[l]).noalias() += delta.rowwise().sum();
    delta = (pack.mat(idx.w[l]).transpose() * delta).eval();
  }
  return delta;
}

// Glorot-uniform initialization of one weight tensor; biases stay zero.
inline void glorot_init(Eigen::Map<MatrixXd> w, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-r, r);
}

// Column-wise softmax with max subtraction.
inline MatrixXd softmax_cols(const MatrixXd& logits) {
  MatrixXd p = logits;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    Eigen::VectorXd col = p.col(j);
    const double m = col.maxCoeff();
    col = (col.array() - m).exp();
    p.col(j) = col / col.sum();
  }
  return p;
}

}  // namespace tsp

#endif  // TSP_MLP_HPP
