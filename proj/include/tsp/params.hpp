#ifndef TSP_PARAMS_HPP
#define TSP_PARAMS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tsp/error.hpp"

namespace tsp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// All trainable tensors live in one flat vector; named matrix views are
// mapped on top. Keeping parameters flat makes the optimizer, gradient
// containers, finite-difference checks, and serialization uniform.
class ParamPack {
 public:
  struct TensorSpec {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index offset = 0;
  };

  Eigen::Index add(const std::string& name, Eigen::Index rows,
                   Eigen::Index cols) {
    TensorSpec spec{name, rows, cols, total_};
    specs_.push_back(spec);
    total_ += rows * cols;
    return static_cast<Eigen::Index>(specs_.size()) - 1;
  }

  void allocate() { data_ = VectorXd::Zero(total_); }

  Eigen::Map<MatrixXd> mat(Eigen::Index i) {
    const TensorSpec& s = specs_[i];
    return {data_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const MatrixXd> mat(Eigen::Index i) const {
    const TensorSpec& s = specs_[i];
    return {data_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<VectorXd> vec(Eigen::Index i) {
    const TensorSpec& s = specs_[i];
    return {data_.data() + s.offset, s.rows * s.cols};
  }
  Eigen::Map<const VectorXd> vec(Eigen::Index i) const {
    const TensorSpec& s = specs_[i];
    return {data_.data() + s.offset, s.rows * s.cols};
  }

  // Same-layout view over external storage (gradients, moment estimates).
  Eigen::Map<MatrixXd> mat_in(VectorXd& storage, Eigen::Index i) const {
    const TensorSpec& s = specs_[i];
    if (storage.size() != total_)
      throw StateError("parameter storage size mismatch");
    return {storage.data() + s.offset, s.rows, s.cols};
  }

  VectorXd& flat() { return data_; }
  const VectorXd& flat() const { return data_; }
  Eigen::Index size() const { return total_; }
  const std::vector<TensorSpec>& specs() const { return specs_; }

 private:
  std::vector<TensorSpec> specs_;
  Eigen::Index total_ = 0;
  VectorXd data_;
};

// Adam with bias correction; operates on the flat parameter vector.
class AdamState {
 public:
  AdamState(Eigen::Index n, double lr) : lr_(lr) {
    m_ = VectorXd::Zero(n);
    v_ = VectorXd::Zero(n);
  }

  void step(VectorXd& theta, const VectorXd& grad) {
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * grad;
    v_ = kBeta2 * v_.array().matrix() +
         (1.0 - kBeta2) * grad.array().square().matrix();
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    theta.array() -=
        lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  double lr_;
  long t_ = 0;
  VectorXd m_, v_;
};

}  // namespace tsp

#endif  // TSP_PARAMS_HPP
