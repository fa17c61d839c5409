#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "waf/dataset.hpp"
#include "waf/linear_model.hpp"
#include "waf/rng.hpp"

namespace waf {

constexpr std::size_t kDefaultHiddenWidth = 64;
constexpr double kDefaultLearningRate = 1e-2;
constexpr std::size_t kDefaultMaxEpochs = 5000;
constexpr double kDefaultLossTolerance = 1e-8;

// One-hidden-layer ReLU regressor over the same design matrix as the
// linear model. Coefficient extraction has no direct analogue here, so
// attribute effects are read off as gradient attributions instead.
struct MlpModel {
  Matrix w1;  // hidden × inputs
  Vector b1;  // hidden
  Matrix w2;  // outputs × hidden
  Vector b2;  // outputs
  std::size_t n_attributes = 0;
  bool converged = false;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;

  Matrix hidden(const Matrix& X) const {
    return ((X * w1.transpose()).rowwise() + b1.transpose()).cwiseMax(0.0);
  }

  Matrix predict(const Matrix& X) const {
    if (X.cols() != w1.cols())
      throw AuditError("design has " + std::to_string(X.cols()) +
                       " columns, network expects " + std::to_string(w1.cols()));
    return (hidden(X) * w2.transpose()).rowwise() + b2.transpose();
  }

  // Mean input-gradient of each output over the samples:
  //   scores(c, a) = mean_i  d prediction_c / d x_a  at x_i
  // (ReLU subgradient 0 at exactly 0). Same orientation as the linear
  // model's coefficient matrix.
  Matrix attribution_scores(const Matrix& X) const {
    const Matrix h = hidden(X);
    Matrix scores = Matrix::Zero(w2.rows(), w1.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      Matrix gated = w2;  // outputs × hidden, columns zeroed where inactive
      for (Eigen::Index j = 0; j < h.cols(); ++j)
        if (h(i, j) <= 0.0) gated.col(j).setZero();
      scores += gated * w1;
    }
    return scores / static_cast<double>(X.rows());
  }
};

// Full-batch gradient descent on mean squared error plus an L2 penalty on
// the weights (biases unpenalized), matching the linear fit's objective up
// to scale. Stops when the relative loss change drops below `tolerance`;
// otherwise runs max_epochs and reports converged = false with the final
// loss. Initialization is seeded and deterministic.
inline MlpModel fit_mlp(const Matrix& design, const Matrix& targets,
                        std::size_t n_attributes,
                        std::size_t hidden_width = kDefaultHiddenWidth,
                        double lambda = kDefaultRidge, std::uint64_t seed = 0,
                        double learning_rate = kDefaultLearningRate,
                        std::size_t max_epochs = kDefaultMaxEpochs,
                        double tolerance = kDefaultLossTolerance) {
  if (design.rows() != targets.rows())
    throw AuditError("design and target row counts differ");
  if (design.rows() < 1) throw AuditError("need at least one sample");
  if (hidden_width < 1) throw AuditError("hidden width must be positive");
  if (lambda < 0.0) throw AuditError("weight penalty must be non-negative");

  const Eigen::Index n = design.rows();
  const Eigen::Index inputs = design.cols();
  const Eigen::Index outputs = targets.cols();
  const Eigen::Index h = static_cast<Eigen::Index>(hidden_width);

  MlpModel model;
  model.n_attributes = n_attributes;
  SplitMix64 rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_width));
  model.w1.resize(h, inputs);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index a = 0; a < inputs; ++a)
      model.w1(j, a) = rng.uniform(-s1, s1);
  model.w2.resize(outputs, h);
  for (Eigen::Index c = 0; c < outputs; ++c)
    for (Eigen::Index j = 0; j < h; ++j)
      model.w2(c, j) = rng.uniform(-s2, s2);
  model.b1 = Vector::Zero(h);
  model.b2 = Vector::Zero(outputs);

  const double inv_n = 1.0 / static_cast<double>(n);
  double previous_loss = 0.0;
  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    const Matrix hidden = model.hidden(design);
    const Matrix predictions =
        (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();
    const Matrix residual = predictions - targets;
    const double loss =
        residual.squaredNorm() * inv_n +
        lambda * inv_n * (model.w1.squaredNorm() + model.w2.squaredNorm());

    model.epochs_run = epoch + 1;
    model.final_loss = loss;
    if (epoch > 0 &&
        std::abs(previous_loss - loss) <=
            tolerance * std::max(previous_loss, 1e-300)) {
      model.converged = true;
      break;
    }
    previous_loss = loss;

    const Matrix grad_out = 2.0 * inv_n * residual;  // N × outputs
    Matrix grad_hidden = grad_out * model.w2;        // N × hidden
    grad_hidden = (hidden.array() > 0.0).select(grad_hidden, 0.0);

    model.w2 -= learning_rate * (grad_out.transpose() * hidden +
                                 2.0 * lambda * inv_n * model.w2);
    model.b2 -= learning_rate * grad_out.colwise().sum().transpose();
    model.w1 -= learning_rate * (grad_hidden.transpose() * design +
                                 2.0 * lambda * inv_n * model.w1);
    model.b1 -= learning_rate * grad_hidden.colwise().sum().transpose();
  }
  return model;
}

}  // namespace waf
