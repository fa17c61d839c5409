#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "waf/dataset.hpp"

namespace waf {

constexpr double kDefaultRidge = 1e-6;

// Linear map from a design matrix (demographic block first, then any
// selected feature columns) to per-class errors. Row c of `coefficients`
// holds class c's weights in design-column order.
struct WafModel {
  Vector intercepts;    // C
  Matrix coefficients;  // C × (d + k)
  std::size_t n_attributes = 0;
  std::size_t n_features = 0;
  double lambda = 0.0;

  // Attribute-by-class score table: scores(a, c) = coefficients(c, a).
  Matrix waf_scores() const {
    return coefficients.leftCols(static_cast<Eigen::Index>(n_attributes))
        .transpose();
  }

  Matrix predict(const Matrix& design) const {
    if (design.cols() != coefficients.cols())
      throw AuditError("design has " + std::to_string(design.cols()) +
                       " columns, model expects " +
                       std::to_string(coefficients.cols()));
    return (design * coefficients.transpose()).rowwise() +
           intercepts.transpose();
  }
};

// Ridge regression of every target column on the shared design matrix via
// the normal equations (solved with a single LDLT factorization). The
// intercept is never penalized; lambda = 0 reduces to least squares.
inline WafModel fit_linear(const Matrix& design, const Matrix& targets,
                           std::size_t n_attributes,
                           double lambda = kDefaultRidge) {
  if (design.rows() != targets.rows())
    throw AuditError("design and target row counts differ");
  if (design.rows() <= design.cols())
    throw AuditError("need more rows than design columns to fit");
  if (lambda < 0.0) throw AuditError("ridge penalty must be non-negative");
  if (static_cast<Eigen::Index>(n_attributes) > design.cols())
    throw AuditError("attribute count exceeds design width");

  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  Matrix augmented(n, p + 1);
  augmented.col(0).setOnes();
  augmented.rightCols(p) = design;

  Matrix gram = augmented.transpose() * augmented;
  gram.diagonal().tail(p).array() += lambda;

  Eigen::LDLT<Matrix> ldlt(gram);
  const Vector pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success ||
      pivots.minCoeff() <= pivots.maxCoeff() * 1e-12)
    throw AuditError(
        "normal equations are singular (collinear design columns); "
        "refit with a ridge penalty lambda > 0");
  Matrix solution = ldlt.solve(augmented.transpose() * targets);

  WafModel model;
  model.intercepts = solution.row(0).transpose();
  model.coefficients = solution.bottomRows(p).transpose();
  model.n_attributes = n_attributes;
  model.n_features = static_cast<std::size_t>(p) - n_attributes;
  model.lambda = lambda;
  return model;
}

// Per-class mean squared error of predictions against targets.
inline Vector mse_per_class(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() ||
      predictions.cols() != targets.cols())
    throw AuditError("prediction and target shapes differ");
  return (predictions - targets)
             .array()
             .square()
             .colwise()
             .mean()
             .transpose();
}

inline double mse_overall(const Matrix& predictions, const Matrix& targets) {
  return mse_per_class(predictions, targets).mean();
}

// Baseline that predicts each class's mean error regardless of input; its
// per-class MSE equals the target column variances.
inline WafModel mean_regressor(const Matrix& targets, std::size_t n_attributes,
                               std::size_t n_features = 0) {
  WafModel model;
  model.intercepts = targets.colwise().mean().transpose();
  model.coefficients = Matrix::Zero(
      targets.cols(), static_cast<Eigen::Index>(n_attributes + n_features));
  model.n_attributes = n_attributes;
  model.n_features = n_features;
  model.lambda = 0.0;
  return model;
}

}  // namespace waf
