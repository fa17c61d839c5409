#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "waf/dataset.hpp"

namespace waf {

// First principal component of a feature matrix: unit-norm loadings, the
// fraction of total variance it explains, and the column means used for
// centering.
struct Pc1Result {
  Vector loadings;
  double explained_variance = 0.0;
  Vector mean;
};

// Regression design: the ±1 demographic block followed by k selected
// embedding columns (centered), plus which embedding dimensions were kept.
struct DesignMatrix {
  Matrix X;
  std::vector<Eigen::Index> selected_dims;
};

// PCA via eigendecomposition of the (N-1)-normalized covariance matrix.
// The loading vector's sign is fixed so its largest-magnitude entry is
// positive (first such entry on ties).
inline Pc1Result pca_first_component(const Matrix& embeddings) {
  if (embeddings.rows() < 2)
    throw AuditError("principal component needs at least 2 rows");
  Pc1Result out;
  out.mean = embeddings.colwise().mean();
  Matrix centered = embeddings.rowwise() - out.mean.transpose();
  Matrix cov = (centered.transpose() * centered) /
               static_cast<double>(embeddings.rows() - 1);
  if (cov.trace() <= 0.0)
    throw AuditError(
        "embedding matrix has zero variance; cannot extract a component");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success)
    throw AuditError("eigendecomposition of the embedding covariance failed");
  // Eigenvalues come out ascending; the top component is the last column.
  const Eigen::Index last = cov.cols() - 1;
  out.loadings = solver.eigenvectors().col(last);
  out.explained_variance = solver.eigenvalues()(last);
  Eigen::Index pivot = 0;
  out.loadings.cwiseAbs().maxCoeff(&pivot);
  if (out.loadings(pivot) < 0.0) out.loadings = -out.loadings;
  return out;
}

// Indices of the k largest-|loading| dimensions, descending magnitude,
// ties broken by ascending index.
inline std::vector<Eigen::Index> select_top_k(const Vector& loadings,
                                              std::size_t k) {
  if (k > static_cast<std::size_t>(loadings.size()))
    throw AuditError("cannot select " + std::to_string(k) + " of " +
                     std::to_string(loadings.size()) + " dimensions");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(loadings.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return std::abs(loadings(a)) > std::abs(loadings(b));
                   });
  order.resize(k);
  return order;
}

// Core assembly from raw matrices; the selected embedding columns are
// centered by the component's column means.
inline DesignMatrix build_design_matrix(const Matrix& demographics,
                                        const Matrix& embeddings,
                                        const Pc1Result& pc1, std::size_t k) {
  if (k > 0 && embeddings.rows() != demographics.rows())
    throw AuditError("demographic and embedding row counts differ");
  DesignMatrix design;
  design.selected_dims = select_top_k(pc1.loadings, k);
  design.X.resize(demographics.rows(),
                  demographics.cols() + static_cast<Eigen::Index>(k));
  design.X.leftCols(demographics.cols()) = demographics;
  for (std::size_t j = 0; j < design.selected_dims.size(); ++j) {
    const Eigen::Index dim = design.selected_dims[j];
    design.X.col(demographics.cols() + static_cast<Eigen::Index>(j)) =
        embeddings.col(dim).array() - pc1.mean(dim);
  }
  return design;
}

// Convenience form over an audit set; computes the component in place.
// Prefer the explicit form when sweeping k so the PCA runs once.
inline DesignMatrix build_design_matrix(const AuditSet& set, std::size_t k) {
  if (k == 0) return {set.demographic_matrix, {}};
  if (!set.has_embeddings())
    throw AuditError("k > 0 requested but the log carries no embeddings");
  const Matrix emb = embeddings_matrix(set);
  return build_design_matrix(set.demographic_matrix, emb,
                             pca_first_component(emb), k);
}

}  // namespace waf
