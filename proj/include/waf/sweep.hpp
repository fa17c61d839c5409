#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "waf/dataset.hpp"
#include "waf/features.hpp"
#include "waf/linear_model.hpp"

namespace waf {

struct SweepPoint {
  std::size_t k = 0;
  double overall_mse = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;           // ascending k
  double mean_regressor_mse = 0.0;          // predict-the-mean reference line
};

// In-sample overall MSE of the fit as the number of selected embedding
// dimensions grows. The principal component is computed once and reused
// across the grid; k = 0 (demographic-only) is always included.
inline SweepResult sweep_k(const AuditSet& set, const Matrix& errors,
                           std::vector<std::size_t> k_grid,
                           double lambda = kDefaultRidge) {
  std::sort(k_grid.begin(), k_grid.end());
  k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
  if (k_grid.empty() || k_grid.front() != 0)
    k_grid.insert(k_grid.begin(), 0);

  SweepResult result;
  result.mean_regressor_mse = mse_overall(
      mean_regressor(errors, set.schema.n_attributes()).predict(set.demographic_matrix),
      errors);

  const bool needs_embeddings = k_grid.back() > 0;
  Matrix embeddings;
  Pc1Result pc1;
  if (needs_embeddings) {
    if (!set.has_embeddings())
      throw AuditError("sweep grid requests k > 0 but the log carries no embeddings");
    embeddings = embeddings_matrix(set);
    if (k_grid.back() > static_cast<std::size_t>(embeddings.cols()))
      throw AuditError("grid k = " + std::to_string(k_grid.back()) +
                       " exceeds the embedding dimension " +
                       std::to_string(embeddings.cols()));
    pc1 = pca_first_component(embeddings);
  }

  for (std::size_t k : k_grid) {
    DesignMatrix design =
        k == 0 ? DesignMatrix{set.demographic_matrix, {}}
               : build_design_matrix(set.demographic_matrix, embeddings, pc1, k);
    const WafModel model =
        fit_linear(design.X, errors, set.schema.n_attributes(), lambda);
    result.points.push_back({k, mse_overall(model.predict(design.X), errors)});
  }
  return result;
}

}  // namespace waf
