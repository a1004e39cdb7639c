#pragma once

#include <cstdint>
#include <vector>

#include "funfuse/simgen.hpp"
#include "funfuse/solver.hpp"

namespace funfuse {

/// Penalized B-spline fit for one subject set: minimizes the within-group
/// objective (1/|S|) sum (y_i - H_i theta)^2 + lambda1 ||(B theta)''||^2,
/// i.e. solves (H_S^T H_S + |S| lambda1 G0) theta = H_S^T y_S.
Eigen::VectorXd penalized_group_fit(const std::vector<int>& indices,
                                    const Problem& pb, double lambda1);

/// GCV score of penalized_group_fit restricted to one group (hat matrix and
/// scaling consistent with that estimator).
double group_gcv(const std::vector<int>& indices, const Problem& pb,
                 double lambda1);

/// Lloyd's algorithm with kmeans++ seeding and 20 restarts; returns labels.
std::vector<int> kmeans(const std::vector<Eigen::VectorXd>& points, int k,
                        std::uint64_t seed);

/// Fit with the true partition known; lambda1 per group by GCV over the grid.
FitResult oracle_fit(const Problem& pb, const TruthRecord& truth,
                     const std::vector<double>& lambda1_grid);

/// Response-based clustering: kmeans on y, then penalized fit per cluster.
FitResult resp_fit(const Problem& pb, int k,
                   const std::vector<double>& lambda1_grid, std::uint64_t seed);

/// Residual-based clustering: homogeneous fit (lambda1 by GCV), kmeans on the
/// residuals, then penalized refit per cluster.
FitResult resi_fit(const Problem& pb, int k,
                   const std::vector<double>& lambda1_grid, std::uint64_t seed);

}  // namespace funfuse
