#pragma once

#include <vector>

#include "funfuse/simgen.hpp"
#include "funfuse/solver.hpp"

namespace funfuse {

/// Pair-counting adjusted Rand index; 1 for identical partitions, 0 expected
/// under independent labelings.
double adjusted_rand_index(const std::vector<std::vector<int>>& a,
                           const std::vector<std::vector<int>>& b);

/// Mutual information normalized by the arithmetic mean of the entropies.
double nmi(const std::vector<std::vector<int>>& a,
           const std::vector<std::vector<int>>& b);

/// Mean over subjects of \int (xi_{k(i)} - B theta_i)^2 dt (256-point
/// composite Gauss-Legendre).
double coef_mse(const FitResult& fit, const TruthRecord& truth,
                const BSplineBasis& basis);

/// Mean squared prediction error of `fit` on a held-out dataset, with group
/// assignment resolved by predict().
double prediction_mse(const FitResult& fit, const Dataset& test,
                      const Dataset& train);

}  // namespace funfuse
