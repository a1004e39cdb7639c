#pragma once

#include <vector>

#include "funfuse/solver.hpp"

namespace funfuse {

struct TuneReport {
    std::vector<double> lambda2_grid;
    std::vector<double> bic_values;  // one per lambda2 grid point (last round)
    std::vector<double> lambda1_grid;
    std::vector<double> gcv_values;  // one per lambda1 grid point (last round)
    double lambda1 = 0.0;            // chosen
    double lambda2 = 0.0;            // chosen
    int rounds = 1;
    FitResult fit;  // final fit at the chosen pair
};

/// Modified BIC: log(RSS/n) + log(log(n+p)) (log n / n) K p. Perfect fits
/// return -inf.
double modified_bic(const FitResult& fit, const Eigen::VectorXd& y, int p);

/// GCV of the groupwise penalized fit at lambda1 for a fixed partition:
/// RSS / (1 - trace/n)^2 with the hat trace of the group-blocked design and
/// Moore-Penrose inverses per group block. Degenerate hats (trace/n >= 1)
/// return +inf.
double gcv(double lambda1, const std::vector<std::vector<int>>& partition,
           const Problem& pb);

/// Two-step search: minimize BIC over lambda2 with lambda1 fixed at 0.005,
/// then minimize GCV over lambda1 given the selected partition; optionally
/// iterated. Ties break toward the larger parameter. The returned fit is the
/// ADMM refit at the chosen pair.
TuneReport two_step_tune(const Problem& pb, std::vector<double> lambda2_grid,
                         std::vector<double> lambda1_grid, int rounds,
                         PenaltyConfig base, int threads = 1);
TuneReport two_step_tune(const Dataset& dataset, std::vector<double> lambda2_grid,
                         std::vector<double> lambda1_grid, int rounds,
                         PenaltyConfig base, int threads = 1);

/// 30 log-spaced points on [0.01, 10].
std::vector<double> default_lambda2_grid();

/// The baseline grid {0.0001, 0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.5, 1, 5}.
std::vector<double> default_lambda1_grid();

}  // namespace funfuse
