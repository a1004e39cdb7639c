#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "funfuse/simgen.hpp"
#include "funfuse/solver.hpp"
#include "funfuse/tuning.hpp"

namespace funfuse {

struct ReplicateSpec {
    ScenarioSpec scenario;
    int reps = 20;
    std::vector<std::string> methods = {"proposed"};  // proposed|oracle|resp|resi
    std::vector<double> lambda2_grid;                 // defaults when empty
    std::vector<double> lambda1_grid;
    int rounds = 1;
    PenaltyConfig base;
    int threads = 1;
};

struct ReplicateRow {
    int rep = 0;
    std::string method;
    double ari = 0.0;
    double mse = 0.0;
    int k_hat = 0;
    bool failed = false;
    std::string error;
};

struct ReplicateSummary {
    std::vector<ReplicateRow> rows;  // reps x methods, replicate-major order

    double mean(const std::string& method, double ReplicateRow::*field) const;
    double sd(const std::string& method, double ReplicateRow::*field) const;
    /// Fraction of non-failed replicates of `method` with k_hat == k.
    double k_rate(const std::string& method, int k) const;
    std::vector<std::pair<int, int>> k_histogram(const std::string& method) const;
};

/// Seeded replicate study: for r in [0, reps), generate with seed + r, run
/// the requested methods, and collect ARI / coefficient MSE / K-hat per
/// method. Baselines receive the true number of subgroups. Failed replicates
/// are recorded, not fatal.
ReplicateSummary run_replicates(const ReplicateSpec& spec);

void write_summary_csv(const std::string& path, const ReplicateSummary& summary,
                       const std::vector<std::string>& methods);
void write_khat_hist_csv(const std::string& path, const ReplicateSummary& summary,
                         const std::string& method);

}  // namespace funfuse
