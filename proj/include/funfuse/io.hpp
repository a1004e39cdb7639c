#pragma once

#include <optional>
#include <string>
#include <vector>

#include "funfuse/simgen.hpp"
#include "funfuse/solver.hpp"

namespace funfuse {

/// Truth-file payload: groups of subject ids plus the scenario tag.
struct TruthFile {
    std::vector<std::vector<std::string>> partition;
    std::string scenario;
    // covariate coefficients keyed by subject id (empty when absent)
    std::vector<std::pair<std::string, Eigen::VectorXd>> coeffs;
};

/// Fit-file payload (result.json).
struct ResultFile {
    int k_hat = 0;
    std::vector<std::vector<std::string>> partition;
    Eigen::MatrixXd alpha;
    double lambda1 = 0.0, lambda2 = 0.0;
    int iters = 0;
    bool converged = false;
    double bic = 0.0;
};

// data.csv: `subject_id,t,value[,lon,lat]`; responses.csv: `subject_id,y`.
void write_data_csv(const std::string& path, const Dataset& dataset);
void write_responses_csv(const std::string& path, const Dataset& dataset);
void write_truth_json(const std::string& path, const Dataset& dataset,
                      const TruthRecord& truth);

struct LoadReport {
    std::vector<std::string> dropped;  // subjects with > 50% missing values
};

/// Reads data/responses CSVs into a Dataset with a (q, m) coefficient basis
/// on [0, max t]. Subjects keep their file order. Interior missing values are
/// linearly interpolated; subjects missing more than half their observations
/// are dropped. When a truth file with coefficients is given, the exact
/// design path is enabled (covariate basis of order 5 inferred from the
/// coefficient length).
Dataset load_dataset(const std::string& data_csv, const std::string& responses_csv,
                     int q, int m, const std::optional<TruthFile>& truth = {},
                     LoadReport* report = nullptr);

TruthFile load_truth_json(const std::string& path);

/// Truth-file partition translated to indices of `dataset` order.
std::vector<std::vector<int>> partition_to_indices(
    const std::vector<std::vector<std::string>>& partition, const Dataset& dataset);

void write_result_json(const std::string& path, const FitResult& fit, double bic,
                       const Dataset& dataset);
ResultFile load_result_json(const std::string& path);

/// curves.csv: `group,t,beta_hat`, each group's curve on 201 equispaced points.
void write_curves_csv(const std::string& path, const FitResult& fit,
                      const BSplineBasis& basis);

}  // namespace funfuse
