#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "funfuse/bspline.hpp"

namespace funfuse {

/// One subject: covariate curve observed on a grid plus the scalar response.
struct FunctionalSample {
    std::string subject_id;
    Eigen::VectorXd grid;
    Eigen::VectorXd values;
    double response = 0.0;
    std::optional<std::array<double, 2>> location;  // (lon, lat) in degrees
};

struct Dataset {
    std::vector<FunctionalSample> samples;
    BSplineBasis basis;  // coefficient-function basis
    std::optional<BSplineBasis> covariate_basis;
    Eigen::MatrixXd coeffs;   // n x p_cov covariate coefficients; 0x0 when absent
    Eigen::MatrixXd weights;  // symmetric n x n fusion weights

    explicit Dataset(BSplineBasis b) : basis(std::move(b)) {}
    int n() const { return static_cast<int>(samples.size()); }
    bool has_coeffs() const { return coeffs.size() > 0; }
};

/// Design quantities of the objective. `rows` carries H_i as row i; the
/// block-diagonal H, the stacked H-tilde and G = I_n (x) G0 all act through
/// these blocks and are never densified.
struct Problem {
    Eigen::MatrixXd rows;     // n x p
    Eigen::MatrixXd gram_d2;  // G0, p x p
    Eigen::VectorXd y;        // n
    Eigen::MatrixXd weights;  // n x n

    int n() const { return static_cast<int>(rows.rows()); }
    int p() const { return static_cast<int>(rows.cols()); }
};

/// H_i by composite trapezoid of X_i(t) B_l(t) over the observation grid,
/// with X_i piecewise linear between observations.
Eigen::RowVectorXd design_row_from_grid(const FunctionalSample& sample,
                                        const BSplineBasis& basis);

/// Exact H_i = a^T cross_gram(covariate_basis, basis) for spline covariates.
Eigen::RowVectorXd design_row_from_coeffs(const Eigen::VectorXd& a,
                                          const BSplineBasis& covariate_basis,
                                          const BSplineBasis& basis);

Problem assemble(const Dataset& dataset);

/// Great-circle distance in km (haversine, Earth radius 6371 km).
double haversine_km(double lon1, double lat1, double lon2, double lat2);

/// omega_ij = 1/d_ij, coincident pairs capped at the 99th percentile, then
/// scaled so the mean off-diagonal weight is 1.
Eigen::MatrixXd spherical_weights(const Dataset& dataset);

}  // namespace funfuse
