#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "funfuse/design.hpp"

namespace funfuse {

enum class Scenario { S1_nonlinear, S2_linear, EX2_three };
enum class Structure { Balanced, Unbalanced };
enum class CoeffDist { Norm, Unif };  // N(2,1) or U(0,4)

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct ScenarioSpec {
    Scenario scenario = Scenario::S1_nonlinear;
    Structure structure = Structure::Balanced;
    int n = 40;
    CoeffDist coeff_dist = CoeffDist::Norm;
    double noise_sd = 1.0;
    int covariate_order = 5;   // q~
    int covariate_knots = 15;  // m~, so p~ = 20
    std::uint64_t seed = 1;
    int grid_points = 256;  // sampling grid for the observed-curve path
};

struct TruthRecord {
    std::vector<std::vector<int>> partition;
    std::vector<int> labels;  // subject -> group
    Scenario scenario = Scenario::S1_nonlinear;
    std::vector<std::function<double(double)>> xi;  // closed-form coefficients
};

/// Closed-form subgroup coefficient functions on [0, 1].
std::vector<std::function<double(double)>> scenario_coefficients(Scenario s);

/// Group sizes implied by the spec (balanced, or 1:3 / 2:3:5 unbalanced).
std::vector<int> group_sizes(const ScenarioSpec& spec);

/// Seeded draw of the synthetic dataset: spline covariates with coefficients
/// from the chosen distribution, responses y_i = \int X_i xi_k + eps_i with
/// the integral taken against the closed-form xi_k. Group-blocked subject
/// order shuffled by the seed. Pure function of the spec.
std::pair<Dataset, TruthRecord> generate(const ScenarioSpec& spec);

/// L2[0,1] distance sqrt(\int (f-g)^2) by 256-point composite Gauss-Legendre.
double l2_distance(const std::function<double(double)>& f,
                   const std::function<double(double)>& g);

}  // namespace funfuse
