#pragma once

#include <Eigen/Dense>
#include <vector>

#include "funfuse/design.hpp"

namespace funfuse {

struct PenaltyConfig {
    double lambda1 = 0.005;  // roughness
    double lambda2 = 1.0;    // fusion
    double tau = 1.0;        // MCP concavity
    double delta = 2.0;      // augmented-Lagrangian penalty
    double eps_abs = 1e-4;
    double eps_rel = 1e-2;
    int max_iter = 2000;

    void validate() const;
};

/// ADMM iterates: per-subject theta blocks plus one eta/zeta block per pair
/// (i, j), i < j, in lexicographic order.
struct SolverState {
    Eigen::MatrixXd theta;  // n x p
    Eigen::MatrixXd eta;    // n(n-1)/2 x p
    Eigen::MatrixXd zeta;   // n(n-1)/2 x p
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iter = 0;
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_primal = 0.0;
    double eps_dual = 0.0;
    bool converged() const { return primal <= eps_primal && dual <= eps_dual; }
};

struct FitResult {
    std::vector<std::vector<int>> partition;  // disjoint groups covering 0..n-1
    std::vector<int> labels;                  // subject -> group index
    int k_hat = 0;
    Eigen::MatrixXd alpha;   // k_hat x p group coefficients (means of theta)
    Eigen::MatrixXd theta;   // n x p per-subject coefficients
    Eigen::VectorXd fitted;  // yhat_i = H_i theta_i
    int iters = 0;
    bool converged = false;
    double objective = 0.0;
    double objective_init = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

inline int pair_count(int n) { return n * (n - 1) / 2; }
inline int pair_index(int i, int j, int n) {
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

/// Cached factorization of H^T H + lambda1 G + delta A^T A, exploiting
/// A^T A = (n I_n - J_n) (x) I_p: block LDLTs of
/// D_i = H_i^T H_i + lambda1 G0 + delta n I_p plus a p x p Woodbury
/// capacitance for the rank-p coupling -delta J_n (x) I_p.
class ThetaSolver {
public:
    ThetaSolver(const Problem& pb, double lambda1, double delta);

    /// Solves M theta = rhs for block rhs (n x p, row i = block i).
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

    /// M theta computed block-wise (for residual checks).
    Eigen::MatrixXd apply(const Eigen::MatrixXd& theta) const;

    /// Relative residual ||M theta - rhs|| / ||rhs|| of the last solve.
    double last_relative_residual() const { return last_rel_residual_; }

private:
    const Problem& pb_;
    double lambda1_, delta_;
    std::vector<Eigen::LDLT<Eigen::MatrixXd>> blocks_;
    Eigen::LDLT<Eigen::MatrixXd> capacitance_;
    mutable double last_rel_residual_ = 0.0;
};

/// Homogeneous-model initializer (H~^T H~ + lambda1 G0)^{-1} H~^T y.
Eigen::VectorXd init_theta(const Problem& pb, double lambda1);

/// One theta update: solves M theta = H^T y + delta A^T (eta + zeta/delta).
Eigen::MatrixXd theta_update(const SolverState& state, const ThetaSolver& solver,
                             const Problem& pb, const PenaltyConfig& config);

/// Groupwise MCP proximal map of u with weight omega (gamma = omega lambda2):
/// u unchanged when ||u|| >= tau gamma, else shrunk by
/// (tau delta / (tau delta - 1)) (1 - gamma / (delta ||u||))_+.
Eigen::VectorXd mcp_prox(const Eigen::VectorXd& u, double omega,
                         const PenaltyConfig& config);

/// MCP value rho_tau(t, gamma).
double mcp_penalty(double t, double gamma, double tau);

/// Full pair sweep: eta_ij from the prox at u_ij = theta_i - theta_j -
/// zeta_ij/delta, then the dual step zeta_ij += delta (eta_ij - (theta_i -
/// theta_j)).
void eta_zeta_update(SolverState& state, const Eigen::MatrixXd& new_theta,
                     const Eigen::MatrixXd& weights, const PenaltyConfig& config);

/// Primal/dual residuals of the current state and their stopping thresholds.
Residuals residuals(const SolverState& state, const Eigen::MatrixXd& eta_prev,
                    const PenaltyConfig& config);

/// Objective Q_n(theta; lambda) of the penalized-fusion problem.
double objective_value(const Problem& pb, const Eigen::MatrixXd& theta,
                       const PenaltyConfig& config);

/// Fusion tolerance used for group extraction: 1e-8 (1 + mean ||theta_i||).
double group_tolerance(const Eigen::MatrixXd& theta);

/// Connected components (union-find) of the graph with an edge per pair whose
/// ||eta_ij|| <= tol; groups ordered by smallest member.
std::vector<std::vector<int>> extract_groups(const Eigen::MatrixXd& eta, int n,
                                             double tol);

FitResult admm_fit(const Problem& pb, const PenaltyConfig& config);
FitResult admm_fit(const Dataset& dataset, const PenaltyConfig& config);

/// Prediction for one sample: in-sample subjects keep their own group,
/// out-of-sample ones inherit the group of the nearest training subject by
/// great-circle distance (largest group when locations are missing);
/// returns H_new alpha_k.
double predict(const FitResult& fit, const FunctionalSample& sample,
               const Dataset& train);

}  // namespace funfuse
