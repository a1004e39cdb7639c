#include "funfuse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "funfuse/errors.hpp"

namespace funfuse {

void PenaltyConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw invalid_argument("penalty parameters must be nonnegative");
    if (!(tau * delta > 1.0))
        throw invalid_argument("MCP/ADMM parameters must satisfy tau * delta > 1");
    if (!(eps_abs > 0.0) || !(eps_rel > 0.0))
        throw invalid_argument("stopping tolerances must be positive");
    if (max_iter < 1) throw invalid_argument("max_iter must be >= 1");
}

ThetaSolver::ThetaSolver(const Problem& pb, double lambda1, double delta)
    : pb_(pb), lambda1_(lambda1), delta_(delta) {
    const int n = pb.n(), p = pb.p();
    blocks_.reserve(n);
    Eigen::MatrixXd sum_inv = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd di = lambda1 * pb.gram_d2;
        di.noalias() += pb.rows.row(i).transpose() * pb.rows.row(i);
        di.diagonal().array() += delta * n;
        blocks_.emplace_back(di);
        if (blocks_.back().info() != Eigen::Success)
            throw singular_system("theta-system block factorization failed");
        if (delta > 0.0)
            sum_inv += blocks_.back().solve(Eigen::MatrixXd::Identity(p, p));
    }
    if (delta > 0.0) {
        Eigen::MatrixXd cap = -sum_inv;
        cap.diagonal().array() += 1.0 / delta;
        capacitance_.compute(cap);
        if (capacitance_.info() != Eigen::Success)
            throw singular_system("theta-system capacitance factorization failed");
    }
}

Eigen::MatrixXd ThetaSolver::apply(const Eigen::MatrixXd& theta) const {
    const int n = pb_.n(), p = pb_.p();
    Eigen::MatrixXd out(n, p);
    const Eigen::RowVectorXd colsum = theta.colwise().sum();
    for (int i = 0; i < n; ++i) {
        out.row(i) = (pb_.rows.row(i) * theta.row(i).transpose()) * pb_.rows.row(i);
        out.row(i) += lambda1_ * (pb_.gram_d2 * theta.row(i).transpose()).transpose();
        out.row(i) += delta_ * (n * theta.row(i) - colsum);
    }
    return out;
}

Eigen::MatrixXd ThetaSolver::solve(const Eigen::MatrixXd& rhs) const {
    const int n = pb_.n(), p = pb_.p();
    Eigen::MatrixXd theta(n, p);
    if (delta_ == 0.0) {
        // No pair coupling: independent per-subject systems, minimum-norm
        // solutions where a block is singular.
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd di = lambda1_ * pb_.gram_d2;
            di.noalias() += pb_.rows.row(i).transpose() * pb_.rows.row(i);
            theta.row(i) = di.completeOrthogonalDecomposition()
                               .solve(rhs.row(i).transpose())
                               .transpose();
        }
        last_rel_residual_ = 0.0;
        return theta;
    }
    for (int i = 0; i < n; ++i)
        theta.row(i) = blocks_[i].solve(rhs.row(i).transpose()).transpose();
    const Eigen::VectorXd s = theta.colwise().sum().transpose();
    const Eigen::VectorXd w = capacitance_.solve(s);
    for (int i = 0; i < n; ++i)
        theta.row(i) += blocks_[i].solve(w).transpose();

    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0.0) {
        Eigen::MatrixXd resid = apply(theta) - rhs;
        double rel = resid.norm() / rhs_norm;
        if (rel > 1e-10) {  // one step of iterative refinement
            Eigen::MatrixXd corr(n, p);
            for (int i = 0; i < n; ++i)
                corr.row(i) = blocks_[i].solve(-resid.row(i).transpose()).transpose();
            const Eigen::VectorXd sc = corr.colwise().sum().transpose();
            const Eigen::VectorXd wc = capacitance_.solve(sc);
            for (int i = 0; i < n; ++i)
                corr.row(i) += blocks_[i].solve(wc).transpose();
            theta += corr;
            rel = (apply(theta) - rhs).norm() / rhs_norm;
        }
        last_rel_residual_ = rel;
        if (!(rel <= 1e-8))
            throw singular_system("theta update did not reach the required accuracy");
    } else {
        last_rel_residual_ = 0.0;
    }
    return theta;
}

Eigen::VectorXd init_theta(const Problem& pb, double lambda1) {
    const int p = pb.p();
    Eigen::MatrixXd m = lambda1 * pb.gram_d2;
    m.noalias() += pb.rows.transpose() * pb.rows;
    const Eigen::VectorXd rhs = pb.rows.transpose() * pb.y;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    cod.setThreshold(1e-12);
    if (lambda1 == 0.0 && cod.rank() < p)
        throw singular_system(
            "homogeneous system is rank deficient; use lambda1 > 0");
    return cod.solve(rhs);
}

Eigen::MatrixXd theta_update(const SolverState& state, const ThetaSolver& solver,
                             const Problem& pb, const PenaltyConfig& config) {
    const int n = pb.n(), p = pb.p();
    Eigen::MatrixXd rhs(n, p);
    for (int i = 0; i < n; ++i) rhs.row(i) = pb.y[i] * pb.rows.row(i);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k) {
            const Eigen::RowVectorXd v =
                config.delta * state.eta.row(k) + state.zeta.row(k);
            rhs.row(i) += v;
            rhs.row(j) -= v;
        }
    return solver.solve(rhs);
}

Eigen::VectorXd mcp_prox(const Eigen::VectorXd& u, double omega,
                         const PenaltyConfig& config) {
    const double gamma = omega * config.lambda2;
    const double norm = u.norm();
    if (norm >= config.tau * gamma) return u;
    if (norm == 0.0) return u;  // zero maps to zero
    const double shrink =
        std::max(0.0, 1.0 - gamma / (config.delta * norm));
    return (config.tau * config.delta / (config.tau * config.delta - 1.0)) *
           shrink * u;
}

double mcp_penalty(double t, double gamma, double tau) {
    t = std::abs(t);
    if (t >= tau * gamma) return 0.5 * tau * gamma * gamma;
    return gamma * t - 0.5 * t * t / tau;
}

void eta_zeta_update(SolverState& state, const Eigen::MatrixXd& new_theta,
                     const Eigen::MatrixXd& weights, const PenaltyConfig& config) {
    const int n = static_cast<int>(new_theta.rows());
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k) {
            const Eigen::VectorXd diff =
                (new_theta.row(i) - new_theta.row(j)).transpose();
            const Eigen::VectorXd u =
                diff - state.zeta.row(k).transpose() / config.delta;
            const Eigen::VectorXd eta = mcp_prox(u, weights(i, j), config);
            // Dual ascent on the constraint eta - (theta_i - theta_j) = 0.
            // The sign here is the one consistent with the theta update and
            // the prox target u above; the opposite sign makes the dual
            // variable of every unfused pair double each iteration.
            state.zeta.row(k) += config.delta * (eta - diff).transpose();
            state.eta.row(k) = eta;
        }
    state.theta = new_theta;
}

Residuals residuals(const SolverState& state, const Eigen::MatrixXd& eta_prev,
                    const PenaltyConfig& config) {
    const int n = static_cast<int>(state.theta.rows());
    const int p = static_cast<int>(state.theta.cols());
    Residuals r;
    double primal2 = 0.0, atheta2 = 0.0;
    Eigen::MatrixXd dual_acc = Eigen::MatrixXd::Zero(n, p);
    Eigen::MatrixXd zeta_acc = Eigen::MatrixXd::Zero(n, p);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k) {
            const Eigen::RowVectorXd diff = state.theta.row(i) - state.theta.row(j);
            primal2 += (diff - state.eta.row(k)).squaredNorm();
            atheta2 += diff.squaredNorm();
            const Eigen::RowVectorXd deta = state.eta.row(k) - eta_prev.row(k);
            dual_acc.row(i) += deta;
            dual_acc.row(j) -= deta;
            zeta_acc.row(i) += state.zeta.row(k);
            zeta_acc.row(j) -= state.zeta.row(k);
        }
    r.primal = std::sqrt(primal2);
    r.dual = config.delta * dual_acc.norm();
    r.eps_primal = std::sqrt(static_cast<double>(n) * p) * config.eps_abs +
                   config.eps_rel * zeta_acc.norm();
    r.eps_dual = std::sqrt(0.5 * n * (n - 1) * p) * config.eps_abs +
                 config.eps_rel *
                     std::max(std::sqrt(atheta2), state.eta.norm());
    return r;
}

double objective_value(const Problem& pb, const Eigen::MatrixXd& theta,
                       const PenaltyConfig& config) {
    const int n = pb.n();
    double loss = 0.0, rough = 0.0, fusion = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = pb.y[i] - pb.rows.row(i) * theta.row(i).transpose();
        loss += r * r;
        rough += theta.row(i) * pb.gram_d2 * theta.row(i).transpose();
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            fusion += mcp_penalty((theta.row(i) - theta.row(j)).norm(),
                                  pb.weights(i, j) * config.lambda2, config.tau);
    return 0.5 * loss + 0.5 * config.lambda1 * rough + fusion;
}

double group_tolerance(const Eigen::MatrixXd& theta) {
    return 1e-8 * (1.0 + theta.rowwise().norm().mean());
}

namespace {
int uf_find(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}
}  // namespace

std::vector<std::vector<int>> extract_groups(const Eigen::MatrixXd& eta, int n,
                                             double tol) {
    if (eta.rows() != pair_count(n))
        throw invalid_argument("eta block count does not match subject count");
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k)
            if (eta.row(k).norm() <= tol) {
                const int ri = uf_find(parent, i), rj = uf_find(parent, j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
    std::vector<std::vector<int>> groups;
    std::vector<int> root_group(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = uf_find(parent, i);
        if (root_group[r] < 0) {
            root_group[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[root_group[r]].push_back(i);
    }
    return groups;
}

FitResult admm_fit(const Problem& pb, const PenaltyConfig& config) {
    config.validate();
    const int n = pb.n(), p = pb.p();
    const int npairs = pair_count(n);

    ThetaSolver solver(pb, config.lambda1, config.delta);

    SolverState state;
    const Eigen::VectorXd theta0 = init_theta(pb, config.lambda1);
    state.theta = theta0.transpose().replicate(n, 1);
    state.eta = Eigen::MatrixXd::Zero(npairs, p);  // A theta0 = 0 at consensus
    state.zeta = Eigen::MatrixXd::Zero(npairs, p);

    FitResult fit;
    fit.lambda1 = config.lambda1;
    fit.lambda2 = config.lambda2;
    fit.objective_init = objective_value(pb, state.theta, config);

    Eigen::MatrixXd eta_prev = state.eta;
    Residuals res;
    for (int s = 0; s < config.max_iter; ++s) {
        const Eigen::MatrixXd theta_new = theta_update(state, solver, pb, config);
        eta_prev = state.eta;
        eta_zeta_update(state, theta_new, pb.weights, config);
        if (!state.theta.allFinite() || !state.eta.allFinite())
            throw divergence_error("ADMM produced non-finite iterates", s + 1);
        res = residuals(state, eta_prev, config);
        state.primal_residual = res.primal;
        state.dual_residual = res.dual;
        state.iter = s + 1;
        if (res.converged()) {
            fit.converged = true;
            break;
        }
    }
    fit.iters = state.iter;

    fit.partition = extract_groups(state.eta, n, group_tolerance(state.theta));
    fit.k_hat = static_cast<int>(fit.partition.size());
    fit.labels.assign(n, -1);
    fit.alpha = Eigen::MatrixXd::Zero(fit.k_hat, p);
    for (int g = 0; g < fit.k_hat; ++g) {
        for (int i : fit.partition[g]) {
            fit.labels[i] = g;
            fit.alpha.row(g) += state.theta.row(i);
        }
        fit.alpha.row(g) /= static_cast<double>(fit.partition[g].size());
    }
    fit.theta = state.theta;
    fit.fitted.resize(n);
    for (int i = 0; i < n; ++i)
        fit.fitted[i] = pb.rows.row(i) * state.theta.row(i).transpose();
    fit.objective = objective_value(pb, state.theta, config);
    return fit;
}

FitResult admm_fit(const Dataset& dataset, const PenaltyConfig& config) {
    return admm_fit(assemble(dataset), config);
}

double predict(const FitResult& fit, const FunctionalSample& sample,
               const Dataset& train) {
    if (fit.k_hat == 0) throw invalid_state("prediction requires a nonempty fit");

    int group = -1;
    Eigen::RowVectorXd row;
    for (int i = 0; i < train.n(); ++i)
        if (train.samples[i].subject_id == sample.subject_id) {
            group = fit.labels[i];
            if (train.has_coeffs())
                row = train.coeffs.row(i) *
                      cross_gram(*train.covariate_basis, train.basis);
            else
                row = design_row_from_grid(train.samples[i], train.basis);
            break;
        }
    if (group < 0) {
        row = design_row_from_grid(sample, train.basis);
        if (sample.location) {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < train.n(); ++i) {
                if (!train.samples[i].location) continue;
                const auto& a = *sample.location;
                const auto& b = *train.samples[i].location;
                const double d = haversine_km(a[0], a[1], b[0], b[1]);
                if (d < best) {
                    best = d;
                    group = fit.labels[i];
                }
            }
        }
        if (group < 0) {
            size_t largest = 0;
            for (size_t g = 1; g < fit.partition.size(); ++g)
                if (fit.partition[g].size() > fit.partition[largest].size())
                    largest = g;
            group = static_cast<int>(largest);
        }
    }
    return row * fit.alpha.row(group).transpose();
}

}  // namespace funfuse
