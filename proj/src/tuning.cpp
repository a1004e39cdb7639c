#include "funfuse/tuning.hpp"

#include <cmath>
#include <limits>

#include "funfuse/errors.hpp"
#include "funfuse/parallel.hpp"

namespace funfuse {

double modified_bic(const FitResult& fit, const Eigen::VectorXd& y, int p) {
    const int n = static_cast<int>(y.size());
    if (fit.k_hat == 0 || fit.fitted.size() != n)
        throw invalid_state("BIC requires a fit over the same subjects");
    const double rss = (y - fit.fitted).squaredNorm();
    if (rss == 0.0) return -std::numeric_limits<double>::infinity();
    const double cnp = std::log(std::log(static_cast<double>(n + p)));
    return std::log(rss / n) +
           cnp * (std::log(static_cast<double>(n)) / n) * (fit.k_hat * p);
}

double gcv(double lambda1, const std::vector<std::vector<int>>& partition,
           const Problem& pb) {
    if (partition.empty()) throw invalid_argument("GCV requires a nonempty partition");
    const int n = pb.n();
    double rss = 0.0, trace = 0.0;
    // The group-blocked design is block diagonal, so the hat trace and the
    // fitted values decompose over groups.
    for (const auto& group : partition) {
        if (group.empty()) throw invalid_argument("GCV partition has an empty group");
        const int ng = static_cast<int>(group.size());
        Eigen::MatrixXd hg(ng, pb.p());
        Eigen::VectorXd yg(ng);
        for (int r = 0; r < ng; ++r) {
            hg.row(r) = pb.rows.row(group[r]);
            yg[r] = pb.y[group[r]];
        }
        Eigen::MatrixXd m = lambda1 * pb.gram_d2;
        m.noalias() += hg.transpose() * hg;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
        cod.setThreshold(1e-12);
        const Eigen::MatrixXd minv_ht = cod.solve(hg.transpose());
        trace += (hg * minv_ht).trace();
        rss += (yg - hg * (minv_ht * yg)).squaredNorm();
    }
    if (trace / n >= 1.0) return std::numeric_limits<double>::infinity();
    const double denom = 1.0 - trace / n;
    return rss / (denom * denom);
}

namespace {

// Grid minimum with ties broken toward the larger (later) grid value.
int argmin_prefer_last(const std::vector<double>& values) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (!std::isfinite(values[i]) &&
            values[i] != -std::numeric_limits<double>::infinity())
            continue;
        if (best < 0 || values[i] <= values[best]) best = i;
    }
    return best;
}

}  // namespace

TuneReport two_step_tune(const Problem& pb, std::vector<double> lambda2_grid,
                         std::vector<double> lambda1_grid, int rounds,
                         PenaltyConfig base, int threads) {
    if (lambda2_grid.empty() || lambda1_grid.empty())
        throw invalid_argument("tuning grids must be nonempty");
    if (rounds < 1) throw invalid_argument("rounds must be >= 1");

    TuneReport report;
    report.lambda2_grid = lambda2_grid;
    report.lambda1_grid = lambda1_grid;
    report.rounds = rounds;

    const int n2 = static_cast<int>(lambda2_grid.size());
    double lambda1_cur = 0.005;
    std::vector<std::vector<int>> partition;

    for (int round = 0; round < rounds; ++round) {
        std::vector<FitResult> fits(n2);
        std::vector<double> bic(n2, std::numeric_limits<double>::quiet_NaN());
        PenaltyConfig cfg = base;
        cfg.lambda1 = lambda1_cur;
        parallel_for(n2, threads, [&](int i) {
            PenaltyConfig c = cfg;
            c.lambda2 = lambda2_grid[i];
            try {
                fits[i] = admm_fit(pb, c);
                bic[i] = modified_bic(fits[i], pb.y, pb.p());
            } catch (const divergence_error&) {
                // skipped in the grid search
            }
        });
        const int best2 = argmin_prefer_last(bic);
        if (best2 < 0) throw tuning_failure("every lambda2 fit diverged");
        report.bic_values = bic;
        report.lambda2 = lambda2_grid[best2];
        partition = fits[best2].partition;

        std::vector<double> gcvs(lambda1_grid.size());
        for (size_t i = 0; i < lambda1_grid.size(); ++i)
            gcvs[i] = gcv(lambda1_grid[i], partition, pb);
        const int best1 = argmin_prefer_last(gcvs);
        if (best1 < 0) throw tuning_failure("every lambda1 candidate was degenerate");
        report.gcv_values = gcvs;
        report.lambda1 = lambda1_grid[best1];
        lambda1_cur = report.lambda1;
    }

    PenaltyConfig final_cfg = base;
    final_cfg.lambda1 = report.lambda1;
    final_cfg.lambda2 = report.lambda2;
    report.fit = admm_fit(pb, final_cfg);
    return report;
}

TuneReport two_step_tune(const Dataset& dataset, std::vector<double> lambda2_grid,
                         std::vector<double> lambda1_grid, int rounds,
                         PenaltyConfig base, int threads) {
    return two_step_tune(assemble(dataset), std::move(lambda2_grid),
                         std::move(lambda1_grid), rounds, base, threads);
}

std::vector<double> default_lambda2_grid() {
    std::vector<double> grid(30);
    const double lo = std::log(0.01), hi = std::log(10.0);
    for (int i = 0; i < 30; ++i)
        grid[i] = std::exp(lo + (hi - lo) * i / 29.0);
    return grid;
}

std::vector<double> default_lambda1_grid() {
    return {0.0001, 0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.5, 1.0, 5.0};
}

}  // namespace funfuse
