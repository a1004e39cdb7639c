#include "funfuse/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "funfuse/errors.hpp"

namespace funfuse {

Eigen::VectorXd penalized_group_fit(const std::vector<int>& indices,
                                    const Problem& pb, double lambda1) {
    if (indices.empty()) throw invalid_argument("empty subject set");
    const int ns = static_cast<int>(indices.size());
    Eigen::MatrixXd hg(ns, pb.p());
    Eigen::VectorXd yg(ns);
    for (int r = 0; r < ns; ++r) {
        hg.row(r) = pb.rows.row(indices[r]);
        yg[r] = pb.y[indices[r]];
    }
    Eigen::MatrixXd m = (ns * lambda1) * pb.gram_d2;
    m.noalias() += hg.transpose() * hg;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    cod.setThreshold(1e-12);
    if (lambda1 == 0.0 && cod.rank() < pb.p())
        throw singular_system("group system is singular at lambda1 = 0");
    return cod.solve(hg.transpose() * yg);
}

double group_gcv(const std::vector<int>& indices, const Problem& pb,
                 double lambda1) {
    const int ns = static_cast<int>(indices.size());
    Eigen::MatrixXd hg(ns, pb.p());
    Eigen::VectorXd yg(ns);
    for (int r = 0; r < ns; ++r) {
        hg.row(r) = pb.rows.row(indices[r]);
        yg[r] = pb.y[indices[r]];
    }
    Eigen::MatrixXd m = (ns * lambda1) * pb.gram_d2;
    m.noalias() += hg.transpose() * hg;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    cod.setThreshold(1e-12);
    const Eigen::MatrixXd minv_ht = cod.solve(hg.transpose());
    const double trace = (hg * minv_ht).trace();
    const double rss = (yg - hg * (minv_ht * yg)).squaredNorm();
    if (trace / ns >= 1.0) return std::numeric_limits<double>::infinity();
    const double denom = 1.0 - trace / ns;
    return rss / (denom * denom);
}

namespace {

double best_gcv_lambda(const std::vector<int>& indices, const Problem& pb,
                       const std::vector<double>& grid) {
    double best = grid.front();
    double best_val = std::numeric_limits<double>::infinity();
    for (double l : grid) {
        const double v = group_gcv(indices, pb, l);
        if (v <= best_val) {
            best_val = v;
            best = l;
        }
    }
    return best;
}

FitResult fit_from_partition(const Problem& pb,
                             const std::vector<std::vector<int>>& partition,
                             const std::vector<double>& lambda1_grid) {
    FitResult fit;
    fit.partition = partition;
    fit.k_hat = static_cast<int>(partition.size());
    fit.labels.assign(pb.n(), -1);
    fit.alpha.resize(fit.k_hat, pb.p());
    fit.theta.resize(pb.n(), pb.p());
    for (int g = 0; g < fit.k_hat; ++g) {
        const double l1 = best_gcv_lambda(partition[g], pb, lambda1_grid);
        const Eigen::VectorXd coef = penalized_group_fit(partition[g], pb, l1);
        fit.alpha.row(g) = coef.transpose();
        for (int i : partition[g]) {
            fit.labels[i] = g;
            fit.theta.row(i) = coef.transpose();
        }
    }
    fit.fitted.resize(pb.n());
    for (int i = 0; i < pb.n(); ++i)
        fit.fitted[i] = pb.rows.row(i) * fit.theta.row(i).transpose();
    fit.converged = true;
    return fit;
}

}  // namespace

std::vector<int> kmeans(const std::vector<Eigen::VectorXd>& points, int k,
                        std::uint64_t seed) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw invalid_argument("kmeans needs 1 <= k <= #points");

    std::mt19937_64 rng(seed);
    std::vector<int> best_labels(n, 0);
    double best_wcss = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < 20; ++restart) {
        // kmeans++ seeding
        std::vector<Eigen::VectorXd> centers;
        centers.reserve(k);
        std::uniform_int_distribution<int> first(0, n - 1);
        centers.push_back(points[first(rng)]);
        std::vector<double> d2(n);
        while (static_cast<int>(centers.size()) < k) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : centers)
                    best = std::min(best, (points[i] - c).squaredNorm());
                d2[i] = best;
                total += best;
            }
            int pick = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double r = u(rng), acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = first(rng);
            }
            centers.push_back(points[pick]);
        }

        std::vector<int> labels(n, -1);
        for (int sweep = 0; sweep < 100; ++sweep) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double best = std::numeric_limits<double>::infinity();
                for (int g = 0; g < k; ++g) {
                    const double d = (points[i] - centers[g]).squaredNorm();
                    if (d < best) {
                        best = d;
                        arg = g;
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
            }
            std::vector<int> counts(k, 0);
            std::vector<Eigen::VectorXd> sums(
                k, Eigen::VectorXd::Zero(points[0].size()));
            for (int i = 0; i < n; ++i) {
                sums[labels[i]] += points[i];
                ++counts[labels[i]];
            }
            for (int g = 0; g < k; ++g) {
                if (counts[g] == 0) {
                    // Reseed an empty cluster with the farthest point.
                    int far = 0;
                    double fd = -1.0;
                    for (int i = 0; i < n; ++i) {
                        const double d =
                            (points[i] - centers[labels[i]]).squaredNorm();
                        if (d > fd) {
                            fd = d;
                            far = i;
                        }
                    }
                    centers[g] = points[far];
                    changed = true;
                } else {
                    centers[g] = sums[g] / counts[g];
                }
            }
            if (!changed) break;
        }
        double wcss = 0.0;
        for (int i = 0; i < n; ++i)
            wcss += (points[i] - centers[labels[i]]).squaredNorm();
        if (wcss < best_wcss) {
            best_wcss = wcss;
            best_labels = labels;
        }
    }
    return best_labels;
}

namespace {

std::vector<std::vector<int>> labels_to_partition(const std::vector<int>& labels,
                                                  int k) {
    std::vector<std::vector<int>> partition;
    std::vector<int> remap(k, -1);
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        int& slot = remap[labels[i]];
        if (slot < 0) {
            slot = static_cast<int>(partition.size());
            partition.emplace_back();
        }
        partition[slot].push_back(i);
    }
    return partition;
}

}  // namespace

FitResult oracle_fit(const Problem& pb, const TruthRecord& truth,
                     const std::vector<double>& lambda1_grid) {
    if (truth.partition.empty())
        throw invalid_argument("oracle fit requires the true partition");
    return fit_from_partition(pb, truth.partition, lambda1_grid);
}

FitResult resp_fit(const Problem& pb, int k,
                   const std::vector<double>& lambda1_grid, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> pts(pb.n());
    for (int i = 0; i < pb.n(); ++i) {
        pts[i].resize(1);
        pts[i][0] = pb.y[i];
    }
    const auto labels = kmeans(pts, k, seed);
    return fit_from_partition(pb, labels_to_partition(labels, k), lambda1_grid);
}

FitResult resi_fit(const Problem& pb, int k,
                   const std::vector<double>& lambda1_grid, std::uint64_t seed) {
    std::vector<int> all(pb.n());
    for (int i = 0; i < pb.n(); ++i) all[i] = i;
    const double l1 = best_gcv_lambda(all, pb, lambda1_grid);
    const Eigen::VectorXd theta = penalized_group_fit(all, pb, l1);
    std::vector<Eigen::VectorXd> pts(pb.n());
    for (int i = 0; i < pb.n(); ++i) {
        pts[i].resize(1);
        pts[i][0] = pb.y[i] - pb.rows.row(i) * theta;
    }
    const auto labels = kmeans(pts, k, seed);
    return fit_from_partition(pb, labels_to_partition(labels, k), lambda1_grid);
}

}  // namespace funfuse
