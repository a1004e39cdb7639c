#include "funfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "funfuse/errors.hpp"
#include "funfuse/quadrature.hpp"

namespace funfuse {

namespace {

std::vector<int> partition_labels(const std::vector<std::vector<int>>& a,
                                  const std::vector<std::vector<int>>& b) {
    std::vector<int> members;
    for (const auto& g : a) members.insert(members.end(), g.begin(), g.end());
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end())
        throw invalid_argument("partition blocks are not disjoint");
    std::vector<int> other;
    for (const auto& g : b) other.insert(other.end(), g.begin(), g.end());
    std::sort(other.begin(), other.end());
    if (members != other)
        throw invalid_argument("partitions cover different index sets");
    return members;
}

// Contingency table between two partitions over the same index set.
struct Contingency {
    std::map<std::pair<int, int>, long long> cells;
    std::vector<long long> row_sums, col_sums;
    long long n = 0;
};

Contingency contingency(const std::vector<std::vector<int>>& a,
                        const std::vector<std::vector<int>>& b) {
    const auto members = partition_labels(a, b);
    std::map<int, int> la, lb;
    for (size_t g = 0; g < a.size(); ++g)
        for (int i : a[g]) la[i] = static_cast<int>(g);
    for (size_t g = 0; g < b.size(); ++g)
        for (int i : b[g]) lb[i] = static_cast<int>(g);
    Contingency c;
    c.row_sums.assign(a.size(), 0);
    c.col_sums.assign(b.size(), 0);
    c.n = static_cast<long long>(members.size());
    for (int i : members) {
        ++c.cells[{la[i], lb[i]}];
        ++c.row_sums[la[i]];
        ++c.col_sums[lb[i]];
    }
    return c;
}

double choose2(long long m) { return 0.5 * m * (m - 1); }

}  // namespace

double adjusted_rand_index(const std::vector<std::vector<int>>& a,
                           const std::vector<std::vector<int>>& b) {
    const Contingency c = contingency(a, b);
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, count] : c.cells) index += choose2(count);
    for (long long m : c.row_sums) sum_a += choose2(m);
    for (long long m : c.col_sums) sum_b += choose2(m);
    const double total = choose2(c.n);
    if (total == 0.0) return 1.0;
    const double expected = sum_a * sum_b / total;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return 1.0;  // both trivial, hence identical
    return (index - expected) / (maximum - expected);
}

double nmi(const std::vector<std::vector<int>>& a,
           const std::vector<std::vector<int>>& b) {
    const Contingency c = contingency(a, b);
    const double n = static_cast<double>(c.n);
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (long long m : c.row_sums)
        if (m > 0) ha -= m / n * std::log(m / n);
    for (long long m : c.col_sums)
        if (m > 0) hb -= m / n * std::log(m / n);
    for (const auto& [key, count] : c.cells) {
        const double pij = count / n;
        const double pi = c.row_sums[key.first] / n;
        const double pj = c.col_sums[key.second] / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    const double mean_h = 0.5 * (ha + hb);
    if (mean_h == 0.0) return 1.0;  // both partitions trivial and identical
    return std::max(0.0, mi / mean_h);
}

double coef_mse(const FitResult& fit, const TruthRecord& truth,
                const BSplineBasis& basis) {
    const int n = static_cast<int>(fit.theta.rows());
    if (static_cast<int>(truth.labels.size()) != n)
        throw invalid_argument("truth labels do not match the fit size");

    // Fixed 256-point composite rule (32 panels x 8 nodes) on the domain.
    const auto& rule = GaussLegendre::rule(8);
    const int panels = 32;
    const double lo = basis.domain().lo;
    const double h = basis.domain().length() / panels;
    std::vector<double> ts, ws;
    for (int s = 0; s < panels; ++s) {
        const double mid = lo + (s + 0.5) * h, half = 0.5 * h;
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
            ts.push_back(mid + half * rule.nodes[q]);
            ws.push_back(half * rule.weights[q]);
        }
    }
    Eigen::MatrixXd bmat(ts.size(), basis.dim());
    for (size_t r = 0; r < ts.size(); ++r)
        bmat.row(r) = basis.eval(ts[r]).transpose();

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd beta_hat = bmat * fit.theta.row(i).transpose();
        const auto& xi = truth.xi[truth.labels[i]];
        double acc = 0.0;
        for (size_t r = 0; r < ts.size(); ++r) {
            const double d = xi(ts[r]) - beta_hat[r];
            acc += ws[r] * d * d;
        }
        total += acc;
    }
    return total / n;
}

double prediction_mse(const FitResult& fit, const Dataset& test,
                      const Dataset& train) {
    if (test.n() == 0) throw invalid_argument("empty test set");
    double acc = 0.0;
    for (const auto& s : test.samples) {
        const double yhat = predict(fit, s, train);
        acc += (s.response - yhat) * (s.response - yhat);
    }
    return acc / test.n();
}

}  // namespace funfuse
