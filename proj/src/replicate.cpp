#include "funfuse/replicate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "funfuse/baselines.hpp"
#include "funfuse/errors.hpp"
#include "funfuse/metrics.hpp"
#include "funfuse/parallel.hpp"

namespace funfuse {

namespace {

std::vector<double> collect(const ReplicateSummary& s, const std::string& method,
                            double ReplicateRow::*field) {
    std::vector<double> v;
    for (const auto& r : s.rows)
        if (r.method == method && !r.failed) v.push_back(r.*field);
    return v;
}

}  // namespace

double ReplicateSummary::mean(const std::string& method,
                              double ReplicateRow::*field) const {
    const auto v = collect(*this, method, field);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double ReplicateSummary::sd(const std::string& method,
                            double ReplicateRow::*field) const {
    const auto v = collect(*this, method, field);
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(method, field);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

double ReplicateSummary::k_rate(const std::string& method, int k) const {
    int total = 0, hit = 0;
    for (const auto& r : rows)
        if (r.method == method && !r.failed) {
            ++total;
            if (r.k_hat == k) ++hit;
        }
    return total > 0 ? static_cast<double>(hit) / total
                     : std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::pair<int, int>> ReplicateSummary::k_histogram(
    const std::string& method) const {
    std::map<int, int> hist;
    for (const auto& r : rows)
        if (r.method == method && !r.failed) ++hist[r.k_hat];
    return {hist.begin(), hist.end()};
}

ReplicateSummary run_replicates(const ReplicateSpec& spec) {
    if (spec.reps < 1) throw invalid_argument("reps must be >= 1");
    const auto l2grid =
        spec.lambda2_grid.empty() ? default_lambda2_grid() : spec.lambda2_grid;
    const auto l1grid =
        spec.lambda1_grid.empty() ? default_lambda1_grid() : spec.lambda1_grid;

    std::vector<std::vector<ReplicateRow>> per_rep(spec.reps);
    parallel_for(spec.reps, spec.threads, [&](int rep) {
        ScenarioSpec sc = spec.scenario;
        sc.seed = spec.scenario.seed + static_cast<std::uint64_t>(rep);
        auto [dataset, truth] = generate(sc);
        const Problem pb = assemble(dataset);
        const int true_k = static_cast<int>(truth.partition.size());

        for (const auto& method : spec.methods) {
            ReplicateRow row;
            row.rep = rep;
            row.method = method;
            try {
                FitResult fit;
                if (method == "proposed") {
                    auto report =
                        two_step_tune(pb, l2grid, l1grid, spec.rounds, spec.base, 1);
                    fit = std::move(report.fit);
                } else if (method == "oracle") {
                    fit = oracle_fit(pb, truth, l1grid);
                } else if (method == "resp") {
                    fit = resp_fit(pb, true_k, l1grid, sc.seed);
                } else if (method == "resi") {
                    fit = resi_fit(pb, true_k, l1grid, sc.seed);
                } else {
                    throw invalid_argument("unknown method: " + method);
                }
                row.ari = adjusted_rand_index(fit.partition, truth.partition);
                row.mse = coef_mse(fit, truth, dataset.basis);
                row.k_hat = fit.k_hat;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            per_rep[rep].push_back(std::move(row));
        }
    });

    ReplicateSummary summary;
    for (auto& rows : per_rep)
        for (auto& row : rows) summary.rows.push_back(std::move(row));
    return summary;
}

void write_summary_csv(const std::string& path, const ReplicateSummary& summary,
                       const std::vector<std::string>& methods) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    auto cell = [](double v) {
        if (std::isnan(v)) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    out << "method,ari_mean,ari_sd,mse_mean,mse_sd,khat_mean,khat_sd\n";
    for (const auto& m : methods) {
        out << m << ',' << cell(summary.mean(m, &ReplicateRow::ari)) << ','
            << cell(summary.sd(m, &ReplicateRow::ari)) << ','
            << cell(summary.mean(m, &ReplicateRow::mse)) << ','
            << cell(summary.sd(m, &ReplicateRow::mse)) << ',';
        double n = 0, s = 0;
        for (const auto& r : summary.rows)
            if (r.method == m && !r.failed) {
                s += r.k_hat;
                ++n;
            }
        const double mean = n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
        double var = std::numeric_limits<double>::quiet_NaN();
        if (n > 1) {
            var = 0;
            for (const auto& r : summary.rows)
                if (r.method == m && !r.failed)
                    var += (r.k_hat - mean) * (r.k_hat - mean);
            var = std::sqrt(var / (n - 1));
        }
        out << cell(mean) << ',' << cell(var) << "\n";
    }
}

void write_khat_hist_csv(const std::string& path, const ReplicateSummary& summary,
                         const std::string& method) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << "khat,count\n";
    for (const auto& [k, count] : summary.k_histogram(method))
        out << k << ',' << count << "\n";
}

}  // namespace funfuse
