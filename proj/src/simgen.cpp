#include "funfuse/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "funfuse/errors.hpp"
#include "funfuse/quadrature.hpp"

namespace funfuse {

Scenario scenario_from_string(const std::string& s) {
    if (s == "s1") return Scenario::S1_nonlinear;
    if (s == "s2") return Scenario::S2_linear;
    if (s == "ex2") return Scenario::EX2_three;
    throw invalid_argument("unknown scenario: " + s);
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::S1_nonlinear: return "s1";
        case Scenario::S2_linear: return "s2";
        case Scenario::EX2_three: return "ex2";
    }
    throw invalid_argument("unknown scenario value");
}

std::vector<std::function<double(double)>> scenario_coefficients(Scenario s) {
    switch (s) {
        case Scenario::S1_nonlinear:
            return {[](double t) { return 4.0 * std::sin(M_PI * t) - 1.0; },
                    [](double t) { return 10.0 * (t - 0.5) * (t - 0.5) - 2.0; }};
        case Scenario::S2_linear:
            return {[](double t) { return 3.0 * t + 2.0; },
                    [](double t) { return 3.0 * t - 2.0; }};
        case Scenario::EX2_three:
            return {[](double t) { return -6.0 * t + 2.0; },
                    [](double t) {
                        return 6.0 * t * t * t + 10.0 * t * t - 10.0 * t - 3.0;
                    },
                    [](double t) {
                        return -std::exp(2.0 * t) + 3.0 * std::sin(2.0 * t) + 1.5;
                    }};
    }
    throw invalid_argument("unknown scenario value");
}

std::vector<int> group_sizes(const ScenarioSpec& spec) {
    const int k = spec.scenario == Scenario::EX2_three ? 3 : 2;
    std::vector<int> ratio;
    if (spec.structure == Structure::Balanced)
        ratio.assign(k, 1);
    else
        ratio = (k == 2) ? std::vector<int>{1, 3} : std::vector<int>{2, 3, 5};
    const int total = std::accumulate(ratio.begin(), ratio.end(), 0);
    if (spec.n <= 0 || spec.n % total != 0)
        throw invalid_argument("sample size is not divisible by the group ratio");
    std::vector<int> sizes(k);
    for (int g = 0; g < k; ++g) sizes[g] = spec.n / total * ratio[g];
    return sizes;
}

std::pair<Dataset, TruthRecord> generate(const ScenarioSpec& spec) {
    if (spec.grid_points < 2) throw invalid_argument("need at least 2 grid points");
    const auto xi = scenario_coefficients(spec.scenario);
    const auto sizes = group_sizes(spec);
    const int n = spec.n;
    const int k = static_cast<int>(sizes.size());

    BSplineBasis cov(spec.covariate_order, spec.covariate_knots, {0.0, 1.0});
    const int pc = cov.dim();

    // c(k, l) = \int B~_l(t) xi_k(t) dt, per-span quadrature against the
    // closed forms (16 points is beyond exactness for the polynomial part and
    // machine precision for the smooth ones).
    Eigen::MatrixXd c(k, pc);
    const auto& rule = GaussLegendre::rule(16);
    c.setZero();
    const auto& brk = cov.breakpoints();
    for (size_t s = 0; s + 1 < brk.size(); ++s) {
        const double mid = 0.5 * (brk[s] + brk[s + 1]);
        const double half = 0.5 * (brk[s + 1] - brk[s]);
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            const Eigen::VectorXd b = cov.eval(t);
            for (int g = 0; g < k; ++g)
                c.row(g) += (half * rule.weights[q] * xi[g](t)) * b.transpose();
        }
    }

    std::mt19937_64 rng(spec.seed);

    TruthRecord truth;
    truth.scenario = spec.scenario;
    truth.xi = xi;
    truth.labels.reserve(n);
    for (int g = 0; g < k; ++g)
        truth.labels.insert(truth.labels.end(), sizes[g], g);
    std::shuffle(truth.labels.begin(), truth.labels.end(), rng);
    truth.partition.assign(k, {});
    for (int i = 0; i < n; ++i) truth.partition[truth.labels[i]].push_back(i);

    Dataset ds(BSplineBasis(4, 8, {0.0, 1.0}));
    ds.covariate_basis = cov;
    ds.coeffs.resize(n, pc);
    ds.weights = Eigen::MatrixXd::Ones(n, n);
    ds.samples.resize(n);

    Eigen::VectorXd grid(spec.grid_points);
    for (int j = 0; j < spec.grid_points; ++j)
        grid[j] = static_cast<double>(j) / (spec.grid_points - 1);
    Eigen::MatrixXd bgrid(spec.grid_points, pc);
    for (int j = 0; j < spec.grid_points; ++j)
        bgrid.row(j) = cov.eval(grid[j]).transpose();

    std::normal_distribution<double> norm(2.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 4.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd a(pc);
        for (int l = 0; l < pc; ++l)
            a[l] = spec.coeff_dist == CoeffDist::Norm ? norm(rng) : unif(rng);
        const double eps = noise(rng);
        ds.coeffs.row(i) = a.transpose();
        auto& s = ds.samples[i];
        s.subject_id = std::to_string(i + 1);
        s.grid = grid;
        s.values = bgrid * a;
        s.response = c.row(truth.labels[i]).dot(a) + spec.noise_sd * eps;
    }
    return {std::move(ds), std::move(truth)};
}

double l2_distance(const std::function<double(double)>& f,
                   const std::function<double(double)>& g) {
    const double v = gauss_integrate_composite(
        [&](double t) {
            const double d = f(t) - g(t);
            return d * d;
        },
        0.0, 1.0, 32, 8);
    return std::sqrt(std::max(0.0, v));
}

}  // namespace funfuse
