#include "funfuse/design.hpp"

#include <algorithm>
#include <cmath>

#include "funfuse/errors.hpp"

namespace funfuse {

Eigen::RowVectorXd design_row_from_grid(const FunctionalSample& sample,
                                        const BSplineBasis& basis) {
    const int ng = static_cast<int>(sample.grid.size());
    if (ng < 2 || sample.values.size() != ng)
        throw invalid_argument("sample needs >= 2 grid points and matching values");
    const auto& dom = basis.domain();
    const double span = sample.grid[ng - 1] - sample.grid[0];
    if (span < 0.95 * dom.length())
        throw insufficient_coverage("observation grid covers less than 95% of the domain");

    Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(basis.dim());
    Eigen::VectorXd prev = basis.eval(sample.grid[0]);
    for (int k = 0; k + 1 < ng; ++k) {
        const Eigen::VectorXd next = basis.eval(sample.grid[k + 1]);
        const double dt = sample.grid[k + 1] - sample.grid[k];
        h.noalias() += 0.5 * dt *
                       (sample.values[k] * prev + sample.values[k + 1] * next)
                           .transpose();
        prev = next;
    }
    return h;
}

Eigen::RowVectorXd design_row_from_coeffs(const Eigen::VectorXd& a,
                                          const BSplineBasis& covariate_basis,
                                          const BSplineBasis& basis) {
    if (a.size() != covariate_basis.dim())
        throw invalid_argument("coefficient length does not match covariate basis");
    return a.transpose() * cross_gram(covariate_basis, basis);
}

Problem assemble(const Dataset& dataset) {
    const int n = dataset.n();
    if (n == 0) throw invalid_argument("empty dataset");
    const int p = dataset.basis.dim();

    Problem pb;
    pb.rows.resize(n, p);
    pb.y.resize(n);
    std::optional<Eigen::MatrixXd> xg;  // shared cross-Gram for the exact path
    if (dataset.has_coeffs()) {
        if (!dataset.covariate_basis)
            throw invalid_argument("covariate coefficients given without a covariate basis");
        xg = cross_gram(*dataset.covariate_basis, dataset.basis);
    }
    for (int i = 0; i < n; ++i) {
        if (xg)
            pb.rows.row(i) = dataset.coeffs.row(i) * (*xg);
        else
            pb.rows.row(i) = design_row_from_grid(dataset.samples[i], dataset.basis);
        pb.y[i] = dataset.samples[i].response;
    }
    pb.gram_d2 = dataset.basis.gram_d2();
    pb.weights = dataset.weights.size() > 0 ? dataset.weights
                                            : Eigen::MatrixXd::Ones(n, n);
    return pb;
}

double haversine_km(double lon1, double lat1, double lon2, double lat2) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double deg = M_PI / 180.0;
    const double dlat = (lat2 - lat1) * deg;
    const double dlon = (lon2 - lon1) * deg;
    const double a = std::sin(0.5 * dlat) * std::sin(0.5 * dlat) +
                     std::cos(lat1 * deg) * std::cos(lat2 * deg) *
                         std::sin(0.5 * dlon) * std::sin(0.5 * dlon);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

Eigen::MatrixXd spherical_weights(const Dataset& dataset) {
    const int n = dataset.n();
    for (const auto& s : dataset.samples)
        if (!s.location) throw missing_location("sample lacks a (lon, lat) location");

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> finite;
    finite.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        const auto& a = *dataset.samples[i].location;
        for (int j = i + 1; j < n; ++j) {
            const auto& b = *dataset.samples[j].location;
            const double d = haversine_km(a[0], a[1], b[0], b[1]);
            const double wij = d > 0.0 ? 1.0 / d
                                       : std::numeric_limits<double>::infinity();
            w(i, j) = w(j, i) = wij;
            if (std::isfinite(wij)) finite.push_back(wij);
        }
    }
    if (finite.empty()) throw invalid_argument("weights need at least two subjects");

    // Coincident stations get the 99th percentile of the finite weights.
    std::sort(finite.begin(), finite.end());
    const size_t q99 = std::min(finite.size() - 1,
                                static_cast<size_t>(0.99 * (finite.size() - 1) + 0.5));
    const double cap = finite[q99];
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (!std::isfinite(w(i, j))) w(i, j) = w(j, i) = cap;
            sum += w(i, j);
        }
    const double mean = sum / (0.5 * n * (n - 1));
    w /= mean;
    w.diagonal().setZero();
    return w;
}

}  // namespace funfuse
