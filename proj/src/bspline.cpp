#include "funfuse/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "funfuse/errors.hpp"
#include "funfuse/quadrature.hpp"

namespace funfuse {

BSplineBasis::BSplineBasis(int order, int n_interior_knots, Interval domain)
    : order_(order), interior_(n_interior_knots), domain_(domain) {
    if (order < 1) throw invalid_argument("B-spline order must be >= 1");
    if (n_interior_knots < 0) throw invalid_argument("number of interior knots must be >= 0");
    if (!(domain.length() > 0.0)) throw invalid_argument("degenerate basis domain");

    const int m = interior_;
    breaks_.resize(m + 2);
    for (int l = 0; l <= m + 1; ++l)
        breaks_[l] = domain_.lo + l * domain_.length() / (m + 1);
    breaks_.front() = domain_.lo;
    breaks_.back() = domain_.hi;

    knots_.reserve(m + 2 * order_);
    knots_.assign(order_, domain_.lo);
    for (int l = 1; l <= m; ++l) knots_.push_back(breaks_[l]);
    knots_.insert(knots_.end(), order_, domain_.hi);
}

std::vector<double> BSplineBasis::eval_degree(double t, int deg) const {
    const int nk = static_cast<int>(knots_.size());
    // Degree-0 indicators, taking the left limit at the right endpoint.
    std::vector<double> v(nk - 1, 0.0);
    for (int j = 0; j + 1 < nk; ++j) {
        const bool inside = knots_[j] <= t && t < knots_[j + 1];
        const bool at_end = t == domain_.hi && knots_[j] < knots_[j + 1] &&
                            knots_[j + 1] == domain_.hi;
        if (inside || at_end) v[j] = 1.0;
    }
    // Cox-de Boor, with 0/0 terms dropped (repeated knots).
    for (int k = 1; k <= deg; ++k) {
        for (int j = 0; j + k + 1 < nk; ++j) {
            double acc = 0.0;
            const double dl = knots_[j + k] - knots_[j];
            if (dl > 0.0) acc += (t - knots_[j]) / dl * v[j];
            const double dr = knots_[j + k + 1] - knots_[j + 1];
            if (dr > 0.0) acc += (knots_[j + k + 1] - t) / dr * v[j + 1];
            v[j] = acc;
        }
        v.resize(nk - 1 - k);
    }
    return v;
}

Eigen::VectorXd BSplineBasis::eval(double t) const {
    if (t < domain_.lo || t > domain_.hi)
        throw out_of_domain("evaluation point outside the basis domain");
    const auto v = eval_degree(t, order_ - 1);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), dim());
}

Eigen::VectorXd BSplineBasis::eval_d2(double t) const {
    if (order_ < 3)
        throw unsupported_order("second derivative needs B-spline order >= 3");
    if (t < domain_.lo || t > domain_.hi)
        throw out_of_domain("evaluation point outside the basis domain");

    const int deg = order_ - 1;
    const auto base = eval_degree(t, deg - 2);

    // First derivatives of the degree-(deg-1) functions.
    std::vector<double> d1(base.size() - 1, 0.0);
    for (int j = 0; j + 1 < static_cast<int>(base.size()); ++j) {
        double acc = 0.0;
        const double dl = knots_[j + deg - 1] - knots_[j];
        if (dl > 0.0) acc += base[j] / dl;
        const double dr = knots_[j + deg] - knots_[j + 1];
        if (dr > 0.0) acc -= base[j + 1] / dr;
        d1[j] = (deg - 1) * acc;
    }
    // Second derivatives of the degree-deg functions.
    Eigen::VectorXd d2 = Eigen::VectorXd::Zero(dim());
    for (int j = 0; j < dim(); ++j) {
        double acc = 0.0;
        const double dl = knots_[j + deg] - knots_[j];
        if (dl > 0.0) acc += d1[j] / dl;
        const double dr = knots_[j + deg + 1] - knots_[j + 1];
        if (dr > 0.0) acc -= d1[j + 1] / dr;
        d2[j] = deg * acc;
    }
    return d2;
}

Eigen::MatrixXd BSplineBasis::gram_d2() const {
    if (order_ < 3)
        throw unsupported_order("roughness Gram matrix needs B-spline order >= 3");
    const int p = dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    // Integrand is piecewise polynomial of degree 2(q-3) on each span.
    const int npts = order_ - 2;
    const auto& rule = GaussLegendre::rule(npts);
    for (size_t s = 0; s + 1 < breaks_.size(); ++s) {
        const double mid = 0.5 * (breaks_[s] + breaks_[s + 1]);
        const double half = 0.5 * (breaks_[s + 1] - breaks_[s]);
        for (int i = 0; i < npts; ++i) {
            const Eigen::VectorXd d2 = eval_d2(mid + half * rule.nodes[i]);
            g.noalias() += (half * rule.weights[i]) * d2 * d2.transpose();
        }
    }
    g = 0.5 * (g + g.transpose()).eval();
    return g;
}

Eigen::VectorXd BSplineBasis::project(const Eigen::VectorXd& grid,
                                      const Eigen::VectorXd& values) const {
    const int ng = static_cast<int>(grid.size());
    if (ng != values.size()) throw invalid_argument("grid/values length mismatch");
    if (ng < dim())
        throw rank_deficiency("projection grid has fewer points than basis dimension");
    for (int i = 0; i < ng; ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw invalid_argument("projection grid must be strictly increasing");
        if (grid[i] < domain_.lo || grid[i] > domain_.hi)
            throw out_of_domain("projection grid point outside the basis domain");
    }

    Eigen::VectorXd w(ng);
    w.setZero();
    for (int i = 0; i + 1 < ng; ++i) {
        const double h = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }

    Eigen::MatrixXd design(ng, dim());
    for (int i = 0; i < ng; ++i)
        design.row(i) = std::sqrt(w[i]) * eval(grid[i]).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < dim())
        throw rank_deficiency("projection design is rank deficient");
    return qr.solve((w.array().sqrt() * values.array()).matrix());
}

Eigen::MatrixXd cross_gram(const BSplineBasis& a, const BSplineBasis& b) {
    if (a.domain().lo != b.domain().lo || a.domain().hi != b.domain().hi)
        throw invalid_argument("cross Gram requires a shared domain");

    std::vector<double> cuts;
    cuts.reserve(a.breakpoints().size() + b.breakpoints().size());
    cuts.insert(cuts.end(), a.breakpoints().begin(), a.breakpoints().end());
    cuts.insert(cuts.end(), b.breakpoints().begin(), b.breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.dim(), b.dim());
    const int npts = ((a.order() - 1) + (b.order() - 1)) / 2 + 1;
    const auto& rule = GaussLegendre::rule(npts);
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
        const double half = 0.5 * (cuts[s + 1] - cuts[s]);
        if (half <= 0.0) continue;
        for (int i = 0; i < npts; ++i) {
            const double t = mid + half * rule.nodes[i];
            m.noalias() +=
                (half * rule.weights[i]) * a.eval(t) * b.eval(t).transpose();
        }
    }
    return m;
}

}  // namespace funfuse
