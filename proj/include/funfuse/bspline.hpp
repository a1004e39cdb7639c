#pragma once

#include <Eigen/Dense>
#include <vector>

namespace funfuse {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
};

/// Clamped B-spline basis of order q (degree q-1) with m equally spaced
/// interior knots on [lo, hi]. Immutable after construction; dim() = m + q.
class BSplineBasis {
public:
    BSplineBasis(int order, int n_interior_knots, Interval domain = {0.0, 1.0});

    int order() const { return order_; }
    int interior_knots() const { return interior_; }
    int dim() const { return interior_ + order_; }
    const Interval& domain() const { return domain_; }

    /// Full clamped knot vector, boundary knots repeated `order` times.
    const std::vector<double>& knots() const { return knots_; }

    /// Distinct knots lo = b_0 < ... < b_{m+1} = hi delimiting the spans.
    const std::vector<double>& breakpoints() const { return breaks_; }

    /// Values (B_1(t), ..., B_p(t)). At t = hi the left limit is returned, so
    /// the last basis function evaluates to 1 there.
    Eigen::VectorXd eval(double t) const;

    /// Second derivatives (B_1''(t), ..., B_p''(t)); requires order >= 3.
    Eigen::VectorXd eval_d2(double t) const;

    /// Roughness Gram matrix G0 with (G0)_{sl} = \int B_s'' B_l'' dt, computed
    /// by exact per-span Gauss-Legendre quadrature; requires order >= 3.
    Eigen::MatrixXd gram_d2() const;

    /// Weighted least-squares coefficients of the sampled function `values`
    /// on `grid` (trapezoid quadrature weights).
    Eigen::VectorXd project(const Eigen::VectorXd& grid,
                            const Eigen::VectorXd& values) const;

private:
    // Values of every degree-`deg` basis function at t (left limit at hi).
    std::vector<double> eval_degree(double t, int deg) const;

    int order_;
    int interior_;
    Interval domain_;
    std::vector<double> knots_;
    std::vector<double> breaks_;
};

/// M_{sl} = \int B_s^{(a)}(t) B_l^{(b)}(t) dt on the shared domain, exact
/// per-span Gauss-Legendre over the union of both breakpoint sets.
Eigen::MatrixXd cross_gram(const BSplineBasis& a, const BSplineBasis& b);

}  // namespace funfuse
