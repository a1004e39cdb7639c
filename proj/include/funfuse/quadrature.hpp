#pragma once

#include <functional>
#include <vector>

namespace funfuse {

/// Gauss-Legendre nodes and weights on [-1, 1], cached per point count.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& rule(int npoints);
};

/// Integrate f over [a, b] with a single n-point Gauss-Legendre rule.
double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int npoints);

/// Composite rule: `panels` equal panels of `npoints` each over [a, b].
double gauss_integrate_composite(const std::function<double(double)>& f, double a,
                                 double b, int panels, int npoints);

}  // namespace funfuse
