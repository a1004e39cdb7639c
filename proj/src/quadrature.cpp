#include "funfuse/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "funfuse/errors.hpp"

namespace funfuse {

namespace {

// Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev-based initial guess.
GaussLegendre compute_rule(int n) {
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

const GaussLegendre& GaussLegendre::rule(int npoints) {
    if (npoints < 1) throw invalid_argument("Gauss-Legendre rule needs >= 1 point");
    static std::map<int, GaussLegendre> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(npoints);
    if (it == cache.end()) it = cache.emplace(npoints, compute_rule(npoints)).first;
    return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int npoints) {
    const auto& r = GaussLegendre::rule(npoints);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < npoints; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

double gauss_integrate_composite(const std::function<double(double)>& f, double a,
                                 double b, int panels, int npoints) {
    double s = 0.0;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k)
        s += gauss_integrate(f, a + k * h, a + (k + 1) * h, npoints);
    return s;
}

}  // namespace funfuse
