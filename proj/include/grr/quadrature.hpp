#pragma once

#include <functional>
#include <vector>

namespace grr {

// Gauss-Legendre rule on [-1,1]; nodes ascending.  Computed once per order by
// Newton iteration on the Legendre polynomial.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// integral of f over [a,b] with one fixed-order panel
double integrate_panel(const std::function<double(double)>& f, double a, double b, int order = 16);

// integral over [a,b] split into `panels` equal panels
double integrate_uniform(const std::function<double(double)>& f, double a, double b,
                         int panels, int order = 16);

struct TailIntegral {
    double value = 0;
    bool divergent = false;
};

// integral of f over (0, b] for integrands with integrable endpoint
// singularities (blow-up at 0, branch point at b): geometric panel
// subdivision toward zero, stopping when a panel contributes less than
// rel_tol of the running total.  Flags divergence when panel contributions
// fail to decay.
TailIntegral integrate_to_zero(const std::function<double(double)>& f, double b,
                               double rel_tol = 1e-12, int order = 16, int max_levels = 2048);

} // namespace grr
