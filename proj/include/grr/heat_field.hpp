#pragma once

#include <cstddef>
#include <vector>

namespace grr {

// Space-time point for the additive-noise heat equation on the line with
// zero initial condition.
struct HeatPoint {
    double t;  // time >= 0
    double y;  // space
};

// G(T, delta) = integral over (0,T] of p_r(delta) dr where p_r is the heat
// kernel (2*pi*r)^(-1/2) exp(-delta^2/(2r)).  Closed form
// sqrt(2T/pi) e^(-delta^2/(2T)) - delta erfc(delta/sqrt(2T)), evaluated in a
// cancellation-safe way for delta >> sqrt(T).
double kernel_time_integral(double T, double delta);

// F(T, delta) = integral over (0,T] of [p_r(0) - p_r(delta)] dr
//             = sqrt(2T/pi) (1 - e^(-delta^2/(2T))) + delta erfc(delta/sqrt(2T))
double kernel_gap_integral(double T, double delta);

// E[u(s,x) u(t,y)] = 1/2 * integral over [|t-s|, s+t] of p_w(x-y) dw;
// zero when either time is zero.
double heat_cov(HeatPoint a, HeatPoint b);

// E[(u(s,x) - u(s,y) - u(t,x) + u(t,y))^2] via the three-interval kernel
// decomposition: F(2s,d) + F(2t,d) - 2F(s+t,d) + 2F(|s-t|,d), d = |x-y|.
double heat_sq_increment(double s, double t, double x, double y);

// The same variance assembled from the four corner covariances (reference
// path for consistency checks).
double heat_sq_increment_corners(double s, double t, double x, double y);

struct HeatIncrementBound {
    double value = 0;
    double bound1 = 0;  // 2 F(|s-t|, |x-y|)
    double bound2 = 0;  // c(branch) 2^(-alpha) sqrt(2/pi) |x-y|^(2a) |s-t|^(1/2-a)
};

// Increment variance against its two upper bounds, alpha in [0, 1/2]; checks
// value <= bound1 (the discarded bracket has a sign) and returns all three.
// bound2 uses branch constants split at |x-y|/sqrt(2|s-t|) = 1.
HeatIncrementBound heat_sq_increment_bound(double s, double t, double x, double y, double alpha);

struct KernelTailBrackets {
    double I_quadrature = 0;  // integral over [a,b] of r^(-1/2)(1-e^(-delta^2/(2r)))
    double lower = 0;         // 2(sqrt b - sqrt a)(1 - e^(-delta^2/(2b)))
    double upper = 0;         // 2(sqrt b - sqrt a)(1 - e^(-delta^2/(2a)))
    double J_quadrature = 0;  // same integrand over (0,a]
    double J_identity = 0;    // 2 sqrt(a)(1-e^(-delta^2/(2a))) + sqrt(2 pi) delta erfc(delta/sqrt(2a))
};

KernelTailBrackets kernel_tail_brackets(double a, double b, double delta);

// rho(u) = sqrt(2/pi) * integral over (0,u] of r^(-1/2)(1 - e^(-1/r)) dr;
// accepts u = +infinity (value 2 sqrt 2).
double rho(double u);

// Cached F(T, delta) values on a rectangular (T, delta) grid.
class KernelIntegralTable {
public:
    KernelIntegralTable(std::vector<double> t_values, std::vector<double> d_values);

    double at(std::size_t i, std::size_t j) const { return values_[i * d_.size() + j]; }
    // exact-node lookup (no interpolation)
    double lookup(double T, double delta) const;

    const std::vector<double>& t_values() const { return t_; }
    const std::vector<double>& d_values() const { return d_; }

private:
    std::vector<double> t_, d_, values_;
};

} // namespace grr
