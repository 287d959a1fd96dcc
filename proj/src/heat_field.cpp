#include "grr/heat_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <stdexcept>

#include "grr/parallel.hpp"
#include "grr/quadrature.hpp"
#include "grr/special_functions.hpp"

namespace grr {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kInvSqrtPi = 0.5641895835477563;    // 1/sqrt(pi)

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

// (1/sqrt(pi)) sum_{k>=1} (-1)^(k+1) (2k-1)!! / (2 z^2)^k, the asymptotic
// series for 1/sqrt(pi) - z erfcx(z).  Alternating with decreasing terms for
// z^2 > k, so truncation error is below the first omitted term.
double tail_series(double z) {
    const double inv = 1.0 / (2.0 * z * z);
    double term = inv;  // k = 1
    double sum = term;
    for (int k = 2; k <= 40; ++k) {
        term *= -(2.0 * k - 1.0) * inv;
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return kInvSqrtPi * sum;
}

} // namespace

double kernel_time_integral(double T, double delta) {
    require_nonnegative(T, "T");
    require_nonnegative(delta, "delta");
    if (T == 0) return 0.0;
    if (delta == 0) return std::sqrt(T) * kSqrt2OverPi;
    const double s = std::sqrt(2.0 * T);
    const double z = delta / s;
    if (z < 6.0) {
        // direct closed form; the two terms agree to O(z^2) relative error,
        // acceptable while z is moderate
        return s * kInvSqrtPi * std::exp(-z * z) - delta * erfc_approx(z);
    }
    // deep tail: both terms above are ~e^(-z^2) and cancel to leading order,
    // so switch to the expansion of their difference
    return s * std::exp(-z * z) * tail_series(z);
}

double kernel_gap_integral(double T, double delta) {
    require_nonnegative(T, "T");
    require_nonnegative(delta, "delta");
    if (T == 0 || delta == 0) return 0.0;
    const double s = std::sqrt(2.0 * T);
    const double z = delta / s;
    return s * kInvSqrtPi * -std::expm1(-z * z) + delta * erfc_approx(z);
}

double heat_cov(HeatPoint a, HeatPoint b) {
    require_nonnegative(a.t, "t");
    require_nonnegative(b.t, "t");
    if (a.t == 0 || b.t == 0) return 0.0;
    const double d = std::fabs(a.y - b.y);
    return 0.5 * (kernel_time_integral(a.t + b.t, d) -
                  kernel_time_integral(std::fabs(a.t - b.t), d));
}

double heat_sq_increment(double s, double t, double x, double y) {
    require_nonnegative(s, "s");
    require_nonnegative(t, "t");
    const double d = std::fabs(x - y);
    return kernel_gap_integral(2.0 * s, d) + kernel_gap_integral(2.0 * t, d) -
           2.0 * kernel_gap_integral(s + t, d) +
           2.0 * kernel_gap_integral(std::fabs(s - t), d);
}

double heat_sq_increment_corners(double s, double t, double x, double y) {
    const HeatPoint a{s, x}, b{s, y}, c{t, x}, d{t, y};
    double v = heat_cov(a, a) + heat_cov(b, b) + heat_cov(c, c) + heat_cov(d, d);
    v += 2.0 * (heat_cov(a, d) + heat_cov(b, c) - heat_cov(a, b) -
                heat_cov(a, c) - heat_cov(b, d) - heat_cov(c, d));
    return v;
}

HeatIncrementBound heat_sq_increment_bound(double s, double t, double x, double y,
                                           double alpha) {
    if (!(alpha >= 0.0 && alpha <= 0.5))
        throw std::invalid_argument("alpha must lie in [0, 1/2]");
    HeatIncrementBound out;
    const double gap = std::fabs(s - t);
    const double d = std::fabs(x - y);
    out.value = heat_sq_increment(s, t, x, y);
    out.bound1 = 2.0 * kernel_gap_integral(gap, d);
    if (gap == 0 && d == 0) {
        out.bound2 = 0.0;
    } else {
        // bound1 = sqrt(2/pi) J(gap, d) with J the r^(-1/2) gap integral;
        // substituting x = d/sqrt(2r) gives J = sqrt(2) d int_{x0}^inf
        // x^(-2)(1-e^(-x^2)) dx, and the two branches of that integral
        // (x0 >= 1: integrand <= x^(-2); x0 < 1: full integral sqrt(pi))
        // yield explicit constants
        const double x0 = gap == 0 ? std::numeric_limits<double>::infinity()
                                   : d / std::sqrt(2.0 * gap);
        const double c = x0 >= 1.0 ? 2.0 : 2.0 * std::sqrt(std::numbers::pi);
        out.bound2 = kSqrt2OverPi * c * std::pow(2.0, -alpha) *
                     std::pow(d, 2.0 * alpha) * std::pow(gap, 0.5 - alpha);
    }
    if (out.value > out.bound1 * (1.0 + 1e-12) + 1e-15)
        throw std::logic_error("increment variance exceeded its first bound");
    return out;
}

KernelTailBrackets kernel_tail_brackets(double a, double b, double delta) {
    if (!(a > 0) || !(b >= a)) throw std::invalid_argument("need 0 < a <= b");
    require_nonnegative(delta, "delta");
    KernelTailBrackets out;
    const double d2 = delta * delta;
    const double ra = std::sqrt(a), rb = std::sqrt(b);
    // substitution r = v^2 removes the r^(-1/2) factor
    auto f = [d2](double v) { return -std::expm1(-d2 / (2.0 * v * v)); };

    // geometric panels, 8 per octave: resolves the transition layer at
    // v ~ delta wherever it falls in [ra, rb]
    {
        KahanSum acc;
        double lo = ra;
        while (lo < rb) {
            double hi = std::min(rb, lo * 1.0905077326652577);  // 2^(1/8)
            if (hi <= lo) break;
            acc.add(integrate_panel(f, lo, hi, 16));
            lo = hi;
        }
        out.I_quadrature = 2.0 * acc.sum;
    }
    out.lower = 2.0 * (rb - ra) * -std::expm1(-d2 / (2.0 * b));
    out.upper = 2.0 * (rb - ra) * -std::expm1(-d2 / (2.0 * a));

    TailIntegral j = integrate_to_zero(f, ra, 1e-13);
    out.J_quadrature = 2.0 * j.value;
    out.J_identity = 2.0 * ra * -std::expm1(-d2 / (2.0 * a)) +
                     std::sqrt(2.0 * std::numbers::pi) * delta * erfc_approx(delta / std::sqrt(2.0 * a));
    return out;
}

double rho(double u) {
    require_nonnegative(u, "u");
    if (u == 0) return 0.0;
    // r = v^2 on [0, min(u,1)]
    auto head = [](double v) { return -std::expm1(-1.0 / (v * v)); };
    // w = 1/r then w = v^2 on the tail over [1, u]
    auto tail = [](double v) { return v == 0 ? 1.0 : -std::expm1(-v * v) / (v * v); };

    if (u <= 1.0) {
        TailIntegral h = integrate_to_zero(head, std::sqrt(u), 1e-13);
        return kSqrt2OverPi * 2.0 * h.value;
    }
    TailIntegral h = integrate_to_zero(head, 1.0, 1e-13);
    double total = 2.0 * h.value;
    if (std::isinf(u)) {
        TailIntegral t = integrate_to_zero(tail, 1.0, 1e-13);
        total += 2.0 * t.value;
    } else {
        total += 2.0 * integrate_uniform(tail, 1.0 / std::sqrt(u), 1.0, 64, 16);
    }
    return kSqrt2OverPi * total;
}

KernelIntegralTable::KernelIntegralTable(std::vector<double> t_values,
                                         std::vector<double> d_values)
    : t_(std::move(t_values)), d_(std::move(d_values)) {
    auto check = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] >= 0) || !std::isfinite(v[i]))
                throw std::invalid_argument(std::string(what) + " grid must be finite and >= 0");
            if (i > 0 && !(v[i] > v[i - 1]))
                throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
        }
    };
    check(t_, "T");
    check(d_, "delta");
    values_.resize(t_.size() * d_.size());
    for (std::size_t i = 0; i < t_.size(); ++i)
        for (std::size_t j = 0; j < d_.size(); ++j)
            values_[i * d_.size() + j] = kernel_gap_integral(t_[i], d_[j]);
}

double KernelIntegralTable::lookup(double T, double delta) const {
    auto find = [](const std::vector<double>& v, double x, const char* what) {
        auto it = std::lower_bound(v.begin(), v.end(), x - 1e-12);
        if (it == v.end() || std::fabs(*it - x) > 1e-12)
            throw std::domain_error(std::string(what) + " value is not a grid node");
        return static_cast<std::size_t>(it - v.begin());
    };
    return at(find(t_, T, "T"), find(d_, delta, "delta"));
}

} // namespace grr
