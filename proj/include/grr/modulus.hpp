#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "grr/field_grid.hpp"

namespace grr {

// Young function Psi: the two families used by the continuity bounds.
class YoungFunction {
public:
    enum class Kind { power, exp_quarter_square };

    static YoungFunction power(double alpha);
    static YoungFunction exp_quarter_square();
    // "pow:<alpha>" or "expq"
    static YoungFunction parse(std::string_view text);

    double operator()(double u) const;

    // generalized inverse sup{v : Psi(v) <= u}; for exp_quarter_square this is
    // 0 on [0,1) (empty level set) and 2*sqrt(log u) above
    double inverse(double u) const;

    double value_at_zero() const;

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    std::string to_string() const;

private:
    YoungFunction(Kind k, double a) : kind_(k), alpha_(a) {}
    Kind kind_;
    double alpha_;
};

// domain-checked wrapper: throws below Psi(0)
double psi_inverse(const YoungFunction& psi, double u);

// Modulus p: continuous, non-decreasing, p(0)=0, on [0,1].
class ModulusFunction {
public:
    enum class Kind { power, tabulated };

    // p(u) = scale * u^gamma
    static ModulusFunction power(double gamma, double scale = 1.0);
    // linear interpolation through (u_i, p_i); origin prepended if absent
    static ModulusFunction tabulated(std::vector<double> us, std::vector<double> ps);
    // "pow:<gamma>" or "tab:<path>" (text file, one "u p" pair per line)
    static ModulusFunction parse(std::string_view text);

    double operator()(double u) const;

    // max{v in [0,1] : p(v) <= u}; domain [0, p(1)]
    double inverse(double u) const;

    // density dp/du (right-continuous at tabulated knots)
    double derivative(double u) const;

    double at_one() const;

    Kind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double scale() const { return scale_; }
    const std::vector<double>& knots_u() const { return us_; }
    const std::vector<double>& knots_p() const { return ps_; }
    std::string to_string() const;

private:
    ModulusFunction() = default;
    Kind kind_ = Kind::power;
    double gamma_ = 1;
    double scale_ = 1;
    std::vector<double> us_, ps_;
};

double p_inverse(const ModulusFunction& p, double u);

// Log-modulated joint moduli appearing in the continuity theorems.
struct LogModulatedModulus {
    enum class Form { h, sigma, hH, sigmaH, heat, heat_point };

    Form form;
    std::vector<ModulusFunction> base;  // h / sigma
    std::vector<double> hurst;          // hH / sigmaH
    double alpha = 0.25;                // heat forms

    static LogModulatedModulus h_form(std::vector<ModulusFunction> base);
    static LogModulatedModulus sigma_form(std::vector<ModulusFunction> base);
    static LogModulatedModulus hH_form(std::vector<double> hurst);
    static LogModulatedModulus sigmaH_form(std::vector<double> hurst);
    static LogModulatedModulus heat_form(double alpha);
    // denominator of the pointwise space-time increment bound
    static LogModulatedModulus heat_point_form(double alpha);

    int dim() const;
};

// Evaluates the chosen modulus at a point pair.  All |x_k - y_k| must lie in
// (0,1); sigma/heat_point forms additionally need coordinates in (0,1].
double eval_log_modulus(const LogModulatedModulus& m, const PointPair& pair);

} // namespace grr
