#include "grr/special_functions.hpp"

#include <cmath>
#include <limits>

namespace grr {

namespace {

// Coefficients from W. J. Cody, "Rational Chebyshev approximation for the
// error function" (SPECFUN CALERF).
constexpr double kA[5] = {
    3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
    3.20937758913846947e03, 1.85777706184603153e-1};
constexpr double kB[4] = {
    2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
    2.84423683343917062e03};
constexpr double kC[9] = {
    5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
    2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
    2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
constexpr double kD[8] = {
    1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
    1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
    3.43936767414372164e03, 1.23033935480374942e03};
constexpr double kP[6] = {
    3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
    1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr double kQ[5] = {
    2.56852019228982242e00, 1.87295284992346047e00, 5.27905102951428412e-1,
    6.05183413124413191e-2, 2.33520497626869185e-3};

constexpr double kThresh = 0.46875;
constexpr double kInvSqrtPi = 5.6418958354775628695e-1;
constexpr double kXBig = 26.543;    // erfc underflows beyond
constexpr double kXMax = 2.53e307;  // erfcx overflows below 1/(sqrt(pi)*x) beyond

enum class Mode { erf, erfc, erfcx };

// exp(-y^2) computed as exp(-ysq^2)*exp(-del) with ysq = trunc(16y)/16;
// keeps the argument splitting error out of the exponential.
double exp_neg_ysq(double y) {
    double ysq = std::trunc(y * 16.0) / 16.0;
    double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del);
}

double calerf(double x, Mode mode) {
    const double y = std::fabs(x);
    double result;

    if (y <= kThresh) {
        double ysq = 0;
        if (y > std::numeric_limits<double>::epsilon()) ysq = y * y;
        double num = kA[4] * ysq;
        double den = ysq;
        for (int i = 0; i < 3; ++i) {
            num = (num + kA[i]) * ysq;
            den = (den + kB[i]) * ysq;
        }
        result = x * (num + kA[3]) / (den + kB[3]);  // erf(x)
        if (mode == Mode::erf) return result;
        result = 1.0 - result;                        // erfc(x)
        if (mode == Mode::erfcx) result *= std::exp(ysq);
        return result;
    }

    if (y <= 4.0) {
        double num = kC[8] * y;
        double den = y;
        for (int i = 0; i < 7; ++i) {
            num = (num + kC[i]) * y;
            den = (den + kD[i]) * y;
        }
        result = (num + kC[7]) / (den + kD[7]);       // erfcx(|x|)
        if (mode != Mode::erfcx) result *= exp_neg_ysq(y);
    } else {
        if (mode == Mode::erfcx && y > kXMax) {
            result = 0;
        } else if (mode != Mode::erfcx && y > kXBig) {
            result = 0;
        } else {
            double ysq = 1.0 / (y * y);
            double num = kP[5] * ysq;
            double den = ysq;
            for (int i = 0; i < 4; ++i) {
                num = (num + kP[i]) * ysq;
                den = (den + kQ[i]) * ysq;
            }
            result = ysq * (num + kP[4]) / (den + kQ[4]);
            result = (kInvSqrtPi - result) / y;       // erfcx(|x|)
            if (mode != Mode::erfcx) result *= exp_neg_ysq(y);
        }
    }

    // reflect to negative arguments
    if (mode == Mode::erf) {
        return result;  // handled in the first branch; y > thresh implies x != 0
    }
    if (x < 0) {
        if (mode == Mode::erfc) {
            result = 2.0 - result;
        } else {
            // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x << -26
            if (x < -kXBig) return std::numeric_limits<double>::infinity();
            double ysq = std::trunc(x * 16.0) / 16.0;
            double del = (x - ysq) * (x + ysq);
            double e = std::exp(ysq * ysq) * std::exp(del);
            result = 2.0 * e - result;
        }
    }
    return result;
}

} // namespace

double erf_approx(double x) {
    if (std::fabs(x) <= kThresh) return calerf(x, Mode::erf);
    double v = 1.0 - calerf(std::fabs(x), Mode::erfc);
    return x < 0 ? -v : v;
}

double erfc_approx(double x) { return calerf(x, Mode::erfc); }

double erfcx_approx(double x) { return calerf(x, Mode::erfcx); }

} // namespace grr
