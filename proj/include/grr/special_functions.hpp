#pragma once

namespace grr {

// Rational-approximation error functions (Cody's algorithm), accurate to a
// few ulps across the range, self-contained so results are identical across
// libm implementations.
double erf_approx(double x);
double erfc_approx(double x);

// exp(x^2) * erfc(x); stays O(1/x) for large x where erfc underflows
double erfcx_approx(double x);

} // namespace grr
