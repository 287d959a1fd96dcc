#include <initializer_list>
#include <cmath>

#include <doctest.h>

#include "grr/special_functions.hpp"

using namespace grr;

TEST_SUITE("special_functions") {

TEST_CASE("erf and erfc reference values") {
    CHECK(erf_approx(0.5) == doctest::Approx(0.5204998778130465).epsilon(1e-14));
    CHECK(erfc_approx(1.0) == doctest::Approx(0.15729920705028513).epsilon(1e-14));
    CHECK(erfc_approx(3.0) == doctest::Approx(2.209049699858544e-5).epsilon(1e-13));
    CHECK(erfc_approx(6.0) == doctest::Approx(2.1519736712498913e-17).epsilon(1e-13));
}

TEST_CASE("limits and symmetry") {
    CHECK(erf_approx(0.0) == 0.0);
    CHECK(erfc_approx(0.0) == 1.0);
    for (double x : {0.2, 0.9, 1.7, 3.4}) {
        CHECK(erfc_approx(-x) == doctest::Approx(2.0 - erfc_approx(x)).epsilon(1e-15));
        CHECK(erf_approx(x) + erfc_approx(x) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(erfc_approx(30.0) == 0.0);  // underflows; erfcx carries the tail
    CHECK(erf_approx(30.0) == 1.0);
}

TEST_CASE("erfcx reference and consistency") {
    CHECK(erfcx_approx(50.0) == doctest::Approx(0.011281536265323773).epsilon(1e-13));
    for (double x : {0.3, 1.1, 2.5, 5.0}) {
        double direct = erfc_approx(x);
        CHECK(erfcx_approx(x) * std::exp(-x * x) == doctest::Approx(direct).epsilon(1e-12));
    }
    // decreasing in x on the right half line
    CHECK(erfcx_approx(1.0) > erfcx_approx(2.0));
    CHECK(erfcx_approx(2.0) > erfcx_approx(10.0));
}

}
