#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <doctest.h>

#include "grr/modulus.hpp"

using namespace grr;

TEST_SUITE("modulus") {

TEST_CASE("young power family") {
    YoungFunction psi = YoungFunction::parse("pow:4");
    CHECK(psi(0.0) == 0.0);
    CHECK(psi(2.0) == 16.0);
    CHECK(psi.inverse(16.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(psi.inverse(psi(0.37)) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(psi.to_string() == "pow:4");
    CHECK_THROWS_AS((void)psi(-1.0), std::domain_error);
    CHECK_THROWS_AS((void)YoungFunction::power(0.0), std::invalid_argument);
}

TEST_CASE("young exponential family") {
    YoungFunction psi = YoungFunction::parse("expq");
    CHECK(psi(0.0) == 1.0);
    CHECK(psi(2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    // generalized inverse collapses the sub-level plateau to zero
    CHECK(psi.inverse(0.0) == 0.0);
    CHECK(psi.inverse(0.999) == 0.0);
    CHECK(psi.inverse(1.0) == 0.0);
    CHECK(psi.inverse(std::exp(1.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(psi.inverse(4.0) == doctest::Approx(2.0 * std::sqrt(std::log(4.0))).epsilon(1e-15));
    CHECK_THROWS_AS((void)psi.inverse(-0.5), std::domain_error);
    CHECK(psi_inverse(psi, 1.5) == psi.inverse(1.5));
    CHECK(psi.value_at_zero() == 1.0);
}

TEST_CASE("power modulus") {
    ModulusFunction p = ModulusFunction::parse("pow:0.7");
    CHECK(p(0.0) == 0.0);
    CHECK(p(1.0) == 1.0);
    CHECK(p(0.5) == doctest::Approx(std::pow(0.5, 0.7)).epsilon(1e-15));
    CHECK(p.inverse(p(0.42)) == doctest::Approx(0.42).epsilon(1e-14));
    CHECK(p.derivative(0.5) == doctest::Approx(0.7 * std::pow(0.5, -0.3)).epsilon(1e-14));
    ModulusFunction scaled = ModulusFunction::power(1.0, 2.5);
    CHECK(scaled(0.4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(scaled.at_one() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS_AS((void)ModulusFunction::power(-0.2), std::invalid_argument);
}

TEST_CASE("tabulated modulus interpolates and inverts exactly on segments") {
    ModulusFunction p = ModulusFunction::tabulated({0.2, 0.6, 1.0}, {0.1, 0.5, 0.6});
    CHECK(p(0.0) == 0.0);  // origin prepended
    CHECK(p(0.2) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(p(0.4) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p(0.8) == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(p.inverse(0.3) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(p.inverse(0.6) == doctest::Approx(1.0).epsilon(1e-15));
    // right-sided slope at a knot
    CHECK(p.derivative(0.2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.derivative(0.1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS((void)p_inverse(p, 0.7), std::domain_error);
    // decreasing tables are rejected
    CHECK_THROWS_AS((void)ModulusFunction::tabulated({0.5, 0.4}, {0.1, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("tab file parsing") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "grr_tab_modulus.txt";
    {
        std::ofstream out(path);
        out << "0.25 0.3\n0.5 0.45\n1 0.8\n";
    }
    ModulusFunction p = ModulusFunction::parse("tab:" + path.string());
    CHECK(p(0.5) == doctest::Approx(0.45).epsilon(1e-15));
    CHECK(p(0.375) == doctest::Approx(0.375).epsilon(1e-15));
    fs::remove(path);
    CHECK_THROWS((void)ModulusFunction::parse("tab:/nonexistent/file.txt"));
}

TEST_CASE("log modulated h form") {
    auto m = LogModulatedModulus::h_form(
        {ModulusFunction::power(0.3), ModulusFunction::power(0.7)});
    CHECK(m.dim() == 2);
    PointPair pair{{0.5, 0.25}, {0.25, 0.5}};
    double d0 = 0.25, d1 = 0.25;
    double expect = std::pow(d0, 0.3) * std::pow(d1, 0.7) *
                    std::sqrt(-std::log(d0) - std::log(d1));
    CHECK(eval_log_modulus(m, pair) == doctest::Approx(expect).epsilon(1e-14));

    // hH with power moduli of matching exponents is the same object
    auto mh = LogModulatedModulus::hH_form({0.3, 0.7});
    CHECK(eval_log_modulus(mh, pair) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("log modulated domain") {
    auto m = LogModulatedModulus::hH_form({0.5});
    CHECK_THROWS_AS((void)eval_log_modulus(m, PointPair{{0.5}, {0.5}}), std::domain_error);
    CHECK_THROWS_AS((void)eval_log_modulus(m, PointPair{{0.0}, {1.0}}), std::domain_error);
    CHECK(eval_log_modulus(m, PointPair{{0.0}, {0.5}}) > 0.0);
    // sigma forms also need strictly positive coordinates
    auto s = LogModulatedModulus::sigmaH_form({0.5});
    CHECK_THROWS_AS((void)eval_log_modulus(s, PointPair{{0.0}, {0.5}}), std::domain_error);
    CHECK(eval_log_modulus(s, PointPair{{0.25}, {0.5}}) > 0.0);
}

TEST_CASE("sigma form companion structure") {
    // one axis: sigma is p(d) sqrt(|log d|) with no companions
    auto s1 = LogModulatedModulus::sigmaH_form({0.5});
    PointPair p1{{0.25}, {0.5}};
    double d = 0.25;
    CHECK(eval_log_modulus(s1, p1) ==
          doctest::Approx(std::sqrt(d) * std::sqrt(-std::log(d))).epsilon(1e-14));

    // two axes: term k carries companion coordinates x_j (j<k) / y_j (j>k),
    // each through its own modulus, under one shared log factor
    auto s2 = LogModulatedModulus::sigmaH_form({0.5, 0.5});
    PointPair p2{{0.25, 0.5}, {0.5, 0.75}};
    double d0 = 0.25, d1 = 0.25;
    auto leg = [](double u) { return std::sqrt(u) * std::sqrt(std::abs(std::log(u))); };
    double t0 = leg(d0) * leg(0.75);  // companion y_1 = 0.75
    double t1 = leg(d1) * leg(0.25);  // companion x_0 = 0.25
    CHECK(eval_log_modulus(s2, p2) == doctest::Approx(t0 + t1).epsilon(1e-14));
}

TEST_CASE("heat forms") {
    auto m = LogModulatedModulus::heat_form(0.125);
    PointPair pair{{0.5, 0.25}, {0.25, 0.5}};
    double dt = 0.25, dx = 0.25;
    double expect = std::pow(dt, 0.125) * std::pow(dx, 0.25) *
                    std::sqrt(std::abs(std::log(dt * dx)));
    CHECK(eval_log_modulus(m, pair) == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS((void)LogModulatedModulus::heat_form(0.3), std::invalid_argument);

    auto mp = LogModulatedModulus::heat_point_form(0.125);
    PointPair pp{{0.5, 0.25}, {0.25, 0.5}};
    double s = 0.5, x = 0.25, t = 0.25;
    double term_t = std::pow(dt, 0.25) * std::sqrt(std::abs(std::log(x * dt)));
    double term_x = std::sqrt(dx) * std::sqrt(std::abs(std::log(dx * t)));
    (void)s;
    CHECK(eval_log_modulus(mp, pp) == doctest::Approx(term_t + term_x).epsilon(1e-14));
}

}
