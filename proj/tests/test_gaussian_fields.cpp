#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "grr/gaussian_fields.hpp"
#include "grr/heat_field.hpp"
#include "grr/rng.hpp"

using namespace grr;

namespace {

std::vector<std::vector<double>> uniform(std::size_t a, std::size_t b) {
    return uniform_axes(std::vector<std::size_t>{a, b});
}

}  // namespace

TEST_SUITE("gaussian_fields") {

TEST_CASE("fbm covariance basics") {
    CovarianceModel m = CovarianceModel::fbm({0.3});
    CHECK(m.dim() == 1);
    CHECK(m.is_product());
    const std::vector<double> xs{0.5}, ys{1.0};
    CHECK(m(xs, ys) ==
          doctest::Approx(0.5 * (std::pow(0.5, 0.6) + 1.0 - std::pow(0.5, 0.6))).epsilon(1e-15));
    CHECK_THROWS_AS((void)CovarianceModel::fbm({1.2}), std::invalid_argument);
    CHECK_THROWS_AS((void)CovarianceModel::fbm({0.0}), std::invalid_argument);
    CHECK_NOTHROW((void)CovarianceModel::fbm({1.0}));
}

TEST_CASE("increment variance: product path agrees with the generic corner sum") {
    CovarianceModel m = CovarianceModel::fbm({0.3, 0.7});
    Xoshiro256pp gen(21, 0);
    for (int trial = 0; trial < 200; ++trial) {
        PointPair pair{{gen.uniform01(), gen.uniform01()}, {gen.uniform01(), gen.uniform01()}};
        double fast = increment_variance(m, pair);
        double generic = increment_variance_generic(m, pair);
        CHECK(fast == doctest::Approx(generic).epsilon(1e-12));
        CHECK(fast >= -1e-12);
    }
}

TEST_CASE("brownian sheet increments have product variance exactly") {
    CovarianceModel m = CovarianceModel::fbm({0.5, 0.5});
    PointPair pair{{0.25, 0.125}, {0.75, 0.625}};
    CHECK(increment_variance(m, pair) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("fbm box variance from the origin is the product of powers") {
    CovarianceModel m = CovarianceModel::fbm({0.3, 0.7});
    PointPair pair{{0.0, 0.0}, {0.5, 0.25}};
    CHECK(increment_variance(m, pair) ==
          doctest::Approx(0.094732285406899890).epsilon(1e-13));
}

TEST_CASE("heat model increment variance matches the closed form") {
    CovarianceModel m = CovarianceModel::heat();
    CHECK(m.dim() == 2);
    CHECK_FALSE(m.is_product());
    Xoshiro256pp gen(31, 0);
    for (int trial = 0; trial < 50; ++trial) {
        double s = 0.05 + gen.uniform01();
        double t = 0.05 + gen.uniform01();
        double x = gen.uniform01();
        double y = gen.uniform01();
        PointPair pair{{s, x}, {t, y}};
        CHECK(increment_variance(m, pair) ==
              doctest::Approx(heat_sq_increment(s, t, x, y)).epsilon(1e-10));
    }
}

TEST_CASE("empirical modulus dominates and matches fbm exponents") {
    CovarianceModel m = CovarianceModel::fbm({0.3, 0.7});
    auto axes = uniform(9, 9);
    EmpiricalModulus em = build_empirical_modulus(m, axes);
    REQUIRE(em.p.size() == 2);
    CHECK(empirical_dominance_gap(m, axes, em) <= 1e-10);
    // axis 0 tabulated stage: p_0(u) = u^0.3 on the grid because the other
    // axis peaks at full span
    CHECK(em.p[0](0.5) == doctest::Approx(std::pow(0.5, 0.3)).epsilon(1e-10));
    CHECK(em.p[0](0.0) == 0.0);
    // monotone
    for (double u = 0.125; u <= 1.0; u += 0.125)
        CHECK(em.p[0](u) >= em.p[0](u - 0.125));
}

TEST_CASE("sampler is deterministic and replicates are independent streams") {
    CovarianceModel m = CovarianceModel::fbm({0.4, 0.6});
    auto axes = uniform(5, 7);
    FieldSampler sampler(m, axes);
    GridField a = sampler.sample(42, 3);
    GridField b = sampler.sample(42, 3);
    CHECK(std::memcmp(a.values().data(), b.values().data(),
                      a.size() * sizeof(double)) == 0);
    GridField c = sampler.sample(42, 4);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a.values()[i] != c.values()[i];
    CHECK(differs);
    // replicate keying is stable regardless of which sampler instance draws it
    FieldSampler sampler2(m, axes);
    GridField d = sampler2.sample(42, 3);
    CHECK(std::memcmp(a.values().data(), d.values().data(),
                      a.size() * sizeof(double)) == 0);
}

TEST_CASE("factored and materialized operators agree bit for bit") {
    CovarianceModel m = CovarianceModel::fbm({0.3, 0.7});
    auto axes = uniform(5, 7);
    FieldSampler lean(m, axes, false);
    FieldSampler full(m, axes, true);
    CHECK(lean.product_path());
    for (std::uint64_t r = 0; r < 4; ++r) {
        GridField a = lean.sample(11, r);
        GridField b = full.sample(11, r);
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.values().data(), b.values().data(),
                          a.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("pinned axes stay exactly zero") {
    CovarianceModel m = CovarianceModel::fbm({0.5, 0.5});
    auto axes = uniform(5, 5);
    FieldSampler sampler(m, axes);
    for (std::uint64_t r = 0; r < 8; ++r) {
        GridField f = sampler.sample(7, r);
        for (std::size_t j = 0; j < 5; ++j) {
            std::size_t row0[] = {0, j}, col0[] = {j, 0};
            CHECK(f.at(row0) == 0.0);
            CHECK(f.at(col0) == 0.0);
        }
    }
}

TEST_CASE("heat sampler pins time zero and matches its covariance") {
    CovarianceModel m = CovarianceModel::heat();
    auto axes = uniform(5, 5);
    FieldSampler sampler(m, axes);
    CHECK_FALSE(sampler.product_path());
    // time-zero row is exactly zero
    GridField f = sampler.sample(3, 0);
    for (std::size_t j = 0; j < 5; ++j) {
        std::size_t idx[] = {0, j};
        CHECK(f.at(idx) == 0.0);
    }
    // Monte Carlo variance at an interior node within 5 standard errors
    const std::size_t reps = 4000;
    std::size_t node[] = {4, 2};  // t=1, x=0.5
    double want = heat_cov({1.0, 0.5}, {1.0, 0.5});
    double sum = 0, sumsq = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        double v = sampler.sample(99, r).at(node);
        sum += v;
        sumsq += v * v;
    }
    double var = sumsq / reps - (sum / reps) * (sum / reps);
    double se = want * std::sqrt(2.0 / reps);  // Var of chi2-scaled estimate
    CHECK(std::abs(var - want) < 5 * se);
}

TEST_CASE("sample covariance of fbm matches the model") {
    CovarianceModel m = CovarianceModel::fbm({0.5});
    std::vector<std::vector<double>> axes{{0.0, 0.5, 1.0}};
    FieldSampler sampler(m, axes);
    const std::size_t reps = 4000;
    double sum = 0, sumsq = 0, cross = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        GridField f = sampler.sample(5, r);
        double a = f.values()[1], b = f.values()[2];
        sum += a;
        sumsq += a * a;
        cross += a * b;
    }
    CHECK(std::abs(sumsq / reps - 0.5) < 5 * 0.5 * std::sqrt(2.0 / reps));
    CHECK(std::abs(cross / reps - 0.5) < 5 * 0.5 * std::sqrt(3.0 / reps));
    CHECK(std::abs(sum / reps) < 5 * std::sqrt(0.5 / reps));
}

TEST_CASE("increment moment Monte Carlo") {
    CovarianceModel m = CovarianceModel::fbm({0.3, 0.7});
    PointPair degenerate{{0.2, 0.4}, {0.2, 0.9}};
    MomentEstimate zero = increment_moment_mc(m, degenerate, 100, 1);
    CHECK(zero.mean == 0.0);
    CHECK(zero.std_error == 0.0);

    PointPair pair{{0.0, 0.0}, {0.5, 0.25}};
    MomentEstimate est = increment_moment_mc(m, pair, 20000, 2);
    double want = increment_variance(m, pair);
    CHECK(std::abs(est.mean - want) < 4 * est.std_error);
    CHECK(est.std_error > 0.0);
    CHECK(est.std_error < 0.05 * want);
}

TEST_CASE("exponential moment estimate and closed form") {
    CHECK(exp_moment_closed_form(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(exp_moment_closed_form(0.5) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-15));
    CHECK_THROWS_AS((void)exp_moment_closed_form(2.0), std::domain_error);
    CHECK_THROWS_AS((void)exp_moment_check(2.0, 100000, 1), std::domain_error);
    CHECK_THROWS_AS((void)exp_moment_check(0.5, 1000, 1), std::invalid_argument);
    double est = exp_moment_check(0.5, 200000, 7);
    CHECK(est == doctest::Approx(exp_moment_closed_form(0.5)).epsilon(0.02));
}

}
