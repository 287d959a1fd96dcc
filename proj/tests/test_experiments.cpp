#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "grr/experiments.hpp"
#include "grr/gaussian_fields.hpp"
#include "grr/grr_core.hpp"
#include "grr/rng.hpp"

using namespace grr;

namespace {

// independent enumeration of admissible node pairs for cross-checking
// sup_ratio; ratio evaluated through eval_log_modulus only
double brute_sup_ratio(const GridField& field, const LogModulatedModulus& modulus,
                       double delta_max) {
    const auto nu = static_cast<std::size_t>(field.dim());
    const auto& shape = field.shape();
    const bool coords = modulus.form == LogModulatedModulus::Form::sigma ||
                        modulus.form == LogModulatedModulus::Form::sigmaH ||
                        modulus.form == LogModulatedModulus::Form::heat_point;
    std::size_t total = 1;
    for (std::size_t m : shape) total *= m * m;

    double best = 0;
    std::vector<std::size_t> ix(nu), iy(nu);
    PointPair pair;
    pair.x.resize(nu);
    pair.y.resize(nu);
    for (std::size_t q = 0; q < total; ++q) {
        std::size_t rem = q;
        bool ok = true;
        for (std::size_t k = nu; k-- > 0;) {
            ix[k] = rem % shape[k];
            rem /= shape[k];
            iy[k] = rem % shape[k];
            rem /= shape[k];
            const double a = field.axis(static_cast<int>(k))[ix[k]];
            const double b = field.axis(static_cast<int>(k))[iy[k]];
            const double sep = std::fabs(a - b);
            if (!(sep > 0.0 && sep <= delta_max)) ok = false;
            if (coords && (a <= 0.0 || b <= 0.0)) ok = false;
            pair.x[k] = a;
            pair.y[k] = b;
        }
        if (!ok) continue;
        const double num = std::fabs(rect_increment_nodes(field, ix, iy));
        if (num == 0.0) continue;
        best = std::max(best, num / eval_log_modulus(modulus, pair));
    }
    return best;
}

GridField sampled_field(std::vector<double> hurst, std::vector<std::size_t> shape,
                        std::uint64_t seed) {
    CovarianceModel m = CovarianceModel::fbm(std::move(hurst));
    FieldSampler sampler(m, uniform_axes(shape));
    return sampler.sample(seed, 0);
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("certificate moduli per form") {
    auto hh = certificate_moduli(LogModulatedModulus::hH_form({0.3, 0.7}));
    REQUIRE(hh.size() == 2);
    CHECK(hh[0](0.5) == doctest::Approx(std::pow(0.5, 0.3)).epsilon(1e-15));
    CHECK(hh[1](0.5) == doctest::Approx(std::pow(0.5, 0.7)).epsilon(1e-15));

    std::vector<ModulusFunction> base{ModulusFunction::power(0.4),
                                      ModulusFunction::power(0.6)};
    auto h = certificate_moduli(LogModulatedModulus::h_form(base));
    REQUIRE(h.size() == 2);
    CHECK(h[1](0.25) == doctest::Approx(std::pow(0.25, 0.6)).epsilon(1e-15));
    auto sig = certificate_moduli(LogModulatedModulus::sigma_form(base));
    CHECK(sig.size() == 2);

    auto heat = certificate_moduli(LogModulatedModulus::heat_form(0.1));
    REQUIRE(heat.size() == 2);
    CHECK(heat[0](0.5) == doctest::Approx(std::pow(0.5, 0.15)).epsilon(1e-15));
    CHECK(heat[1](0.5) == doctest::Approx(std::pow(0.5, 0.2)).epsilon(1e-15));
    CHECK_THROWS_AS((void)certificate_moduli(LogModulatedModulus::heat_form(0.25)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)certificate_moduli(LogModulatedModulus::heat_point_form(0.1)),
                    std::invalid_argument);
}

TEST_CASE("sup ratio equals exhaustive enumeration") {
    GridField f = sampled_field({0.5, 0.5}, {5, 5}, 17);

    SUBCASE("tabulated per-axis moduli") {
        std::vector<ModulusFunction> base{ModulusFunction::power(0.45),
                                          ModulusFunction::power(0.45)};
        auto m = LogModulatedModulus::h_form(base);
        SupRatioDetail det = sup_ratio_detail(f, m, 0.5);
        CHECK_FALSE(det.subsampled);
        CHECK(det.pairs > 0);
        CHECK(det.value == doctest::Approx(brute_sup_ratio(f, m, 0.5)).epsilon(1e-12));
        CHECK(det.max_increment > 0.0);
    }
    SUBCASE("power-law form") {
        auto m = LogModulatedModulus::hH_form({0.4, 0.45});
        CHECK(sup_ratio(f, m, 0.5) ==
              doctest::Approx(brute_sup_ratio(f, m, 0.5)).epsilon(1e-12));
    }
    SUBCASE("orientation-sensitive edge form") {
        auto m = LogModulatedModulus::sigmaH_form({0.4, 0.45});
        // the grid reaches coordinate 1 on both axes, where every companion
        // log factor vanishes; the sup is then genuinely infinite and the two
        // enumerations must agree on that as well
        double fast = sup_ratio(f, m, 0.5);
        double brute = brute_sup_ratio(f, m, 0.5);
        REQUIRE(std::isinf(brute));
        CHECK(std::isinf(fast));

        // away from the top corner the ratios are finite and must match
        std::vector<std::vector<double>> inner{{0.1, 0.3, 0.5, 0.7, 0.9},
                                               {0.1, 0.3, 0.5, 0.7, 0.9}};
        NormalStream gen(29, 0);
        std::vector<double> vals(25);
        for (double& v : vals) v = gen.next();
        GridField g(inner, vals);
        double fast_in = sup_ratio(g, m, 0.5);
        double brute_in = brute_sup_ratio(g, m, 0.5);
        CHECK(std::isfinite(fast_in));
        CHECK(fast_in == doctest::Approx(brute_in).epsilon(1e-12));
    }
    SUBCASE("space-time forms") {
        CovarianceModel m = CovarianceModel::heat();
        FieldSampler sampler(m, uniform_axes(std::vector<std::size_t>{5, 5}));
        GridField hf = sampler.sample(23, 0);
        auto box = LogModulatedModulus::heat_form(0.1);
        CHECK(sup_ratio(hf, box, 0.5) ==
              doctest::Approx(brute_sup_ratio(hf, box, 0.5)).epsilon(1e-12));
        auto point = LogModulatedModulus::heat_point_form(0.1);
        CHECK(sup_ratio(hf, point, 0.5) ==
              doctest::Approx(brute_sup_ratio(hf, point, 0.5)).epsilon(1e-12));
    }
    SUBCASE("argument validation") {
        auto m = LogModulatedModulus::hH_form({0.4});
        CHECK_THROWS_AS((void)sup_ratio(f, m, 0.5), std::invalid_argument);
        auto m2 = LogModulatedModulus::hH_form({0.4, 0.45});
        CHECK_THROWS_AS((void)sup_ratio(f, m2, 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)sup_ratio(f, m2, 1.0), std::invalid_argument);
    }
}

TEST_CASE("large grids fall back to a seeded pair subsample") {
    std::vector<std::vector<double>> axes{uniform_axis(101)};
    GridField f = GridField::from_function(
        axes, [](std::span<const double> x) { return std::sin(6.0 * x[0]) * 0.1; });
    auto m = LogModulatedModulus::hH_form({0.45});

    SupRatioDetail a = sup_ratio_detail(f, m, 0.5, 1234);
    CHECK(a.subsampled);
    CHECK(a.subsample_seed == 1234);
    CHECK(a.pairs == 1000000);
    SupRatioDetail b = sup_ratio_detail(f, m, 0.5, 1234);
    CHECK(a.value == b.value);
    CHECK(a.max_increment == b.max_increment);

    // 1e6 draws over ~3.8e3 admissible pairs covers every pair, so the
    // subsample still attains the exhaustive sup
    CHECK(a.value == doctest::Approx(brute_sup_ratio(f, m, 0.5)).epsilon(1e-12));
}

TEST_CASE("path certificate on a sampled sheet") {
    GridField f = sampled_field({0.5, 0.5}, {9, 9}, 7);
    auto moduli = certificate_moduli(LogModulatedModulus::hH_form({0.45, 0.45}));
    const YoungFunction expq = YoungFunction::exp_quarter_square();

    std::vector<PointPair> pairs{
        {{0.25, 0.25}, {0.5, 0.75}},
        {{0.125, 0.5}, {0.375, 0.625}},
        {{0.0, 0.0}, {0.5, 0.5}},
        {{0.25, 0.5}, {0.25, 0.75}},  // degenerate time leg
    };
    CertificateReport rep = grr_certificate(f, expq, moduli, pairs, 0.05);
    CHECK(rep.B > 0.0);
    CHECK(std::isfinite(rep.B));
    CHECK_FALSE(rep.vacuous);
    REQUIRE(rep.pairs.size() == 4);
    CHECK(rep.pass);
    CHECK(rep.failures == 0);

    // degenerate pair collapses to the trivial bound
    CHECK(rep.pairs[3].rhs == 0.0);
    CHECK(rep.pairs[3].lhs == 0.0);
    CHECK(rep.pairs[3].pass);

    // the two-term bound reproduced from the report's own B
    const auto& cp = rep.pairs[0];
    std::vector<double> deltas{0.25, 0.5};
    double want = 2.0 * 64.0 * log_tail_integral(moduli, deltas, 0.0) +
                  std::sqrt(std::log(16.0 * rep.B)) * moduli[0](0.25) * moduli[1](0.5);
    CHECK(cp.rhs == doctest::Approx(want).epsilon(1e-12));
    CHECK(cp.lhs <= (1.0 + rep.slack) * cp.rhs);

    CHECK_THROWS_AS((void)grr_certificate(f, YoungFunction::power(2.0), moduli, pairs, 0.05),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)grr_certificate(f, expq, moduli, pairs, -0.1),
                    std::invalid_argument);
    std::vector<ModulusFunction> one{moduli[0]};
    CHECK_THROWS_AS((void)grr_certificate(f, expq, one, pairs, 0.05),
                    std::invalid_argument);
}

TEST_CASE("edge decomposition bound") {
    auto axes = uniform_axes(std::vector<std::size_t>{5, 5});
    GridField prod = GridField::from_function(
        axes, [](std::span<const double> x) { return x[0] * x[1]; });
    std::vector<ModulusFunction> base{ModulusFunction::power(0.5),
                                      ModulusFunction::power(0.5)};
    auto sigma = LogModulatedModulus::sigma_form(base);

    SUBCASE("hand-computed two-edge sum") {
        PointPair pair{{0.5, 0.75}, {0.25, 0.5}};
        EdgeBound eb = edge_decomposition_bound(prod, pair, sigma, 0.5);
        CHECK(eb.lhs == doctest::Approx(0.25).epsilon(1e-15));
        const double leg = [](double d, double z) {
            return std::sqrt(d) * std::sqrt(std::fabs(std::log(d))) * std::sqrt(z) *
                   std::sqrt(std::fabs(std::log(z)));
        }(0.25, 0.5);
        CHECK(eb.rhs == doctest::Approx(2.0 * leg).epsilon(1e-13));
    }
    SUBCASE("zero companion coordinate drops that edge") {
        PointPair pair{{0.5, 0.75}, {0.25, 0.0}};
        EdgeBound eb = edge_decomposition_bound(prod, pair, sigma, 0.8);
        // only the space edge survives: p(0.75) sqrt|log 0.75| * p(0.5) sqrt|log 0.5|
        double want = std::sqrt(0.75) * std::sqrt(std::fabs(std::log(0.75))) *
                      std::sqrt(0.5) * std::sqrt(std::fabs(std::log(0.5)));
        CHECK(eb.rhs == doctest::Approx(want).epsilon(1e-13));
        CHECK(eb.lhs == doctest::Approx(0.375).epsilon(1e-15));
    }
    SUBCASE("zero field satisfies the bound") {
        GridField z = GridField::zeros(axes);
        PointPair pair{{0.5, 0.75}, {0.25, 0.5}};
        EdgeBound eb = edge_decomposition_bound(z, pair, sigma, 0.5);
        CHECK(eb.lhs == 0.0);
        CHECK(eb.lhs <= eb.rhs);
    }
    SUBCASE("rejects fields that do not vanish on the axes") {
        GridField ones = GridField::from_function(
            axes, [](std::span<const double>) { return 1.0; });
        PointPair pair{{0.5, 0.75}, {0.25, 0.5}};
        CHECK_THROWS_AS((void)edge_decomposition_bound(ones, pair, sigma, 0.5),
                        std::runtime_error);
    }
    SUBCASE("argument validation") {
        PointPair pair{{0.5, 0.75}, {0.25, 0.5}};
        auto h = LogModulatedModulus::hH_form({0.5, 0.5});
        CHECK_THROWS_AS((void)edge_decomposition_bound(prod, pair, h, 0.5),
                        std::invalid_argument);
        PointPair wide{{1.0, 0.75}, {0.25, 0.5}};
        CHECK_THROWS_AS((void)edge_decomposition_bound(prod, wide, sigma, 0.5),
                        std::invalid_argument);
    }
}

TEST_CASE("refinement sweep") {
    ExperimentSpec spec{CovarianceModel::fbm({0.5, 0.5}),
                        {5, 5},
                        LogModulatedModulus::hH_form({0.45, 0.45}),
                        0.5,
                        4,
                        1,
                        0.05,
                        4};

    SUBCASE("runs and reports") {
        std::vector<std::vector<std::size_t>> grids{{5, 5}, {9, 9}};
        RegularityReport rep = refinement_sweep(spec, grids);
        REQUIRE(rep.grids.size() == 2);
        for (std::size_t gi = 0; gi < 2; ++gi) {
            const auto& g = rep.grids[gi];
            REQUIRE(g.rows.size() == 4);
            CHECK(g.median_ratio > 0.0);
            CHECK(g.q95_ratio >= g.median_ratio);
            for (std::size_t r = 0; r < g.rows.size(); ++r) {
                CHECK(g.rows[r].replicate == r);
                CHECK(g.rows[r].B > 0.0);
                CHECK(std::isfinite(g.rows[r].B));
                CHECK(g.rows[r].certificate_pass);
                CHECK_FALSE(g.rows[r].certificate_vacuous);
                CHECK(g.rows[r].sup_ratio > 0.0);
                CHECK(g.rows[r].max_increment > 0.0);
            }
        }

        // identical spec reruns produce identical rows
        RegularityReport rep2 = refinement_sweep(spec, grids);
        CHECK(rep.to_json() == rep2.to_json());

        nlohmann::ordered_json j = rep.to_json();
        CHECK(j["format"] == "grr-report/1");
        CHECK(j["spec"]["model"] == "fbm");
        CHECK(j["spec"]["modulus"]["form"] == "hH");
        CHECK(j["spec"]["replicates"] == 4);
        REQUIRE(j["grids"].size() == 2);
        CHECK(j["grids"][0]["shape"] == nlohmann::ordered_json::array({5, 5}));
        CHECK(j["grids"][0]["replicates"].size() == 4);
        CHECK(j["grids"][0]["replicates"][0].contains("sup_ratio"));
        CHECK(j.contains("stable"));
    }
    SUBCASE("skipping certificates leaves B untouched") {
        ExperimentSpec s = spec;
        s.certificate_pairs = 0;
        std::vector<std::vector<std::size_t>> grids{{5, 5}};
        RegularityReport rep = refinement_sweep(s, grids);
        for (const auto& row : rep.grids[0].rows) {
            CHECK(row.B == 0.0);
            CHECK(row.certificate_pass);
        }
    }
    SUBCASE("validation") {
        std::vector<std::vector<std::size_t>> none;
        CHECK_THROWS_AS((void)refinement_sweep(spec, none), std::invalid_argument);
        std::vector<std::vector<std::size_t>> shrink{{9, 9}, {5, 5}};
        CHECK_THROWS_AS((void)refinement_sweep(spec, shrink), std::invalid_argument);
        std::vector<std::vector<std::size_t>> wrong_dim{{5}};
        CHECK_THROWS_AS((void)refinement_sweep(spec, wrong_dim), std::invalid_argument);
        std::vector<std::vector<std::size_t>> tiny{{1, 5}};
        CHECK_THROWS_AS((void)refinement_sweep(spec, tiny), std::invalid_argument);
        ExperimentSpec bad = spec;
        bad.delta_max = 1.0;
        std::vector<std::vector<std::size_t>> ok{{5, 5}};
        CHECK_THROWS_AS((void)refinement_sweep(bad, ok), std::invalid_argument);
        ExperimentSpec zero_reps = spec;
        zero_reps.replicates = 0;
        CHECK_THROWS_AS((void)refinement_sweep(zero_reps, ok), std::invalid_argument);
    }
}

}
