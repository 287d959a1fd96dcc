#include "grr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "grr/rng.hpp"

namespace grr {

namespace {

constexpr std::size_t kSubsampleDraws = 1000000;
constexpr std::size_t kFullPairCap = std::size_t{1} << 26;

bool form_needs_coords(LogModulatedModulus::Form f) {
    return f == LogModulatedModulus::Form::sigma ||
           f == LogModulatedModulus::Form::sigmaH ||
           f == LogModulatedModulus::Form::heat_point;
}

const char* form_name(LogModulatedModulus::Form f) {
    switch (f) {
        case LogModulatedModulus::Form::h: return "h";
        case LogModulatedModulus::Form::sigma: return "sigma";
        case LogModulatedModulus::Form::hH: return "hH";
        case LogModulatedModulus::Form::sigmaH: return "sigmaH";
        case LogModulatedModulus::Form::heat: return "heat";
        case LogModulatedModulus::Form::heat_point: return "heat_point";
    }
    return "?";
}

struct AxisPairs {
    std::vector<std::size_t> i, j;
    std::vector<double> sep;
};

// per-axis node pairs with separation in (0, delta_max]; ordered both ways
// when the modulus is orientation-sensitive, zero coordinates dropped when it
// needs strictly positive ones
std::vector<AxisPairs> admissible_axis_pairs(const std::vector<std::vector<double>>& axes,
                                             double delta_max, bool needs_coords,
                                             bool oriented) {
    std::vector<AxisPairs> lists(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const auto& a = axes[k];
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                const double sep = std::fabs(a[j] - a[i]);
                if (!(sep > 0.0 && sep <= delta_max) || sep >= 1.0) continue;
                if (needs_coords && (a[i] <= 0.0 || a[j] <= 0.0)) continue;
                lists[k].i.push_back(i);
                lists[k].j.push_back(j);
                lists[k].sep.push_back(sep);
                if (oriented) {
                    lists[k].i.push_back(j);
                    lists[k].j.push_back(i);
                    lists[k].sep.push_back(sep);
                }
            }
        }
        if (lists[k].i.empty())
            throw std::invalid_argument("no admissible grid pair within delta_max");
    }
    return lists;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double q95_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(v.size())) - 1.0);
    return v[std::min(idx, v.size() - 1)];
}

} // namespace

std::vector<ModulusFunction> certificate_moduli(const LogModulatedModulus& m) {
    std::vector<ModulusFunction> out;
    switch (m.form) {
        case LogModulatedModulus::Form::h:
        case LogModulatedModulus::Form::sigma:
            return m.base;
        case LogModulatedModulus::Form::hH:
        case LogModulatedModulus::Form::sigmaH:
            for (double h : m.hurst) out.push_back(ModulusFunction::power(h));
            return out;
        case LogModulatedModulus::Form::heat:
            if (!(m.alpha > 0.0 && m.alpha < 0.25))
                throw std::invalid_argument(
                    "certificate moduli for the heat form need alpha strictly inside (0, 1/4)");
            out.push_back(ModulusFunction::power(0.25 - m.alpha));
            out.push_back(ModulusFunction::power(2.0 * m.alpha));
            return out;
        case LogModulatedModulus::Form::heat_point:
            throw std::invalid_argument(
                "the pointwise heat modulus has no per-axis product structure");
    }
    throw std::logic_error("certificate_moduli: unreachable");
}

SupRatioDetail sup_ratio_detail(const GridField& field, const LogModulatedModulus& modulus,
                                double delta_max, std::uint64_t subsample_seed) {
    const int n = field.dim();
    if (modulus.dim() != n)
        throw std::invalid_argument("sup_ratio: modulus dimension does not match the field");
    if (!(delta_max > 0.0 && delta_max < 1.0))
        throw std::invalid_argument("sup_ratio: delta_max must lie in (0,1)");

    const bool needs_coords = form_needs_coords(modulus.form);
    const auto lists = admissible_axis_pairs(field.axes(), delta_max, needs_coords, needs_coords);
    const auto nu = static_cast<std::size_t>(n);

    // fast per-axis denominator tables for the product-structured forms
    const bool fast = !needs_coords;
    std::vector<std::vector<double>> ptab(nu), ltab(nu);
    if (fast) {
        for (std::size_t k = 0; k < nu; ++k) {
            const auto& sep = lists[k].sep;
            ptab[k].resize(sep.size());
            ltab[k].resize(sep.size());
            for (std::size_t t = 0; t < sep.size(); ++t) {
                double pk = 0;
                switch (modulus.form) {
                    case LogModulatedModulus::Form::h:
                        pk = modulus.base[k](sep[t]);
                        break;
                    case LogModulatedModulus::Form::hH:
                        pk = std::pow(sep[t], modulus.hurst[k]);
                        break;
                    case LogModulatedModulus::Form::heat:
                        pk = k == 0 ? std::pow(sep[t], 0.25 - modulus.alpha)
                                    : std::pow(sep[t], 2.0 * modulus.alpha);
                        break;
                    default:
                        break;
                }
                ptab[k][t] = pk;
                ltab[k][t] = std::log(sep[t]);
            }
        }
    }

    double full_count = 1;
    for (const auto& l : lists) full_count *= static_cast<double>(l.i.size());
    double node_cap = 1;
    for (int k = 0; k < n; ++k) node_cap *= 65.0;

    SupRatioDetail out;
    out.subsampled = static_cast<double>(field.size()) > node_cap ||
                     full_count > static_cast<double>(kFullPairCap);
    out.subsample_seed = subsample_seed;

    std::vector<std::size_t> ix(nu), iy(nu), pick(nu);
    PointPair pair;
    pair.x.resize(nu);
    pair.y.resize(nu);

    auto eval_assignment = [&](std::span<const std::size_t> t) {
        for (std::size_t k = 0; k < nu; ++k) {
            ix[k] = lists[k].i[t[k]];
            iy[k] = lists[k].j[t[k]];
        }
        const double num = std::fabs(rect_increment_nodes(field, ix, iy));
        out.max_increment = std::max(out.max_increment, num);
        if (num == 0.0) return;
        double denom;
        if (fast) {
            double prod = 1, logsum = 0;
            for (std::size_t k = 0; k < nu; ++k) {
                prod *= ptab[k][t[k]];
                logsum += ltab[k][t[k]];
            }
            denom = prod * std::sqrt(std::fabs(logsum));
        } else {
            for (std::size_t k = 0; k < nu; ++k) {
                pair.x[k] = field.axis(static_cast<int>(k))[ix[k]];
                pair.y[k] = field.axis(static_cast<int>(k))[iy[k]];
            }
            denom = eval_log_modulus(modulus, pair);
        }
        out.value = std::max(out.value, num / denom);
    };

    if (!out.subsampled) {
        std::size_t count = 1;
        for (const auto& l : lists) count *= l.i.size();
        for (std::size_t q = 0; q < count; ++q) {
            std::size_t rem = q;
            for (std::size_t k = nu; k-- > 0;) {
                pick[k] = rem % lists[k].i.size();
                rem /= lists[k].i.size();
            }
            eval_assignment(pick);
        }
        out.pairs = count;
    } else {
        Xoshiro256pp rng(subsample_seed, 0);
        for (std::size_t d = 0; d < kSubsampleDraws; ++d) {
            for (std::size_t k = 0; k < nu; ++k) {
                const auto size = lists[k].i.size();
                pick[k] = std::min(size - 1,
                                   static_cast<std::size_t>(rng.uniform01() *
                                                            static_cast<double>(size)));
            }
            eval_assignment(pick);
        }
        out.pairs = kSubsampleDraws;
    }
    return out;
}

double sup_ratio(const GridField& field, const LogModulatedModulus& modulus,
                 double delta_max) {
    return sup_ratio_detail(field, modulus, delta_max).value;
}

CertificateReport grr_certificate(const GridField& field, const YoungFunction& psi,
                                  std::span<const ModulusFunction> moduli,
                                  std::span<const PointPair> pairs, double slack) {
    if (psi.kind() != YoungFunction::Kind::exp_quarter_square)
        throw std::invalid_argument("the path certificate requires the exponential Young function");
    const int n = field.dim();
    if (moduli.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("grr_certificate: moduli count must equal field dimension");
    if (!(slack >= 0.0)) throw std::invalid_argument("grr_certificate: slack must be >= 0");

    CertificateReport rep;
    rep.slack = slack;
    GrrProblem prob{field, psi, std::vector<ModulusFunction>(moduli.begin(), moduli.end())};
    rep.B = b_functional(prob);
    rep.vacuous = std::isinf(rep.B);
    const double front = 2.0 * std::pow(8.0, static_cast<double>(n));
    const double log_b =
        rep.vacuous ? 0.0
                    : std::max(0.0, std::log(std::pow(4.0, static_cast<double>(n)) * rep.B));

    FieldView view(field);
    std::vector<double> deltas(static_cast<std::size_t>(n));
    for (const auto& pr : pairs) {
        CertificatePair cp;
        cp.pair = pr;
        cp.lhs = std::fabs(rect_increment(view, pr));
        if (rep.vacuous) {
            cp.vacuous = true;
            cp.pass = true;
            rep.pairs.push_back(std::move(cp));
            continue;
        }
        bool degenerate = false;
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            deltas[k] = std::fabs(pr.x[k] - pr.y[k]);
            if (deltas[k] == 0.0) degenerate = true;
        }
        if (degenerate) {
            cp.rhs = 0.0;
            cp.pass = cp.lhs == 0.0;
        } else {
            double prod_p = 1;
            for (std::size_t k = 0; k < deltas.size(); ++k) prod_p *= moduli[k](deltas[k]);
            cp.rhs = front * log_tail_integral(moduli, deltas, 0.0) +
                     std::sqrt(log_b) * prod_p;
            cp.pass = cp.lhs <= (1.0 + slack) * cp.rhs;
        }
        if (!cp.pass) ++rep.failures;
        rep.pairs.push_back(std::move(cp));
    }
    rep.pass = rep.failures == 0;
    return rep;
}

EdgeBound edge_decomposition_bound(const GridField& field, const PointPair& pair,
                                   const LogModulatedModulus& modulus, double delta_max) {
    const int n = field.dim();
    const auto nu = static_cast<std::size_t>(n);
    const bool is_sigma = modulus.form == LogModulatedModulus::Form::sigma;
    const bool is_sigma_h = modulus.form == LogModulatedModulus::Form::sigmaH;
    if (!is_sigma && !is_sigma_h)
        throw std::invalid_argument("edge bound needs a sigma-form modulus");
    if (modulus.dim() != n || pair.x.size() != nu || pair.y.size() != nu)
        throw std::invalid_argument("edge bound: dimension mismatch");
    if (!(delta_max > 0.0 && delta_max < 1.0))
        throw std::invalid_argument("edge bound: delta_max must lie in (0,1)");
    for (std::size_t k = 0; k < nu; ++k)
        if (std::fabs(pair.x[k] - pair.y[k]) > delta_max)
            throw std::invalid_argument("edge bound: pair separation exceeds delta_max");

    // hypothesis: the field vanishes wherever a coordinate is zero
    bool any_zero_node = false;
    for (int k = 0; k < n; ++k)
        if (!field.axis(k).empty() && field.axis(k).front() == 0.0) any_zero_node = true;
    if (any_zero_node) {
        const auto& shape = field.shape();
        for (std::size_t flat = 0; flat < field.size(); ++flat) {
            std::size_t rem = flat;
            bool on_axis = false;
            for (std::size_t k = nu; k-- > 0;) {
                if (field.axis(static_cast<int>(k))[rem % shape[k]] == 0.0) on_axis = true;
                rem /= shape[k];
            }
            if (on_axis && std::fabs(field.values()[flat]) > 1e-12)
                throw std::runtime_error("edge bound: field does not vanish on the coordinate axes");
        }
    }

    EdgeBound out;
    out.lhs = std::fabs(field.value_at(pair.x) - field.value_at(pair.y));

    auto p_of = [&](std::size_t k, double u) {
        return is_sigma ? modulus.base[k](u) : std::pow(u, modulus.hurst[k]);
    };
    // edge-sum modulus with the zero-separation and zero-coordinate terms
    // dropped (they vanish in the limit)
    double total = 0;
    for (std::size_t k = 0; k < nu; ++k) {
        const double dk = std::fabs(pair.x[k] - pair.y[k]);
        if (dk == 0.0) continue;
        double term = p_of(k, dk) * std::sqrt(std::fabs(std::log(dk)));
        if (term == 0.0) continue;
        if (nu > 1) {
            double prod = 1, logsum = 0;
            bool zero = false;
            for (std::size_t j = 0; j < nu; ++j) {
                if (j == k) continue;
                const double z = j < k ? pair.x[j] : pair.y[j];
                if (z == 0.0) {
                    zero = true;
                    break;
                }
                prod *= p_of(j, z);
                logsum += std::log(z);
            }
            if (zero || prod == 0.0) continue;
            term *= prod * std::sqrt(std::fabs(logsum));
        }
        total += term;
    }
    out.rhs = total;
    return out;
}

RegularityReport refinement_sweep(const ExperimentSpec& spec,
                                  std::span<const std::vector<std::size_t>> grids) {
    if (grids.empty()) throw std::invalid_argument("refinement_sweep: no grids given");
    if (!(spec.delta_max > 0.0 && spec.delta_max < 1.0))
        throw std::invalid_argument("refinement_sweep: delta_max must lie in (0,1)");
    if (spec.replicates == 0) throw std::invalid_argument("refinement_sweep: need replicates");
    std::size_t prev_total = 0;
    for (const auto& shape : grids) {
        if (shape.size() != spec.model.dim())
            throw std::invalid_argument("refinement_sweep: grid dimension mismatch");
        std::size_t total = 1;
        for (std::size_t m : shape) {
            if (m < 2) throw std::invalid_argument("refinement_sweep: axis needs >= 2 nodes");
            total *= m;
        }
        if (total <= prev_total)
            throw std::invalid_argument("refinement_sweep: grids must strictly refine");
        prev_total = total;
    }

    std::vector<ModulusFunction> cert_moduli;
    if (spec.certificate_pairs > 0) cert_moduli = certificate_moduli(spec.modulus);
    const YoungFunction expq = YoungFunction::exp_quarter_square();
    const bool needs_coords = form_needs_coords(spec.modulus.form);

    RegularityReport report;
    {
        nlohmann::ordered_json sj;
        sj["model"] = spec.model.name();
        if (!spec.model.hurst().empty()) sj["hurst"] = spec.model.hurst();
        nlohmann::ordered_json mj;
        mj["form"] = form_name(spec.modulus.form);
        if (!spec.modulus.base.empty()) {
            std::vector<std::string> bs;
            for (const auto& b : spec.modulus.base) bs.push_back(b.to_string());
            mj["base"] = bs;
        }
        if (!spec.modulus.hurst.empty()) mj["hurst"] = spec.modulus.hurst;
        if (spec.modulus.form == LogModulatedModulus::Form::heat ||
            spec.modulus.form == LogModulatedModulus::Form::heat_point)
            mj["alpha"] = spec.modulus.alpha;
        sj["modulus"] = mj;
        sj["delta_max"] = spec.delta_max;
        sj["replicates"] = spec.replicates;
        sj["seed"] = spec.seed;
        sj["slack"] = spec.slack;
        sj["certificate_pairs"] = spec.certificate_pairs;
        report.spec = std::move(sj);
    }

    double prev_median = -1.0;
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
        const auto& shape = grids[gi];
        auto axes = uniform_axes(shape);
        FieldSampler sampler(spec.model, axes);

        SweepGrid sg;
        sg.shape = shape;
        for (std::size_t r = 0; r < spec.replicates; ++r) {
            const GridField field = sampler.sample(spec.seed, r);
            const std::uint64_t sub_seed =
                mix64(mix64(spec.seed) ^ ((static_cast<std::uint64_t>(gi) << 40) + r + 1));
            const SupRatioDetail det =
                sup_ratio_detail(field, spec.modulus, spec.delta_max, sub_seed);

            ReplicateRow row;
            row.replicate = r;
            row.sup_ratio = det.value;
            row.max_increment = det.max_increment;
            row.subsampled = det.subsampled;
            row.subsample_seed = det.subsampled ? det.subsample_seed : 0;

            if (spec.certificate_pairs > 0) {
                const auto lists =
                    admissible_axis_pairs(axes, spec.delta_max, needs_coords, false);
                Xoshiro256pp rng(sub_seed, 1);
                std::vector<PointPair> cpairs;
                cpairs.reserve(spec.certificate_pairs);
                const std::size_t nu = axes.size();
                for (std::size_t d = 0; d < spec.certificate_pairs; ++d) {
                    PointPair pr;
                    pr.x.resize(nu);
                    pr.y.resize(nu);
                    for (std::size_t k = 0; k < nu; ++k) {
                        const auto size = lists[k].i.size();
                        const auto t = std::min(
                            size - 1, static_cast<std::size_t>(
                                          rng.uniform01() * static_cast<double>(size)));
                        pr.x[k] = axes[k][lists[k].i[t]];
                        pr.y[k] = axes[k][lists[k].j[t]];
                    }
                    cpairs.push_back(std::move(pr));
                }
                const CertificateReport cert =
                    grr_certificate(field, expq, cert_moduli, cpairs, spec.slack);
                row.B = cert.B;
                row.certificate_pass = cert.pass;
                row.certificate_vacuous = cert.vacuous;
            }
            sg.rows.push_back(std::move(row));
        }

        std::vector<double> ratios;
        ratios.reserve(sg.rows.size());
        for (const auto& row : sg.rows) ratios.push_back(row.sup_ratio);
        sg.median_ratio = median_of(ratios);
        sg.q95_ratio = q95_of(ratios);
        sg.unstable = prev_median >= 0.0 && sg.median_ratio > 1.5 * prev_median;
        if (sg.unstable) report.stable = false;
        prev_median = sg.median_ratio;
        report.grids.push_back(std::move(sg));
    }
    return report;
}

nlohmann::ordered_json RegularityReport::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "grr-report/1";
    j["spec"] = spec;
    nlohmann::ordered_json gj = nlohmann::ordered_json::array();
    for (const auto& g : grids) {
        nlohmann::ordered_json one;
        one["shape"] = g.shape;
        one["median_ratio"] = g.median_ratio;
        one["q95_ratio"] = g.q95_ratio;
        one["unstable"] = g.unstable;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : g.rows) {
            nlohmann::ordered_json row;
            row["replicate"] = r.replicate;
            row["B"] = std::isinf(r.B) ? nlohmann::ordered_json("inf")
                                       : nlohmann::ordered_json(r.B);
            row["sup_ratio"] = r.sup_ratio;
            row["max_increment"] = r.max_increment;
            row["certificate_pass"] = r.certificate_pass;
            row["certificate_vacuous"] = r.certificate_vacuous;
            row["subsampled"] = r.subsampled;
            if (r.subsampled) row["subsample_seed"] = r.subsample_seed;
            rows.push_back(std::move(row));
        }
        one["replicates"] = std::move(rows);
        gj.push_back(std::move(one));
    }
    j["grids"] = std::move(gj);
    j["stable"] = stable;
    return j;
}

} // namespace grr
