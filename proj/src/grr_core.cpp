#include "grr/grr_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "grr/parallel.hpp"
#include "grr/quadrature.hpp"

namespace grr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quadrature-node view of a field: per-axis coordinates and weights plus
// row-major values.  Grid fields keep their nodes (Voronoi cell weights over
// [0,1]); callable fields are evaluated at uniform cell centers.
struct DiscreteField {
    std::vector<std::vector<double>> axes;
    std::vector<std::vector<double>> weights;
    std::vector<double> values;
    std::vector<std::size_t> shape;
    std::vector<std::size_t> strides;

    std::size_t size() const { return values.size(); }
    int dim() const { return static_cast<int>(axes.size()); }
};

std::vector<double> voronoi_weights(const std::vector<double>& ax) {
    const std::size_t m = ax.size();
    std::vector<double> w(m);
    if (m == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double lo = i == 0 ? 0.0 : 0.5 * (ax[i - 1] + ax[i]);
        double hi = i + 1 == m ? 1.0 : 0.5 * (ax[i] + ax[i + 1]);
        w[i] = hi - lo;
    }
    return w;
}

void finalize_layout(DiscreteField& df) {
    df.shape.clear();
    for (const auto& ax : df.axes) df.shape.push_back(ax.size());
    df.strides.assign(df.axes.size(), 1);
    std::size_t total = 1;
    for (std::size_t k = df.axes.size(); k-- > 0;) {
        df.strides[k] = total;
        total *= df.shape[k];
    }
}

DiscreteField discretize(const GrrProblem& prob) {
    DiscreteField df;
    if (const auto* g = std::get_if<GridField>(&prob.field)) {
        df.axes = g->axes();
        for (const auto& ax : df.axes) df.weights.push_back(voronoi_weights(ax));
        df.values = g->values();
        finalize_layout(df);
        return df;
    }
    const auto& cf = std::get<CallableField>(prob.field);
    if (cf.dim < 1 || cf.dim > 8) throw std::invalid_argument("GrrProblem: dimension must be in [1,8]");
    const int res = prob.resolution;
    if (res < 2) throw std::invalid_argument("GrrProblem: resolution must be at least 2");
    std::vector<double> centers(static_cast<std::size_t>(res));
    for (int i = 0; i < res; ++i) centers[static_cast<std::size_t>(i)] = (i + 0.5) / res;
    df.axes.assign(static_cast<std::size_t>(cf.dim), centers);
    df.weights.assign(static_cast<std::size_t>(cf.dim),
                      std::vector<double>(static_cast<std::size_t>(res), 1.0 / res));
    finalize_layout(df);
    std::size_t total = 1;
    for (std::size_t s : df.shape) total *= s;
    df.values.resize(total);
    std::vector<std::size_t> idx(df.axes.size(), 0);
    std::vector<double> pt(df.axes.size());
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t k = 0; k < df.axes.size(); ++k) pt[k] = df.axes[k][idx[k]];
        df.values[flat] = cf.fn(pt);
        for (std::size_t k = df.axes.size(); k-- > 0;) {
            if (++idx[k] < df.shape[k]) break;
            idx[k] = 0;
        }
    }
    return df;
}

// ratio with the 0/0 = 0 convention; x/0 with x != 0 is +infinity
inline double safe_ratio(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
    return num / den;
}

} // namespace

int GrrProblem::dim() const {
    if (const auto* g = std::get_if<GridField>(&field)) return g->dim();
    return std::get<CallableField>(field).dim;
}

double b_functional(const GrrProblem& prob) {
    const int n = prob.dim();
    if (prob.moduli.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("b_functional: moduli count must equal field dimension");

    DiscreteField df = discretize(prob);
    const std::size_t M = df.size();
    const auto nu = static_cast<std::size_t>(n);

    // per-axis modulus tables over separation of node indices
    std::vector<std::vector<double>> ptab(nu);
    for (std::size_t k = 0; k < nu; ++k) {
        const auto& ax = df.axes[k];
        const std::size_t m = ax.size();
        ptab[k].resize(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                ptab[k][i * m + j] = prob.moduli[k](std::fabs(ax[i] - ax[j]));
    }

    // per-node digit decomposition and quadrature weight
    std::vector<std::size_t> digits(M * nu);
    std::vector<double> wnode(M, 1.0);
    {
        std::vector<std::size_t> idx(nu, 0);
        for (std::size_t flat = 0; flat < M; ++flat) {
            double w = 1;
            for (std::size_t k = 0; k < nu; ++k) {
                digits[flat * nu + k] = idx[k];
                w *= df.weights[k][idx[k]];
            }
            wnode[flat] = w;
            for (std::size_t k = nu; k-- > 0;) {
                if (++idx[k] < df.shape[k]) break;
                idx[k] = 0;
            }
        }
    }

    const auto corners = corner_expansion(n);
    std::atomic<bool> overflow{false};

    double total = parallel_sum(M * M, [&](std::size_t q) -> double {
        const std::size_t xi = q / M;
        const std::size_t yi = q % M;
        const std::size_t* dx = &digits[xi * nu];
        const std::size_t* dy = &digits[yi * nu];

        bool degenerate = false;
        double den = 1;
        for (std::size_t k = 0; k < nu; ++k) {
            if (dx[k] == dy[k]) degenerate = true;
            const std::size_t m = df.shape[k];
            den *= ptab[k][dx[k] * m + dy[k]];
        }
        double ratio = 0;
        if (!degenerate) {
            // shared coordinates make the increment identically zero, so the
            // corner sum runs only on proper boxes (its fp residue would
            // otherwise turn the 0/0 convention into x/0)
            double num = 0;
            for (const auto& cs : corners) {
                std::size_t flat = 0;
                for (std::size_t k = 0; k < nu; ++k)
                    flat += (corner_takes_y(cs.corner, static_cast<int>(k), n) ? dy[k] : dx[k]) * df.strides[k];
                num += cs.sign > 0 ? df.values[flat] : -df.values[flat];
            }
            ratio = safe_ratio(std::fabs(num), den);
        }
        double contrib;
        if (ratio == kInf) {
            contrib = kInf;
        } else {
            contrib = wnode[xi] * wnode[yi] * prob.psi(ratio);
        }
        if (!std::isfinite(contrib)) {
            overflow.store(true, std::memory_order_relaxed);
            return 0.0;
        }
        return contrib;
    });

    if (overflow.load()) return kInf;
    return total;
}

namespace {

// clamped inverse used inside the bound integrals (0 below Psi(0))
inline double psi_inv_clamped(const YoungFunction& psi, double u) {
    if (psi.kind() == YoungFunction::Kind::exp_quarter_square)
        return u < 1.0 ? 0.0 : 2.0 * std::sqrt(std::log(u));
    return psi.inverse(u);
}

} // namespace

GrrBound grr_rhs(const YoungFunction& psi, std::span<const ModulusFunction> moduli,
                 double B, std::span<const double> deltas) {
    const std::size_t n = moduli.size();
    if (n == 0 || n > 8) throw std::invalid_argument("grr_rhs: dimension must be in [1,8]");
    if (deltas.size() != n) throw std::invalid_argument("grr_rhs: deltas size mismatch");
    if (!(B >= 0)) throw std::invalid_argument("grr_rhs: B must be nonnegative");
    for (double d : deltas)
        if (!(d >= 0 && d <= 1)) throw std::invalid_argument("grr_rhs: deltas must lie in [0,1]");

    GrrBound out;
    for (double d : deltas)
        if (d == 0) return out;  // empty integration range
    if (B == 0) return out;

    const double front = std::pow(8.0, static_cast<double>(n));
    const double arg0 = std::pow(4.0, static_cast<double>(n)) * B;

    bool all_power = psi.kind() == YoungFunction::Kind::power;
    for (const auto& p : moduli)
        if (p.kind() != ModulusFunction::Kind::power) all_power = false;

    if (psi.kind() == YoungFunction::Kind::power) {
        const double alpha = psi.alpha();
        if (all_power) {
            double value = front * std::pow(arg0, 1.0 / alpha);
            for (std::size_t k = 0; k < n; ++k) {
                double gamma = moduli[k].gamma();
                double expo = gamma - 2.0 / alpha;
                if (!(expo > 0)) {
                    out.divergent = true;
                    return out;
                }
                value *= moduli[k].scale() * gamma * std::pow(deltas[k], expo) / expo;
            }
            out.value = value;
            return out;
        }
        // power Psi factorizes: prod_k of 1-D integrals of u^(-2/alpha) dp_k
        double value = front * std::pow(arg0, 1.0 / alpha);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& p = moduli[k];
            TailIntegral I = integrate_to_zero(
                [&](double u) { return std::pow(u, -2.0 / alpha) * p.derivative(u); }, deltas[k]);
            if (I.divergent) {
                out.divergent = true;
                return out;
            }
            value *= I.value;
        }
        out.value = value;
        return out;
    }

    // exp_quarter_square: PsiInv = 2 sqrt(log(4^n B / prod u^2)) where > 1
    out.value = front * 2.0 * log_tail_integral(moduli, deltas, std::log(arg0));
    return out;
}

double log_tail_integral(std::span<const ModulusFunction> moduli,
                         std::span<const double> deltas, double c) {
    const std::size_t n = moduli.size();
    if (n == 0 || n > 8) throw std::invalid_argument("log_tail_integral: dimension must be in [1,8]");
    if (deltas.size() != n) throw std::invalid_argument("log_tail_integral: deltas size mismatch");
    for (double d : deltas) {
        if (!(d >= 0 && d <= 1))
            throw std::invalid_argument("log_tail_integral: deltas must lie in [0,1]");
        if (d == 0) return 0.0;
    }

    // non-factorizable tensor quadrature.  Panels are geometrically graded
    // toward BOTH axis endpoints: toward u_k = 0 where p' may blow up and the
    // log diverges, and toward u_k = delta_k where the sqrt argument can
    // vanish at the far corner (c = 0, delta = 1) with a branch point.
    const int levels = n <= 2 ? 48 : 32;
    const int order = n <= 2 ? 8 : 6;
    const GaussRule& rule = gauss_legendre(order);

    // per-axis node logs and measure weights w * p'(u); the tensor loop only
    // ever consumes log u, so store that directly
    std::vector<std::vector<double>> lognodes(n), nweights(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = deltas[k];
        std::vector<std::pair<double, double>> panels;
        panels.reserve(2 * static_cast<std::size_t>(levels) + 1);
        double e = 0.5 * d;
        for (int j = 0; j < levels; ++j) {  // (0, d/2]: halve toward 0
            panels.emplace_back(0.5 * e, e);
            e *= 0.5;
        }
        double edge = 0.5 * d;
        for (int j = 1; j <= levels; ++j) {  // [d/2, d): halve toward d
            double next = d - std::ldexp(0.5 * d, -j);
            panels.emplace_back(edge, next);
            edge = next;
        }
        panels.emplace_back(edge, d);
        for (auto [lo, hi] : panels) {
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (int i = 0; i < order; ++i) {
                double u = mid + half * rule.nodes[static_cast<std::size_t>(i)];
                lognodes[k].push_back(std::log(u));
                nweights[k].push_back(half * rule.weights[static_cast<std::size_t>(i)] *
                                      moduli[k].derivative(u));
            }
        }
    }

    // tensor sum: iterate the flattened product space
    std::vector<std::size_t> sizes(n);
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) {
        sizes[k] = lognodes[k].size();
        total *= sizes[k];
    }
    return parallel_sum(total, [&](std::size_t q) -> double {
        double wprod = 1, logsum = 0;
        for (std::size_t k = n; k-- > 0;) {
            std::size_t i = q % sizes[k];
            q /= sizes[k];
            wprod *= nweights[k][i];
            logsum += lognodes[k][i];
        }
        double arg = c - 2.0 * logsum;
        if (arg <= 0) return 0.0;
        return wprod * std::sqrt(arg);
    });
}

GrrReport verify_grr(const GrrProblem& prob, std::span<const PointPair> pairs, double slack,
                     std::optional<double> closed_form_B) {
    if (!(slack >= 0)) throw std::invalid_argument("verify_grr: slack must be nonnegative");
    GrrReport report;
    report.slack = slack;
    report.closed_form_B = closed_form_B.has_value();
    report.B = closed_form_B ? *closed_form_B : b_functional(prob);

    const int n = prob.dim();
    FieldView view = std::visit(
        [](const auto& f) -> FieldView {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GridField>)
                return FieldView(f);
            else
                return FieldView(f.fn, f.dim);
        },
        prob.field);

    std::vector<double> deltas(static_cast<std::size_t>(n));
    for (const auto& pair : pairs) {
        PairCheck check;
        check.pair = pair;
        check.lhs = std::fabs(rect_increment(view, pair));
        for (int k = 0; k < n; ++k) {
            auto ku = static_cast<std::size_t>(k);
            deltas[ku] = std::fabs(pair.x[ku] - pair.y[ku]);
        }
        if (std::isinf(report.B)) {
            check.vacuous = true;
            check.rhs = kInf;
            check.pass = true;
        } else {
            GrrBound rhs = grr_rhs(prob.psi, prob.moduli, report.B, deltas);
            if (rhs.divergent) {
                check.vacuous = true;
                check.rhs = kInf;
                check.pass = true;
            } else {
                check.rhs = rhs.value;
                check.pass = check.lhs <= (1.0 + slack) * check.rhs;
            }
        }
        if (!check.pass) ++report.failures;
        report.pairs.push_back(std::move(check));
    }
    report.pass = report.failures == 0;
    return report;
}

double kolmogorov_constant(int n, double alpha, std::span<const double> beta,
                           std::span<const double> eps) {
    if (n < 1 || n > 8) throw std::invalid_argument("kolmogorov_constant: n must be in [1,8]");
    if (!(alpha > 0)) throw std::invalid_argument("kolmogorov_constant: alpha must be positive");
    if (beta.size() != static_cast<std::size_t>(n) || eps.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("kolmogorov_constant: beta/eps size mismatch");
    double c = std::pow(8.0, n) * std::pow(4.0, n / alpha);
    for (int k = 0; k < n; ++k) {
        auto ku = static_cast<std::size_t>(k);
        if (!(eps[ku] > 0) || !(eps[ku] * alpha < beta[ku]))
            throw std::invalid_argument("kolmogorov_constant: need 0 < eps_k*alpha < beta_k");
        c *= 1.0 + 2.0 / (beta[ku] - alpha * eps[ku]);
    }
    return c;
}

KolmogorovReport kolmogorov_bound_check(const GridField& field, double alpha,
                                        std::span<const double> beta, std::span<const double> eps,
                                        double k_hat, double slack) {
    const int n = field.dim();
    KolmogorovReport rep;
    rep.constant = kolmogorov_constant(n, alpha, beta, eps);
    rep.k_hat = k_hat;

    std::vector<ModulusFunction> moduli;
    for (int k = 0; k < n; ++k) {
        auto ku = static_cast<std::size_t>(k);
        moduli.push_back(ModulusFunction::power((2.0 + beta[ku] - alpha * eps[ku]) / alpha));
    }
    GrrProblem prob{field, YoungFunction::power(alpha), moduli};
    rep.B = b_functional(prob);
    if (std::isinf(rep.B)) {
        rep.vacuous = true;
        rep.pass = true;
        return rep;
    }
    rep.eta = std::pow(rep.B, 1.0 / alpha);
    rep.eta_alpha = rep.B;

    // per-axis |dx|^(beta/alpha - eps) tables
    const auto nu = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> dtab(nu);
    for (std::size_t k = 0; k < nu; ++k) {
        const auto& ax = field.axis(static_cast<int>(k));
        const std::size_t m = ax.size();
        double expo = beta[k] / alpha - eps[k];
        dtab[k].resize(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                dtab[k][i * m + j] = std::pow(std::fabs(ax[i] - ax[j]), expo);
    }

    const std::size_t M = field.size();
    std::vector<std::size_t> ix(nu), iy(nu);
    double max_ratio = 0;
    for (std::size_t a = 0; a < M; ++a) {
        std::size_t ra = a;
        for (std::size_t k = 0; k < nu; ++k) {
            ix[k] = ra / field.strides()[k];
            ra %= field.strides()[k];
        }
        for (std::size_t b = a + 1; b < M; ++b) {
            std::size_t rb = b;
            bool degenerate = false;
            double denom = rep.constant * rep.eta;
            for (std::size_t k = 0; k < nu; ++k) {
                iy[k] = rb / field.strides()[k];
                rb %= field.strides()[k];
                if (iy[k] == ix[k]) degenerate = true;
            }
            if (degenerate) continue;  // lhs identically 0, ratio 0
            for (std::size_t k = 0; k < nu; ++k)
                denom *= dtab[k][ix[k] * field.shape()[k] + iy[k]];
            double lhs = std::fabs(rect_increment_nodes(field, ix, iy));
            double ratio = safe_ratio(lhs, denom);
            if (ratio > max_ratio) max_ratio = ratio;
        }
    }
    rep.max_ratio = max_ratio;
    rep.pass = max_ratio <= 1.0 + slack;
    return rep;
}

namespace {

// level integral I(t) = sum over grid cells s (skipping s = t) and atoms z of
// Psi(|g(z,t)-g(z,s)| / p(|t-s|)) with the 0/0 = 0 convention
double level_integral(const std::function<double(double, double)>& g,
                      std::span<const double> zs, std::span<const double> weights,
                      const YoungFunction& psi, const ModulusFunction& p, double t,
                      int t_grid) {
    double total = 0;
    const double h = 1.0 / t_grid;
    for (int j = 0; j < t_grid; ++j) {
        double s = (j + 0.5) * h;
        if (s == t) continue;
        double pd = p(std::fabs(t - s));
        double inner = 0;
        for (std::size_t z = 0; z < zs.size(); ++z)
            inner += weights[z] * psi(safe_ratio(std::fabs(g(zs[z], t) - g(zs[z], s)), pd));
        total += h * inner;
    }
    return total;
}

double pair_integral(const std::function<double(double, double)>& g,
                     std::span<const double> zs, std::span<const double> weights,
                     const YoungFunction& psi, const ModulusFunction& p, double t_new,
                     double t_old) {
    double pd = p(std::fabs(t_new - t_old));
    double total = 0;
    for (std::size_t z = 0; z < zs.size(); ++z)
        total += weights[z] * psi(safe_ratio(std::fabs(g(zs[z], t_new) - g(zs[z], t_old)), pd));
    return total;
}

} // namespace

GrrChain build_grr_chain(const std::function<double(double, double)>& g,
                         std::span<const double> zs, std::span<const double> weights,
                         const YoungFunction& psi, const ModulusFunction& p, double B,
                         int t_grid, int max_refine) {
    if (zs.size() != weights.size() || zs.empty())
        throw std::invalid_argument("build_grr_chain: measure atoms/weights mismatch");
    if (!(B > 0)) throw std::invalid_argument("build_grr_chain: B must be positive");
    if (t_grid < 8) throw std::invalid_argument("build_grr_chain: grid too small");

    const double h = 1.0 / t_grid;
    auto I = [&](double t) { return level_integral(g, zs, weights, psi, p, t, t_grid); };

    GrrChain chain;
    // largest interior grid point with I(t) <= B
    for (int j = t_grid - 1; j >= 1; --j) {
        double t = j * h;
        if (I(t) <= B) {
            chain.t.push_back(t);
            break;
        }
    }
    if (chain.t.empty())
        throw std::runtime_error("build_grr_chain: no admissible t0 on the grid (grid too coarse)");

    for (std::size_t k = 1; k < 200; ++k) {
        double t_prev = chain.t.back();
        double d_prev = p.inverse(p(t_prev) / 2.0);
        chain.d.push_back(d_prev);
        if (d_prev < h) break;  // below grid resolution: chain complete

        double I_prev = I(t_prev);
        double level_bound = 2.0 * B / d_prev;
        double pair_bound = 2.0 * I_prev / d_prev;

        bool found = false;
        for (int refine = 0; refine <= max_refine && !found; ++refine) {
            double step = h / static_cast<double>(1u << refine);
            // largest candidate <= d_prev on this refinement, descending
            auto top = static_cast<long long>(std::floor(d_prev / step + 1e-12));
            for (long long j = top; j >= 1; --j) {
                double cand = static_cast<double>(j) * step;
                if (cand > d_prev || cand >= t_prev) continue;
                if (refine > 0 && j % 2 == 0) continue;  // already tried on a coarser level
                if (I(cand) > level_bound) continue;
                double pi = pair_integral(g, zs, weights, psi, p, cand, t_prev);
                if (pi > pair_bound) continue;
                chain.t.push_back(cand);
                chain.step_integral.push_back(pi);
                chain.step_bound.push_back(4.0 * B / (d_prev * d_prev));
                found = true;
                break;
            }
        }
        if (!found)
            throw std::runtime_error("build_grr_chain: no admissible step candidate (grid too coarse)");
        if (chain.t.back() < h) break;  // below grid resolution
    }
    return chain;
}

} // namespace grr
