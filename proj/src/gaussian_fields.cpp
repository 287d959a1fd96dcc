#include "grr/gaussian_fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "grr/heat_field.hpp"
#include "grr/parallel.hpp"
#include "grr/rng.hpp"

namespace grr {

namespace {

void check_dim(std::size_t d) {
    if (d < 1 || d > 8) throw std::invalid_argument("dimension must be in [1, 8]");
}

void check_pair(const CovarianceModel& model, const PointPair& pair) {
    if (pair.x.size() != model.dim() || pair.y.size() != model.dim())
        throw std::invalid_argument("point dimension does not match the model");
}

std::vector<std::size_t> axes_shape(const std::vector<std::vector<double>>& axes) {
    std::vector<std::size_t> shape;
    shape.reserve(axes.size());
    for (const auto& a : axes) shape.push_back(a.size());
    return shape;
}

// symmetric factorization with exact-zero rows pinned and escalating jitter
Eigen::MatrixXd pinned_cholesky(const Eigen::MatrixXd& C, double* jitter_used) {
    const Eigen::Index m = C.rows();
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        if (C(i, i) != 0.0) keep.push_back(i);

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    *jitter_used = 0.0;
    if (keep.empty()) return L;

    const Eigen::Index s = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub(s, s);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = 0; j < s; ++j) sub(i, j) = C(keep[i], keep[j]);

    const double scale = sub.trace() / static_cast<double>(s);
    const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
    for (double step : ladder) {
        Eigen::MatrixXd trial = sub;
        if (step > 0.0) trial.diagonal().array() += step * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd ls = llt.matrixL();
            for (Eigen::Index i = 0; i < s; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) L(keep[i], keep[j]) = ls(i, j);
            *jitter_used = step * scale;
            return L;
        }
    }
    throw std::runtime_error(
        "covariance factorization failed at maximum jitter; matrix is not positive semidefinite");
}

} // namespace

CovarianceModel CovarianceModel::fbm(std::vector<double> hurst) {
    check_dim(hurst.size());
    for (double h : hurst)
        if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1]");
    CovarianceModel m;
    m.dim_ = hurst.size();
    m.name_ = "fbm";
    m.hurst_ = std::move(hurst);
    for (double h : m.hurst_) {
        m.factors_.push_back([h](double s, double t) {
            return 0.5 * (std::pow(std::fabs(s), 2.0 * h) + std::pow(std::fabs(t), 2.0 * h) -
                          std::pow(std::fabs(s - t), 2.0 * h));
        });
    }
    return m;
}

CovarianceModel CovarianceModel::heat() {
    CovarianceModel m;
    m.dim_ = 2;
    m.name_ = "heat";
    m.full_ = [](std::span<const double> x, std::span<const double> y) {
        return heat_cov({x[0], x[1]}, {y[0], y[1]});
    };
    return m;
}

CovarianceModel CovarianceModel::product(std::vector<Factor> factors, std::string name) {
    check_dim(factors.size());
    for (const auto& f : factors)
        if (!f) throw std::invalid_argument("null covariance factor");
    CovarianceModel m;
    m.dim_ = factors.size();
    m.name_ = std::move(name);
    m.factors_ = std::move(factors);
    return m;
}

CovarianceModel CovarianceModel::custom(Full q, std::size_t dim, std::string name) {
    check_dim(dim);
    if (!q) throw std::invalid_argument("null covariance callable");
    CovarianceModel m;
    m.dim_ = dim;
    m.name_ = std::move(name);
    m.full_ = std::move(q);
    return m;
}

double CovarianceModel::factor(std::size_t k, double s, double t) const {
    if (!is_product()) throw std::logic_error("model has no factor form");
    return factors_.at(k)(s, t);
}

double CovarianceModel::operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != dim_ || y.size() != dim_)
        throw std::invalid_argument("point dimension does not match the model");
    if (is_product()) {
        double q = 1.0;
        for (std::size_t k = 0; k < dim_; ++k) q *= factors_[k](x[k], y[k]);
        return q;
    }
    return full_(x, y);
}

double increment_variance(const CovarianceModel& model, const PointPair& pair) {
    check_pair(model, pair);
    if (!model.is_product()) return increment_variance_generic(model, pair);
    double v = 1.0;
    for (std::size_t k = 0; k < model.dim(); ++k) {
        const double xx = model.factor(k, pair.x[k], pair.x[k]);
        const double xy = model.factor(k, pair.x[k], pair.y[k]);
        const double yx = model.factor(k, pair.y[k], pair.x[k]);
        const double yy = model.factor(k, pair.y[k], pair.y[k]);
        v *= xx - xy - yx + yy;
    }
    return v;
}

double increment_variance_generic(const CovarianceModel& model, const PointPair& pair) {
    check_pair(model, pair);
    const int n = static_cast<int>(model.dim());
    const auto corners = corner_expansion(n);
    std::vector<double> a(model.dim()), b(model.dim());
    KahanSum acc;
    for (const auto& ca : corners) {
        for (int k = 0; k < n; ++k)
            a[static_cast<std::size_t>(k)] =
                corner_takes_y(ca.corner, k, n) ? pair.y[static_cast<std::size_t>(k)]
                                                : pair.x[static_cast<std::size_t>(k)];
        for (const auto& cb : corners) {
            for (int k = 0; k < n; ++k)
                b[static_cast<std::size_t>(k)] =
                    corner_takes_y(cb.corner, k, n) ? pair.y[static_cast<std::size_t>(k)]
                                                    : pair.x[static_cast<std::size_t>(k)];
            acc.add(ca.sign * cb.sign * model(a, b));
        }
    }
    return acc.sum;
}

EmpiricalModulus build_empirical_modulus(const CovarianceModel& model,
                                         const std::vector<std::vector<double>>& axes) {
    if (axes.size() != model.dim())
        throw std::invalid_argument("grid dimension does not match the model");
    const std::size_t n = axes.size();
    const auto shape = axes_shape(axes);
    std::size_t total = 1;
    for (std::size_t m : shape) {
        if (m < 2) throw std::invalid_argument("each axis needs at least two nodes");
        total *= m;
    }

    // node coordinates, row-major with axis 0 slowest
    std::vector<std::vector<double>> coords(total, std::vector<double>(n));
    for (std::size_t r = 0; r < total; ++r) {
        std::size_t rem = r;
        for (std::size_t k = n; k-- > 0;) {
            coords[r][k] = axes[k][rem % shape[k]];
            rem /= shape[k];
        }
    }

    // distinct positive separations per axis, from the same subtraction used
    // when bucketing pairs so matches are exact
    std::vector<std::vector<double>> seps(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < shape[k]; ++i)
            for (std::size_t j = i + 1; j < shape[k]; ++j)
                seps[k].push_back(std::fabs(axes[k][i] - axes[k][j]));
        std::sort(seps[k].begin(), seps[k].end());
        seps[k].erase(std::unique(seps[k].begin(), seps[k].end()), seps[k].end());
        if (!seps[k].empty() && seps[k].front() == 0.0) seps[k].erase(seps[k].begin());
        if (seps[k].empty()) throw std::invalid_argument("axis has no positive separations");
    }

    EmpiricalModulus em;
    PointPair pair;
    pair.x.resize(n);
    pair.y.resize(n);
    for (std::size_t stage = 0; stage < n; ++stage) {
        std::vector<double> peak(seps[stage].size(), 0.0);
        for (std::size_t r = 0; r < total; ++r) {
            for (std::size_t s = r + 1; s < total; ++s) {
                const double dk = std::fabs(coords[r][stage] - coords[s][stage]);
                if (dk == 0.0) continue;
                pair.x = coords[r];
                pair.y = coords[s];
                double v = increment_variance(model, pair);
                if (v < -1e-10)
                    throw std::runtime_error(
                        "negative rectangular covariance increment; not a valid covariance");
                if (v <= 0.0) continue;
                double ratio = std::sqrt(v);
                for (std::size_t j = 0; j < stage; ++j) {
                    const double dj = std::fabs(coords[r][j] - coords[s][j]);
                    const double pj = em.p[j](dj);
                    if (pj == 0.0)
                        throw std::runtime_error(
                            "modulus construction divided a positive increment by zero");
                    ratio /= pj;
                }
                const auto it =
                    std::lower_bound(seps[stage].begin(), seps[stage].end(), dk);
                const auto idx = static_cast<std::size_t>(it - seps[stage].begin());
                peak[idx] = std::max(peak[idx], ratio);
            }
        }
        for (std::size_t i = 1; i < peak.size(); ++i) peak[i] = std::max(peak[i], peak[i - 1]);
        em.p.push_back(ModulusFunction::tabulated(seps[stage], peak));
    }
    return em;
}

double empirical_dominance_gap(const CovarianceModel& model,
                               const std::vector<std::vector<double>>& axes,
                               const EmpiricalModulus& em) {
    if (axes.size() != model.dim() || em.p.size() != model.dim())
        throw std::invalid_argument("dimension mismatch");
    const std::size_t n = axes.size();
    const auto shape = axes_shape(axes);
    std::size_t total = 1;
    for (std::size_t m : shape) total *= m;

    std::vector<std::vector<double>> coords(total, std::vector<double>(n));
    for (std::size_t r = 0; r < total; ++r) {
        std::size_t rem = r;
        for (std::size_t k = n; k-- > 0;) {
            coords[r][k] = axes[k][rem % shape[k]];
            rem /= shape[k];
        }
    }

    double gap = -std::numeric_limits<double>::infinity();
    PointPair pair;
    for (std::size_t r = 0; r < total; ++r) {
        for (std::size_t s = r + 1; s < total; ++s) {
            pair.x = coords[r];
            pair.y = coords[s];
            const double v = std::max(0.0, increment_variance(model, pair));
            double bound = 1.0;
            for (std::size_t k = 0; k < n; ++k)
                bound *= em.p[k](std::fabs(coords[r][k] - coords[s][k]));
            gap = std::max(gap, std::sqrt(v) - bound);
        }
    }
    return gap;
}

FieldSampler::FieldSampler(const CovarianceModel& model,
                           std::vector<std::vector<double>> axes, bool force_full_operator)
    : axes_(std::move(axes)) {
    if (axes_.size() != model.dim())
        throw std::invalid_argument("grid dimension does not match the model");
    shape_ = axes_shape(axes_);
    total_ = 1;
    for (std::size_t m : shape_) {
        if (m == 0) throw std::invalid_argument("empty grid axis");
        total_ *= m;
    }

    if (model.is_product()) {
        product_ = true;
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            const auto& a = axes_[k];
            const Eigen::Index m = static_cast<Eigen::Index>(a.size());
            Eigen::MatrixXd C(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double q = model.factor(k, a[static_cast<std::size_t>(i)],
                                                  a[static_cast<std::size_t>(j)]);
                    C(i, j) = q;
                    C(j, i) = q;
                }
            }
            double jit = 0.0;
            factors_.push_back(pinned_cholesky(C, &jit));
            jitters_.push_back(jit);
        }
        if (force_full_operator) {
            // dense operator assembled from the same per-axis factors; entry
            // products accumulate left to right exactly as the lean path does
            materialized_ = true;
            Eigen::MatrixXd D(static_cast<Eigen::Index>(total_),
                              static_cast<Eigen::Index>(total_));
            std::vector<std::size_t> ri(axes_.size()), ci(axes_.size());
            for (std::size_t r = 0; r < total_; ++r) {
                std::size_t rem = r;
                for (std::size_t k = axes_.size(); k-- > 0;) {
                    ri[k] = rem % shape_[k];
                    rem /= shape_[k];
                }
                for (std::size_t c = 0; c < total_; ++c) {
                    std::size_t crem = c;
                    for (std::size_t k = axes_.size(); k-- > 0;) {
                        ci[k] = crem % shape_[k];
                        crem /= shape_[k];
                    }
                    double prod = 1.0;
                    for (std::size_t k = 0; k < axes_.size(); ++k)
                        prod *= factors_[k](static_cast<Eigen::Index>(ri[k]),
                                            static_cast<Eigen::Index>(ci[k]));
                    D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = prod;
                }
            }
            std::vector<Eigen::MatrixXd> dense;
            dense.push_back(std::move(D));
            factors_.swap(dense);
        }
        return;
    }

    // full kernel: assemble the grid covariance and factor it once
    std::vector<double> xr(axes_.size()), xc(axes_.size());
    Eigen::MatrixXd C(static_cast<Eigen::Index>(total_), static_cast<Eigen::Index>(total_));
    for (std::size_t r = 0; r < total_; ++r) {
        std::size_t rem = r;
        for (std::size_t k = axes_.size(); k-- > 0;) {
            xr[k] = axes_[k][rem % shape_[k]];
            rem /= shape_[k];
        }
        for (std::size_t c = 0; c <= r; ++c) {
            std::size_t crem = c;
            for (std::size_t k = axes_.size(); k-- > 0;) {
                xc[k] = axes_[k][crem % shape_[k]];
                crem /= shape_[k];
            }
            const double q = model(xr, xc);
            C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = q;
            C(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = q;
        }
    }
    double jit = 0.0;
    factors_.push_back(pinned_cholesky(C, &jit));
    jitters_.push_back(jit);
    materialized_ = true;
}

double FieldSampler::max_jitter() const {
    double m = 0.0;
    for (double j : jitters_) m = std::max(m, j);
    return m;
}

GridField FieldSampler::sample(std::uint64_t seed, std::uint64_t replicate) const {
    NormalStream ns(seed, replicate);
    std::vector<double> z(total_);
    for (double& v : z) v = ns.next();

    std::vector<double> out(total_, 0.0);
    if (materialized_) {
        const Eigen::MatrixXd& D = factors_[0];
        for (std::size_t r = 0; r < total_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < total_; ++c)
                s += D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * z[c];
            out[r] = s;
        }
    } else {
        const std::size_t n = axes_.size();
        std::vector<std::size_t> ri(n), ci(n);
        for (std::size_t r = 0; r < total_; ++r) {
            std::size_t rem = r;
            for (std::size_t k = n; k-- > 0;) {
                ri[k] = rem % shape_[k];
                rem /= shape_[k];
            }
            double s = 0.0;
            for (std::size_t c = 0; c < total_; ++c) {
                std::size_t crem = c;
                for (std::size_t k = n; k-- > 0;) {
                    ci[k] = crem % shape_[k];
                    crem /= shape_[k];
                }
                double prod = 1.0;
                for (std::size_t k = 0; k < n && prod != 0.0; ++k)
                    prod *= factors_[k](static_cast<Eigen::Index>(ri[k]),
                                        static_cast<Eigen::Index>(ci[k]));
                // adding an exact zero never changes the accumulator, so the
                // materialized path computes the same sum term by term
                if (prod != 0.0) s += prod * z[c];
            }
            out[r] = s;
        }
    }
    return GridField(axes_, std::move(out));
}

GridField sample_field(const CovarianceModel& model,
                       const std::vector<std::vector<double>>& axes,
                       std::uint64_t seed, std::uint64_t replicate) {
    return FieldSampler(model, axes).sample(seed, replicate);
}

nlohmann::ordered_json SampledGaussianField::metadata() const {
    nlohmann::ordered_json meta;
    meta["model"] = model;
    meta["params"] = params;
    meta["seed"] = seed;
    meta["replicate"] = replicate;
    meta["jitter"] = jitter;
    return meta;
}

MomentEstimate increment_moment_mc(const CovarianceModel& model, const PointPair& pair,
                                   std::size_t replicates, std::uint64_t seed) {
    check_pair(model, pair);
    if (replicates < 100) throw std::invalid_argument("need at least 100 replicates");
    const std::size_t n = model.dim();
    for (std::size_t k = 0; k < n; ++k)
        if (pair.x[k] == pair.y[k]) return {0.0, 0.0};

    std::vector<std::vector<double>> axes(n);
    std::vector<std::size_t> ix(n), iy(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = std::min(pair.x[k], pair.y[k]);
        const double hi = std::max(pair.x[k], pair.y[k]);
        axes[k] = {lo, hi};
        ix[k] = pair.x[k] == hi ? 1 : 0;
        iy[k] = 1 - ix[k];
    }

    FieldSampler sampler(model, axes);
    KahanSum sq, quad;
    for (std::size_t r = 0; r < replicates; ++r) {
        const GridField f = sampler.sample(seed, r);
        const double v = rect_increment_nodes(f, ix, iy);
        sq.add(v * v);
        quad.add(v * v * v * v);
    }
    MomentEstimate est;
    est.mean = sq.sum / static_cast<double>(replicates);
    const double var = quad.sum / static_cast<double>(replicates) - est.mean * est.mean;
    est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(replicates));
    return est;
}

double exp_moment_check(double variance, std::size_t draws, std::uint64_t seed) {
    if (!(variance >= 0.0)) throw std::invalid_argument("variance must be >= 0");
    if (draws < 100000) throw std::invalid_argument("need at least 1e5 draws");
    if (variance >= 2.0)
        throw std::domain_error("exp(N^2/4) has infinite expectation at variance >= 2");
    NormalStream ns(seed, 0);
    KahanSum acc;
    for (std::size_t i = 0; i < draws; ++i) {
        const double g = ns.next();
        acc.add(std::exp(0.25 * variance * g * g));
    }
    return acc.sum / static_cast<double>(draws);
}

double exp_moment_closed_form(double variance) {
    if (!(variance >= 0.0)) throw std::invalid_argument("variance must be >= 0");
    if (variance >= 2.0)
        throw std::domain_error("exp(N^2/4) has infinite expectation at variance >= 2");
    return 1.0 / std::sqrt(1.0 - 0.5 * variance);
}

} // namespace grr
