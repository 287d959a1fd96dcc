#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grr/field_grid.hpp"
#include "grr/modulus.hpp"

namespace grr {

// Covariance of a centered Gaussian field on [0,1]^n.  Product models carry
// one 1-D factor per axis; non-product models evaluate the full kernel.
class CovarianceModel {
public:
    using Factor = std::function<double(double, double)>;
    using Full = std::function<double(std::span<const double>, std::span<const double>)>;

    // tensor product of fractional Brownian factors
    // R_k(s,t) = (|s|^2H + |t|^2H - |s-t|^2H) / 2, H in (0,1)
    static CovarianceModel fbm(std::vector<double> hurst);
    // additive-noise stochastic heat equation on the line, coordinates (t, y)
    static CovarianceModel heat();
    static CovarianceModel product(std::vector<Factor> factors,
                                   std::string name = "product");
    static CovarianceModel custom(Full q, std::size_t dim,
                                  std::string name = "custom");

    std::size_t dim() const { return dim_; }
    bool is_product() const { return !factors_.empty(); }
    const std::string& name() const { return name_; }
    const std::vector<double>& hurst() const { return hurst_; }  // empty unless fbm

    double factor(std::size_t k, double s, double t) const;
    double operator()(std::span<const double> x, std::span<const double> y) const;

private:
    CovarianceModel() = default;
    std::size_t dim_ = 0;
    std::string name_;
    std::vector<Factor> factors_;  // empty for non-product models
    Full full_;
    std::vector<double> hurst_;
};

// E |rectangular increment of W over [y,x]|^2.  Product models use the
// per-factor closed combination; others the 4^n signed corner sum of Q in
// doubled variables.
double increment_variance(const CovarianceModel& model, const PointPair& pair);
// the 4^n corner path regardless of model structure (agreement checks)
double increment_variance_generic(const CovarianceModel& model, const PointPair& pair);

// Per-axis moduli tabulated from increment variances on a grid; sup taken
// over grid pairs only, so tables are grid-resolution.
struct EmpiricalModulus {
    std::vector<ModulusFunction> p;
};

EmpiricalModulus build_empirical_modulus(const CovarianceModel& model,
                                         const std::vector<std::vector<double>>& axes);

// max over grid pairs of sqrt(variance) - prod_k p_k(|x_k-y_k|); at most
// rounding dust when the moduli dominate
double empirical_dominance_gap(const CovarianceModel& model,
                               const std::vector<std::vector<double>>& axes,
                               const EmpiricalModulus& em);

// Exact Gaussian sampling on a grid: factorize the grid covariance once,
// then map seeded standard normals through it.  Product models factor each
// axis separately; force_full_operator materializes the dense operator built
// from the same per-axis factors (bit-identical output, more memory).
class FieldSampler {
public:
    FieldSampler(const CovarianceModel& model, std::vector<std::vector<double>> axes,
                 bool force_full_operator = false);

    GridField sample(std::uint64_t seed, std::uint64_t replicate) const;

    // diagonal jitter actually added per factor (single entry for full models)
    const std::vector<double>& jitters() const { return jitters_; }
    double max_jitter() const;
    bool product_path() const { return product_; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }

private:
    std::vector<std::vector<double>> axes_;
    std::vector<Eigen::MatrixXd> factors_;  // per-axis operators, or one dense operator
    std::vector<double> jitters_;
    std::vector<std::size_t> shape_;
    std::size_t total_ = 0;
    bool product_ = false;
    bool materialized_ = false;  // factors_[0] is the dense total_ x total_ operator
};

GridField sample_field(const CovarianceModel& model,
                       const std::vector<std::vector<double>>& axes,
                       std::uint64_t seed, std::uint64_t replicate);

// One persisted replicate: everything needed to reproduce or audit it.
struct SampledGaussianField {
    std::string model;
    nlohmann::ordered_json params;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    double jitter = 0;
    GridField field;

    nlohmann::ordered_json metadata() const;
};

struct MomentEstimate {
    double mean = 0;
    double std_error = 0;
};

// Monte Carlo mean of the squared rectangular increment over fresh replicates.
MomentEstimate increment_moment_mc(const CovarianceModel& model, const PointPair& pair,
                                   std::size_t replicates, std::uint64_t seed);

// Monte Carlo estimate of E exp(N^2/4), N centered Gaussian with the given
// variance; diverges at variance >= 2.
double exp_moment_check(double variance, std::size_t draws, std::uint64_t seed);
double exp_moment_closed_form(double variance);

} // namespace grr
