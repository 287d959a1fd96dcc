#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grr/field_grid.hpp"
#include "grr/gaussian_fields.hpp"
#include "grr/grr_core.hpp"
#include "grr/modulus.hpp"

namespace grr {

// One Monte Carlo regularity experiment: sample the model on a grid and test
// increments against a log-modulated modulus.
struct ExperimentSpec {
    CovarianceModel model;
    std::vector<std::size_t> grid_shape;
    LogModulatedModulus modulus;
    double delta_max = 0.5;
    std::size_t replicates = 50;
    std::uint64_t seed = 0;
    double slack = 0.05;
    // pairs per replicate fed to the path certificate; 0 skips certificates
    std::size_t certificate_pairs = 32;
};

struct SupRatioDetail {
    double value = 0;
    double max_increment = 0;  // largest |box f| over the checked pairs
    std::size_t pairs = 0;
    bool subsampled = false;
    std::uint64_t subsample_seed = 0;
};

// max over grid pairs with all 0 < |x_k-y_k| <= delta_max of
// |rect_increment| / eval_log_modulus.  Falls back to a seeded per-axis
// product subsample of 1e6 pairs on grids past 65^n nodes (or past 2^26
// admissible pairs).
SupRatioDetail sup_ratio_detail(const GridField& field, const LogModulatedModulus& modulus,
                                double delta_max,
                                std::uint64_t subsample_seed = 0x5eedu);
double sup_ratio(const GridField& field, const LogModulatedModulus& modulus,
                 double delta_max);

struct CertificatePair {
    PointPair pair;
    double lhs = 0;
    double rhs = 0;
    bool pass = true;
    bool vacuous = false;
};

// Per-path two-term continuity certificate under the exponential Young
// function: |box f| <= 2 * 8^n * integral of sqrt(log 1/(u_1^2...u_n^2))
// dp_1..dp_n + sqrt(log 4^n B) * prod p_k(|x_k-y_k|), B the path's own
// double-integral functional.
struct CertificateReport {
    double B = 0;
    double slack = 0;
    bool vacuous = false;  // B infinite; the bound only speaks where B is finite
    std::vector<CertificatePair> pairs;
    std::size_t failures = 0;
    bool pass = true;
};

CertificateReport grr_certificate(const GridField& field, const YoungFunction& psi,
                                  std::span<const ModulusFunction> moduli,
                                  std::span<const PointPair> pairs, double slack = 0.05);

struct EdgeBound {
    double lhs = 0;  // |f(x) - f(y)|
    double rhs = 0;  // sigma-form modulus at (x, y)
};

// Point (not box) increment of a field vanishing on the coordinate axes
// against the edge-sum modulus.  Requires a sigma-form modulus and per-axis
// separations within delta_max.
EdgeBound edge_decomposition_bound(const GridField& field, const PointPair& pair,
                                   const LogModulatedModulus& modulus, double delta_max);

struct ReplicateRow {
    std::size_t replicate = 0;
    double B = 0;
    double sup_ratio = 0;
    double max_increment = 0;
    bool certificate_pass = true;
    bool certificate_vacuous = false;
    bool subsampled = false;
    std::uint64_t subsample_seed = 0;
};

struct SweepGrid {
    std::vector<std::size_t> shape;
    std::vector<ReplicateRow> rows;
    double median_ratio = 0;
    double q95_ratio = 0;
    // median grew by more than 50% over the previous grid (heuristic signal,
    // not a theorem)
    bool unstable = false;
};

struct RegularityReport {
    nlohmann::ordered_json spec;
    std::vector<SweepGrid> grids;
    bool stable = true;

    nlohmann::ordered_json to_json() const;
};

// Runs the experiment per replicate per grid (grids at strictly increasing
// resolution) and aggregates sup-ratio quantiles; rows are merged in
// replicate order so reports are reproducible bytes.
RegularityReport refinement_sweep(const ExperimentSpec& spec,
                                  std::span<const std::vector<std::size_t>> grids);

// per-axis moduli implied by a log-modulated form, as used by certificates
std::vector<ModulusFunction> certificate_moduli(const LogModulatedModulus& modulus);

} // namespace grr
