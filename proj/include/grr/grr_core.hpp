#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "grr/field_grid.hpp"
#include "grr/modulus.hpp"

namespace grr {

struct CallableField {
    FieldFn fn;
    int dim;
};

// Field + Psi + per-axis moduli: the hypothesis data of the GRR bound.
struct GrrProblem {
    std::variant<GridField, CallableField> field;
    YoungFunction psi;
    std::vector<ModulusFunction> moduli;
    // cells per axis for callable-field discretization of the B integral
    int resolution = 48;

    int dim() const;
};

// Double-integral functional B: midpoint-rule approximation of
// integral of Psi(|box f| / prod p_k(|x_k-y_k|)) over [0,1]^{2n}.
// Grid fields weight nodes by their Voronoi cell measure; callable fields use
// uniform cell centers.  Returns +infinity when the integrand overflows or a
// modulus vanishes where the increment does not (inequality then vacuous).
double b_functional(const GrrProblem& prob);

struct GrrBound {
    double value = 0;
    bool divergent = false;
};

// Right side of the GRR inequality:
// 8^n * integral over prod (0, delta_k] of PsiInv(4^n B / prod u_k^2) dp_1...dp_n.
// Closed form when Psi and all p_k are powers (requires alpha*gamma_k > 2,
// otherwise flagged divergent); quadrature with geometric grading toward
// u_k = 0 otherwise.
GrrBound grr_rhs(const YoungFunction& psi, std::span<const ModulusFunction> moduli,
                 double B, std::span<const double> deltas);

// integral over prod (0, delta_k] of sqrt(max(0, c - 2 sum_k log u_k))
// dp_1...dp_n by tensor quadrature graded toward every u_k = 0; the workhorse
// behind the exponential-Psi right side and the two-term path certificate.
double log_tail_integral(std::span<const ModulusFunction> moduli,
                         std::span<const double> deltas, double c);

struct PairCheck {
    PointPair pair;
    double lhs = 0;
    double rhs = 0;
    bool pass = false;
    bool vacuous = false;
};

struct GrrReport {
    double B = 0;
    double slack = 0;
    bool closed_form_B = false;
    std::vector<PairCheck> pairs;
    std::size_t failures = 0;
    bool pass = true;
};

// Checks LHS = |rect_increment| <= (1+slack) * RHS at each pair with
// B = b_functional(prob), or the supplied closed-form B when given (slack 0
// is then sound; grid-estimated B keeps the default discretization slack).
GrrReport verify_grr(const GrrProblem& prob, std::span<const PointPair> pairs, double slack,
                     std::optional<double> closed_form_B = std::nullopt);

// C = 8^n * 4^(n/alpha) * prod (1 + 2/(beta_k - alpha*eps_k));
// requires 0 < eps_k * alpha < beta_k.
double kolmogorov_constant(int n, double alpha, std::span<const double> beta,
                           std::span<const double> eps);

struct KolmogorovReport {
    double B = 0;
    double eta = 0;
    double constant = 0;
    double max_ratio = 0;
    double k_hat = 0;
    double eta_alpha = 0;  // eta^alpha, recorded against k_hat
    bool pass = false;
    bool vacuous = false;
};

// Joint continuity bound |box W| <= C * eta * prod |dx_k|^(beta_k/alpha - eps_k)
// checked at every grid pair, eta = B^(1/alpha) with B from b_functional under
// Psi = pow:alpha, p_k = pow:(2 + beta_k - alpha*eps_k)/alpha.
KolmogorovReport kolmogorov_bound_check(const GridField& field, double alpha,
                                        std::span<const double> beta, std::span<const double> eps,
                                        double k_hat, double slack = 0.05);

struct GrrChain {
    std::vector<double> t;              // t_0 > t_1 > ...
    std::vector<double> d;              // d_k = p_inverse(p(t_k)/2)
    std::vector<double> step_integral;  // pair integral at step k (vs t_{k-1})
    std::vector<double> step_bound;     // 4B/d_{k-1}^2
};

// Decreasing-sequence construction: t_0 is the largest interior grid point
// with level integral I(t_0) <= B; each t_k is the largest candidate on a
// dyadic refinement of the grid with t_k <= d_{k-1}, I(t_k) <= 2B/d_{k-1} and
// pair integral <= 2 I(t_{k-1})/d_{k-1}.  Stops once t_k drops below the grid
// resolution.  Throws a resolution error when no candidate is admissible.
GrrChain build_grr_chain(const std::function<double(double, double)>& g,
                         std::span<const double> zs, std::span<const double> weights,
                         const YoungFunction& psi, const ModulusFunction& p, double B,
                         int t_grid = 256, int max_refine = 12);

} // namespace grr
