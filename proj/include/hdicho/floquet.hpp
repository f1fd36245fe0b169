#pragma once

// Generalized Floquet systems: coefficients invariant under the group
// translation t -> t*T in the sense h'(t)h(T)/h'(t*T) A(t*T) = A(t).

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "hdicho/dichotomy.hpp"

namespace hdicho {

inline constexpr double kGfsThreshold = 1e-6;
inline constexpr double kCircleTol = 1e-6;

struct FloquetContext {
    const TransitionEvaluator& ev;  // anchored at e*
    double T;                       // T > e*

    const GrowthRated& growth() const { return ev.growth(); }
};

/// sup over grid of ||f(t) A(t*T) - A(t)|| / (1 + ||A(t)||), f = h'(t)h(T)/h'(t*T).
double gfs_residual(const LinearSystem& sys, const GrowthRated& g, double T,
                    std::span<const double> grid);

/// 50 points uniform in ln h over [-2 ln h(T), 2 ln h(T)], all with t*T in J.
std::vector<double> default_gfs_grid(const GrowthRated& g, double T, std::size_t count = 50);

using Complex = std::complex<double>;

struct MonodromyReport {
    double T = 0;
    Matrix V;
    std::vector<Complex> multipliers;
    Eigen::MatrixXcd eigenvectors;  // column i belongs to multipliers[i]
    double circle_gap = 0;
    double tolerance = kCircleTol;
    bool hyperbolic = false;
    int stable_dim = 0;
    std::optional<ConstantProjector> spectral_projector;
    double gfs_residual = 0;
};

/// V = Phi(T) with Phi(e*) = I. Throws GfsViolation when the coefficient is
/// not h-periodic on the check grid.
MonodromyReport monodromy(const FloquetContext& ctx, double circle_tol = kCircleTol,
                          double gfs_threshold = kGfsThreshold,
                          std::span<const double> gfs_grid = {});

struct PeriodicityResiduals {
    double biperiodicity = 0;        // Phi(t*T, s*T) vs Phi(t, s)
    double power_identity = 0;       // Phi(t*T^n) vs Phi(t) V^n, n = 0..n_max
    double multiplier_solution = 0;  // x(t*T) vs rho x(t) along x = Phi(.) xi
    std::vector<double> power_by_n;
};

PeriodicityResiduals periodicity_residuals(const FloquetContext& ctx, const MonodromyReport& report,
                                           std::span<const double> grid, int n_max);

enum class Hyperbolicity { dichotomy, no_dichotomy, marginal };
std::string to_string(Hyperbolicity h);

struct HyperbolicityDecision {
    Hyperbolicity verdict = Hyperbolicity::marginal;
    double gap = 0;
    /// Multiplier closest to the unit circle and its eigenvector, which spans
    /// the solution x(t*T) = rho x(t).
    std::size_t witness = 0;
    Complex witness_multiplier;
    Eigen::VectorXcd witness_direction;
};

/// dichotomy when the gap exceeds 10 tol, no_dichotomy when it is at most
/// tol, marginal in between.
HyperbolicityDecision hyperbolicity_decide(const MonodromyReport& report, double tol = kCircleTol);

/// Projector onto the generalized eigenspace of the multipliers inside the
/// unit circle, along the one outside. Ordered complex Schur form plus a
/// triangular Sylvester solve.
ConstantProjector spectral_projector(const Matrix& V, double tol = kCircleTol);

struct FloquetConstants {
    double K0 = 1;
    double a = 0;  // discrete exponent
    double K1 = 1;
    double K2 = 1;
    double K = 1;
    double alpha_tilde = 0;
    int N = 0;
    std::size_t u_points = 0;
};

FloquetConstants floquet_constants(const FloquetContext& ctx, const MonodromyReport& report,
                                   int N = 20, std::size_t u_points = 1000);

struct StabilityAudit {
    bool stable = true;  // false for the unstable audit
    bool passed = false;
    double worst_slack = std::numeric_limits<double>::infinity();  // log scale
    double witness_t = 0;
    double witness_t0 = 0;
    Vector witness_direction;
};

/// Contraction (all multipliers inside the circle) or expansion (all outside)
/// of every solution at the rate of the Floquet constants. Mixed spectra are
/// rejected with ArgumentError.
StabilityAudit stability_audit(const FloquetContext& ctx, const MonodromyReport& report,
                               const FloquetConstants& constants, std::span<const double> grid,
                               const std::vector<Vector>& directions, double tol = kVerdictTol);

}  // namespace hdicho
