#pragma once

// Grid-based verification and estimation of uniform h-dichotomies and the
// properties tied to them: bounded h-growth/decay, h-noncriticality,
// h-expansiveness, bounded solutions and the splicing of half-line
// dichotomies into a full-line one.
//
// Every supremum over a continuum is realized as a maximum over the sampled
// grid, so a "holds" verdict certifies the inequality on the grid only.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdicho/transition.hpp"

namespace hdicho {

inline constexpr double kIdempotencyTol = 1e-10;
inline constexpr double kRankTol = 1e-8;
inline constexpr double kVerdictTol = 1e-8;

/// Constant projector P measured against the fundamental matrix normalized
/// at e*; generates the family P(t) = Phi(t) P Phi(t)^{-1}.
class ConstantProjector {
public:
    ConstantProjector() = default;

    /// Throws ArgumentError when ||P^2 - P|| exceeds tol.
    static ConstantProjector from_matrix(const Matrix& p, double tol = kIdempotencyTol);

    const Matrix& matrix() const { return p_; }
    Matrix complement() const { return Matrix::Identity(p_.rows(), p_.cols()) - p_; }
    double idempotency_residual() const { return residual_; }
    int dim() const { return static_cast<int>(p_.rows()); }
    int rank(double tol = kRankTol) const;

private:
    Matrix p_;
    double residual_ = 0;
};

enum class Verdict { holds, violated, inconclusive };
std::string to_string(Verdict v);

/// A grid pair (t, s) together with the log-scale slack observed there.
struct PairWitness {
    double t = 0;
    double s = 0;
    double slack = std::numeric_limits<double>::infinity();
};

struct DichotomyReport {
    double lo = 0;
    double hi = 0;
    std::vector<double> grid;
    double K = 1;
    double alpha = 0;
    /// ln(K (h-ratio)^{-alpha}) - ln ||...|| minimized over pairs; >= 0 means the bound holds.
    double worst_stable_residual = std::numeric_limits<double>::infinity();
    double worst_unstable_residual = std::numeric_limits<double>::infinity();
    PairWitness stable_witness;
    PairWitness unstable_witness;
    /// Per grid point t: the smallest slack over partners s.
    std::vector<double> stable_row_slack;
    std::vector<double> unstable_row_slack;
    Verdict verdict = Verdict::inconclusive;
};

/// Checks ||Phi(t) P Phi(s)^{-1}|| <= K (h(t)/h(s))^{-alpha} for t >= s and
/// ||Phi(t) (I-P) Phi(s)^{-1}|| <= K (h(s)/h(t))^{-alpha} for t <= s on all grid pairs.
DichotomyReport verify_dichotomy(const TransitionEvaluator& ev, const ConstantProjector& P,
                                 std::span<const double> grid, double K, double alpha,
                                 double tol = kVerdictTol);

struct ConstantsFit {
    bool found = false;
    double K = 1;
    double alpha = 0;
    /// Pair that fixed the decay slope.
    PairWitness witness;
    std::string reason;
};

/// Tightest (K, alpha) on the grid: alpha is `safety` times the smallest decay
/// slope over pairs with h-ratio >= 2, K the largest normalized norm.
ConstantsFit estimate_constants(const TransitionEvaluator& ev, const ConstantProjector& P,
                                std::span<const double> grid, double safety = 0.95);

struct SplitSolution {
    Vector x_plus;
    Vector x_minus;
    /// Relative slack (rhs - lhs) / max(rhs, lhs) of the two estimates that
    /// apply: forward (t >= t0) or backward (t < t0).
    double first_slack = 0;
    double second_slack = 0;
    bool first_ok = false;
    bool second_ok = false;
    bool forward = true;
};

/// Splits x(t, t0, x0) along P(t0) = Phi(t0) P Phi(t0)^{-1} and checks the
/// forward/backward growth estimates against (K, alpha), scaled by |x0|.
SplitSolution split_solution(const TransitionEvaluator& ev, const ConstantProjector& P, double t,
                             double t0, const Vector& x0, double K, double alpha,
                             double tol = 1e-9);

enum class GrowthMode { growth, decay, both };
std::string to_string(GrowthMode m);
GrowthMode parse_growth_mode(const std::string& name);

struct GrowthBoundReport {
    GrowthMode mode = GrowthMode::growth;
    double K0 = 1;
    double beta = 0;
    double worst_residual = std::numeric_limits<double>::infinity();
    std::size_t pairs = 0;

    /// C_T = K0 h(T)^beta for the window [s, s*T] (or its mirror).
    double constant_for(const GrowthRated& g, double T) const;
};

/// Fits ||Phi(t,s)|| <= K0 (h-ratio)^beta over the pairs selected by `mode`.
GrowthBoundReport growth_bound(const TransitionEvaluator& ev, std::span<const double> grid,
                               GrowthMode mode);

struct NoncriticalityReport {
    double T = 0;
    double theta = 0;
    double witness_t = 0;
    Vector witness_direction;
    std::size_t window_points = 0;
    std::size_t directions = 0;
    std::vector<double> t_grid;
    /// Per grid point: the largest ratio over directions.
    std::vector<double> ratios;
    /// Grid points whose window left the representable part of J.
    std::vector<double> escaped;
    Verdict verdict = Verdict::inconclusive;
    bool noncritical() const { return verdict == Verdict::holds; }
};

/// theta = max over t and xi of |Phi(t) xi| / max_{u in ball(t, T)} |Phi(u) xi|.
NoncriticalityReport noncritical_check(const TransitionEvaluator& ev, double T,
                                       std::span<const double> t_grid,
                                       const std::vector<Vector>& directions,
                                       std::size_t window_points, double tol = 1e-6);

struct Triple {
    double a, t, b;
};

/// All triples a <= t <= b drawn from the given points.
std::vector<Triple> make_triples(std::span<const double> points);

struct ExpansivenessReport {
    double L = 0;
    double beta = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    /// Worst margin divided by the sample's own scale max(|x(t)|, rhs).
    double worst_scaled_margin = std::numeric_limits<double>::infinity();
    Triple witness{0, 0, 0};
    Vector witness_direction;
    std::size_t samples = 0;
    /// Worst scaled margin per middle point t, sorted by t.
    std::vector<std::pair<double, double>> worst_by_t;
    Verdict verdict = Verdict::inconclusive;
    bool expansive() const { return verdict == Verdict::holds; }
};

/// margin = L [h(t*a^{-1})^{-beta} |x(a)| + h(b*t^{-1})^{-beta} |x(b)|] - |x(t)|.
ExpansivenessReport expansive_check(const TransitionEvaluator& ev, double L, double beta,
                                    std::span<const Triple> triples,
                                    const std::vector<Vector>& directions,
                                    double tol = kVerdictTol);

struct BoundedSearchOptions {
    /// Absolute threshold; when absent, 10 x the candidate's maximum over the
    /// central window |ln h| <= ln 10.
    std::optional<double> threshold;
    /// Report sup |x| / |x(normalize_at)| instead of the unit-at-e* value.
    std::optional<double> normalize_at;
};

enum class SearchStatus { found, none, inconclusive };
std::string to_string(SearchStatus s);

struct BoundedSearchResult {
    SearchStatus status = SearchStatus::none;
    Vector direction;      // unit at e*, the minimizing candidate
    double sup_norm = 0;   // normalized per options
    double argmax_t = 0;
    double threshold = 0;
    bool boundary_monotone = false;
    /// |x(t_i)| along the grid for the chosen direction, same normalization.
    std::vector<double> profile;
    bool found() const { return status == SearchStatus::found; }
};

BoundedSearchResult bounded_solution_search(const TransitionEvaluator& ev,
                                            std::span<const double> grid,
                                            const std::vector<Vector>& directions,
                                            const BoundedSearchOptions& options = {});

enum class Side { forward, backward };

struct BoundedSubspace {
    Matrix basis;  // orthonormal columns
    Vector singular_values;
    double gap_ratio = 0;
    bool conclusive = false;
};

/// Directions at s that stay bounded toward the horizon, read off the SVD of
/// Phi(horizon, s). Forward approximates R P+(s), backward N P-(s).
BoundedSubspace bounded_subspace(const TransitionEvaluator& ev, double s, double horizon,
                                 Side side, double gap_tol = 10.0);

struct ProjectorExtension {
    ConstantProjector projector;
    double conditioning = 1;
    bool ill_conditioned = false;
};

/// Re-anchors a projector given at `anchored_at` to the e*-normalized form.
ProjectorExtension extend_projector(const TransitionEvaluator& ev, const ConstantProjector& P_half,
                                    double anchored_at);

struct CompatibilityReport {
    bool compatible = false;
    double plus_minus_residual = 0;   // ||P+ P- - P+||
    double minus_plus_residual = 0;   // ||P- P+ - P+||
    double kernel_containment = 0;    // N P- inside N P+ (sine of the gap)
    double range_containment = 0;     // R P+ inside R P-
};

CompatibilityReport projector_compat(const ConstantProjector& P_plus,
                                     const ConstantProjector& P_minus, double tol = kVerdictTol);

/// dim R P+ + dim N P- - n. Throws RankAmbiguityError near the rank threshold.
int dichotomy_index(const ConstantProjector& P_plus, const ConstantProjector& P_minus, int n,
                    double rank_tol = kRankTol);

struct HalfLineProjectors {
    ConstantProjector plus;
    ConstantProjector minus;
    BoundedSubspace forward;
    BoundedSubspace backward;
};

/// Builds P+ with range equal to the forward-bounded directions and P- with
/// kernel equal to the backward-bounded ones. When the two subspaces meet
/// only in 0 the complements are chosen so that P+ P- = P- P+ = P+.
HalfLineProjectors half_line_projectors(const TransitionEvaluator& ev, double horizon_plus,
                                        double horizon_minus, double gap_tol = 10.0);

struct HalfLineCombination {
    ConstantProjector P_plus;
    ConstantProjector P_minus;
    int index = 0;
    bool compatible = false;
    CompatibilityReport compat;
    std::optional<Vector> bounded_direction;
    double bounded_sup = 0;
    SearchStatus bounded_status = SearchStatus::none;
    std::optional<ConstantProjector> full_line_projector;
};

HalfLineCombination combine_half_lines(const ConstantProjector& P_plus,
                                       const ConstantProjector& P_minus,
                                       const BoundedSearchResult& search);

enum class FullLineVerdict { dichotomy, no_dichotomy, inconclusive };
std::string to_string(FullLineVerdict v);

struct FullLineDecision {
    FullLineVerdict verdict = FullLineVerdict::inconclusive;
    std::vector<std::string> failed_conditions;
    int index = 0;
    std::optional<Vector> witness_direction;
    double witness_sup = 0;
    std::optional<DichotomyReport> spliced;
};

/// Splices half-line dichotomies: a full-line dichotomy with P = P+ exists iff
/// both halves hold, there is no bounded solution and the index is zero.
FullLineDecision full_line_decide(const TransitionEvaluator& ev, const DichotomyReport& minus_half,
                                  const DichotomyReport& plus_half,
                                  const HalfLineCombination& combination,
                                  std::span<const double> full_grid);

struct AuditOptions {
    double h_lo = 1e-2;
    double h_hi = 1e2;
    std::size_t points_per_decade = 200;
    std::optional<ConstantProjector> P_plus;
    std::optional<ConstantProjector> P_minus;
    /// Dichotomy constants to verify instead of fitting them.
    std::optional<double> K;
    std::optional<double> alpha;
    /// Noncriticality window radius; when absent, chosen so that 2 L h(T)^{-beta} = 1/2.
    std::optional<double> T;
    /// Half-lines are (a0, left_end] and [right_start, +inf); both default to e*.
    std::optional<double> left_end;
    std::optional<double> right_start;
    std::size_t noncritical_points = 60;
    std::size_t window_points = 81;
    std::size_t triple_points = 24;
    std::vector<double> extra_points;
    BoundedSearchOptions bounded;
    double gap_tol = 10.0;
    double safety = 0.95;
    std::size_t direction_count = 2000;
    std::uint64_t seed = 0;
};

/// Half-line verification, bounded-solution search and splicing on one grid.
struct FullLineAnalysis {
    std::vector<double> full_grid;
    DichotomyReport minus_half;
    DichotomyReport plus_half;
    ConstantProjector P_plus;
    ConstantProjector P_minus;
    double K = 1;
    double alpha = 0;
    bool constants_fitted = false;
    BoundedSearchResult bounded;
    HalfLineCombination combination;
    FullLineDecision full_line;
    std::vector<std::string> notes;
};

FullLineAnalysis analyze_full_line(const TransitionEvaluator& ev, const AuditOptions& options);

struct AuditReport : FullLineAnalysis {
    double L = 0;
    double beta = 0;
    double T = 0;
    double theta_bound = 0;  // 2 L h(T)^{-beta}
    ExpansivenessReport expansive;
    NoncriticalityReport noncritical;
    GrowthBoundReport growth_plus;
    GrowthBoundReport decay_minus;
    bool statement_i = false;    // half-line dichotomies and no bounded solution
    bool statement_ii = false;   // h-expansive on J
    bool statement_iii = false;  // uniformly h-noncritical on J
    bool implications_consistent = false;
};

/// Runs every check on both half-lines and on J and compares the outcomes
/// with (i) => (ii) => (iii) and, under bounded growth/decay, (iii) => (i).
AuditReport equivalence_audit(const TransitionEvaluator& ev, const AuditOptions& options);

/// Expansiveness constant obtained from half-line dichotomy constant K,
/// gathered over all interval placements relative to e*.
double expansiveness_constant(double K);

/// Grid geometric in h on [h_lo, h_hi] merged with extra points, sorted and unique.
std::vector<double> analysis_grid(const GrowthRated& g, double h_lo, double h_hi,
                                  std::size_t per_decade, std::span<const double> extra = {});

}  // namespace hdicho
