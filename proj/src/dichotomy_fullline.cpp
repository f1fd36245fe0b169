#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdicho/dichotomy.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/sampling.hpp"

namespace hdicho {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

std::string to_string(FullLineVerdict v) {
    switch (v) {
        case FullLineVerdict::dichotomy: return "dichotomy";
        case FullLineVerdict::no_dichotomy: return "no_dichotomy";
        case FullLineVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ProjectorExtension extend_projector(const TransitionEvaluator& ev, const ConstantProjector& P_half,
                                    double anchored_at) {
    if (P_half.dim() != ev.dim()) throw ArgumentError("projector dimension does not match the system");
    ProjectorExtension out;
    if (anchored_at == ev.anchor()) {
        out.projector = P_half;
        return out;
    }
    const Matrix to_anchor = ev.transition(ev.anchor(), anchored_at);
    const Matrix from_anchor = ev.transition(anchored_at, ev.anchor());
    out.conditioning = op_norm(to_anchor) * op_norm(from_anchor);
    out.ill_conditioned = out.conditioning > 1e8;
    const Matrix p = to_anchor * P_half.matrix() * from_anchor;
    try {
        out.projector = ConstantProjector::from_matrix(p, 1e-8);
    } catch (const ArgumentError& e) {
        throw NumericalError(std::string("projector extension lost idempotency: ") + e.what());
    }
    return out;
}

CompatibilityReport projector_compat(const ConstantProjector& P_plus,
                                     const ConstantProjector& P_minus, double tol) {
    if (P_plus.dim() != P_minus.dim()) throw ArgumentError("projector dimensions differ");
    const Matrix& pp = P_plus.matrix();
    const Matrix& pm = P_minus.matrix();
    CompatibilityReport r;
    r.plus_minus_residual = op_norm(pp * pm - pp);
    r.minus_plus_residual = op_norm(pm * pp - pp);
    r.kernel_containment = containment_gap(kernel_basis(pm), kernel_basis(pp));
    r.range_containment = containment_gap(range_basis(pp), range_basis(pm));
    r.compatible = r.plus_minus_residual <= tol && r.minus_plus_residual <= tol;
    return r;
}

int dichotomy_index(const ConstantProjector& P_plus, const ConstantProjector& P_minus, int n,
                    double rank_tol) {
    if (P_plus.dim() != n || P_minus.dim() != n) throw ArgumentError("projector dimensions differ from n");
    const auto rp = numerical_rank(P_plus.matrix(), rank_tol);
    const auto rm = numerical_rank(P_minus.matrix(), rank_tol);
    if (rp.ambiguous || rm.ambiguous)
        throw RankAmbiguityError("projector rank is ambiguous at tolerance " + fmt(rank_tol));
    return rp.rank + (n - rm.rank) - n;
}

HalfLineProjectors half_line_projectors(const TransitionEvaluator& ev, double horizon_plus,
                                        double horizon_minus, double gap_tol) {
    const int n = ev.dim();
    const double e = ev.anchor();
    HalfLineProjectors out;
    out.forward = bounded_subspace(ev, e, horizon_plus, Side::forward, gap_tol);
    out.backward = bounded_subspace(ev, e, horizon_minus, Side::backward, gap_tol);
    if (!out.forward.conclusive || !out.backward.conclusive)
        throw NumericalError("bounded subspaces have no clear singular-value gap");

    const Matrix& F = out.forward.basis;   // range of P+
    const Matrix& B = out.backward.basis;  // kernel of P-
    bool trivial_intersection = true;
    if (F.cols() > 0 && B.cols() > 0) {
        if (F.cols() + B.cols() > n) {
            trivial_intersection = false;
        } else {
            Matrix joined(n, F.cols() + B.cols());
            joined << F, B;
            Eigen::JacobiSVD<Matrix> svd(joined);
            trivial_intersection = svd.singularValues().minCoeff() > 1e-6;
        }
    }

    if (trivial_intersection) {
        // R^n = F + B + V with V orthogonal to F + B.
        Matrix FB(n, F.cols() + B.cols());
        FB << F, B;
        const Matrix V = orthogonal_complement(FB.cols() > 0 ? range_basis(FB) : FB, n);
        Matrix BV(n, B.cols() + V.cols()), FV(n, F.cols() + V.cols());
        BV << B, V;
        FV << F, V;
        out.plus = ConstantProjector::from_matrix(oblique_projector(F, BV), 1e-8);
        out.minus = ConstantProjector::from_matrix(oblique_projector(FV, B), 1e-8);
    } else {
        const Matrix I = Matrix::Identity(n, n);
        out.plus = ConstantProjector::from_matrix(F * F.transpose(), 1e-8);
        out.minus = ConstantProjector::from_matrix(I - B * B.transpose(), 1e-8);
    }
    return out;
}

HalfLineCombination combine_half_lines(const ConstantProjector& P_plus,
                                       const ConstantProjector& P_minus,
                                       const BoundedSearchResult& search) {
    HalfLineCombination c;
    c.P_plus = P_plus;
    c.P_minus = P_minus;
    c.index = dichotomy_index(P_plus, P_minus, P_plus.dim());
    c.compat = projector_compat(P_plus, P_minus);
    c.compatible = c.compat.compatible;
    c.bounded_status = search.status;
    if (search.found()) {
        c.bounded_direction = search.direction;
        c.bounded_sup = search.sup_norm;
    }
    if (c.index == 0 && c.compatible && search.status == SearchStatus::none)
        c.full_line_projector = P_plus;
    return c;
}

FullLineDecision full_line_decide(const TransitionEvaluator& ev, const DichotomyReport& minus_half,
                                  const DichotomyReport& plus_half,
                                  const HalfLineCombination& combination,
                                  std::span<const double> full_grid) {
    FullLineDecision d;
    d.index = combination.index;
    auto& failed = d.failed_conditions;
    if (minus_half.verdict != Verdict::holds)
        failed.push_back("no verified dichotomy on the left half-line (verdict " +
                         to_string(minus_half.verdict) + ")");
    if (plus_half.verdict != Verdict::holds)
        failed.push_back("no verified dichotomy on the right half-line (verdict " +
                         to_string(plus_half.verdict) + ")");
    if (combination.index != 0) failed.push_back("index = " + std::to_string(combination.index));
    if (combination.bounded_status == SearchStatus::found) {
        failed.push_back("nontrivial bounded solution with sup norm " + fmt(combination.bounded_sup));
        d.witness_direction = combination.bounded_direction;
        d.witness_sup = combination.bounded_sup;
    }
    if (!combination.compatible)
        failed.push_back("projectors incompatible: ||P+P- - P+|| = " +
                         fmt(combination.compat.plus_minus_residual) + ", ||P-P+ - P+|| = " +
                         fmt(combination.compat.minus_plus_residual));
    if (!failed.empty()) {
        d.verdict = FullLineVerdict::no_dichotomy;
        return d;
    }
    if (combination.bounded_status == SearchStatus::inconclusive) {
        failed.push_back("bounded-solution search inconclusive");
        d.verdict = FullLineVerdict::inconclusive;
        return d;
    }

    const ConstantProjector& P = *combination.full_line_projector;
    const auto fit = estimate_constants(ev, P, full_grid);
    if (!fit.found) {
        failed.push_back("spliced constants could not be fitted: " + fit.reason);
        d.verdict = FullLineVerdict::inconclusive;
        return d;
    }
    d.spliced = verify_dichotomy(ev, P, full_grid, fit.K, fit.alpha);
    d.verdict = d.spliced->verdict == Verdict::holds ? FullLineVerdict::dichotomy
                                                     : FullLineVerdict::inconclusive;
    if (d.verdict != FullLineVerdict::dichotomy)
        failed.push_back("spliced dichotomy failed verification on the full grid");
    return d;
}

double expansiveness_constant(double K) {
    // Cases e* >= b and e* <= a give K; the mixed cases give max{K^3, K+K^2}
    // and max{K+K^3, K^2}. For K >= 1 the overall maximum is K + K^3.
    return std::max({K, K * K * K, K + K * K, K + K * K * K, K * K});
}

FullLineAnalysis analyze_full_line(const TransitionEvaluator& ev, const AuditOptions& o) {
    const auto& g = ev.growth();
    const double e = ev.anchor();
    if (!(o.h_lo < 1 && o.h_hi > 1)) throw ArgumentError("audit range must straddle h = 1");
    FullLineAnalysis r;

    r.full_grid = analysis_grid(g, o.h_lo, o.h_hi, o.points_per_decade, o.extra_points);
    const auto& full = r.full_grid;
    const double left_end = o.left_end.value_or(e);
    const double right_start = o.right_start.value_or(e);
    if (!(left_end <= right_start)) throw ArgumentError("half-lines overlap: need left_end <= right_start");
    std::vector<double> left, right;
    for (double t : full) {
        if (t <= left_end) left.push_back(t);
        if (t >= right_start) right.push_back(t);
    }
    // The endpoints themselves belong to the half-lines even off the decade grid.
    if (left_end > full.front() && (left.empty() || left.back() < left_end)) left.push_back(left_end);
    if (right_start < full.back() && (right.empty() || right.front() > right_start))
        right.insert(right.begin(), right_start);
    if (left.size() < 2 || right.size() < 2) throw ArgumentError("each half-line needs at least two grid points");

    if (o.P_plus && o.P_minus) {
        r.P_plus = *o.P_plus;
        r.P_minus = *o.P_minus;
    } else {
        const auto hp = half_line_projectors(ev, from_log_h(g, std::log(o.h_hi)),
                                             from_log_h(g, std::log(o.h_lo)), o.gap_tol);
        r.P_plus = o.P_plus.value_or(hp.plus);
        r.P_minus = o.P_minus.value_or(hp.minus);
        r.notes.push_back("half-line projectors derived from bounded subspaces");
    }

    if (o.K && o.alpha) {
        r.K = *o.K;
        r.alpha = *o.alpha;
    } else {
        const auto fm = estimate_constants(ev, r.P_minus, left, o.safety);
        const auto fp = estimate_constants(ev, r.P_plus, right, o.safety);
        r.constants_fitted = true;
        if (fm.found && fp.found) {
            r.K = std::max(fm.K, fp.K);
            r.alpha = std::min(fm.alpha, fp.alpha);
        } else {
            if (!fm.found) r.notes.push_back("left half-line: " + fm.reason);
            if (!fp.found) r.notes.push_back("right half-line: " + fp.reason);
            r.K = std::max(fm.found ? fm.K : 1.0, fp.found ? fp.K : 1.0);
            const double a = std::min(fm.found ? fm.alpha : 1.0, fp.found ? fp.alpha : 1.0);
            r.alpha = a > 0 ? a : 1.0;
        }
    }
    r.minus_half = verify_dichotomy(ev, r.P_minus, left, r.K, r.alpha);
    r.plus_half = verify_dichotomy(ev, r.P_plus, right, r.K, r.alpha);

    const auto directions = sample_directions(ev.dim(), o.seed, o.direction_count);
    r.bounded = bounded_solution_search(ev, full, directions, o.bounded);
    r.combination = combine_half_lines(r.P_plus, r.P_minus, r.bounded);
    r.full_line = full_line_decide(ev, r.minus_half, r.plus_half, r.combination, full);

    return r;
}

AuditReport equivalence_audit(const TransitionEvaluator& ev, const AuditOptions& o) {
    const auto& g = ev.growth();
    AuditReport r;
    static_cast<FullLineAnalysis&>(r) = analyze_full_line(ev, o);
    const auto directions = sample_directions(ev.dim(), o.seed, o.direction_count);
    const double e = ev.anchor();
    std::vector<double> left, right;
    for (double t : r.full_grid) {
        if (t <= o.left_end.value_or(e)) left.push_back(t);
        if (t >= o.right_start.value_or(e)) right.push_back(t);
    }

    r.L = expansiveness_constant(r.K);
    r.beta = r.alpha;
    r.T = o.T ? *o.T : from_log_h(g, std::log(4 * r.L) / r.beta);
    r.theta_bound = 2 * r.L * std::exp(-r.beta * log_h(g, r.T));

    const auto coarse = log_h_grid(g, std::log(o.h_lo), std::log(o.h_hi), o.triple_points);
    const auto triples = make_triples(coarse);
    r.expansive = expansive_check(ev, r.L, r.beta, triples, directions);

    auto t_grid = log_h_grid(g, std::log(o.h_lo), std::log(o.h_hi), std::max<std::size_t>(2, o.noncritical_points));
    const double lo = t_grid.front(), hi = t_grid.back();
    for (double t : o.extra_points)
        if (t >= lo && t <= hi) t_grid.push_back(t);
    std::sort(t_grid.begin(), t_grid.end());
    t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
    r.noncritical = noncritical_check(ev, r.T, t_grid, directions, o.window_points);

    r.growth_plus = growth_bound(ev, right, GrowthMode::growth);
    r.decay_minus = growth_bound(ev, left, GrowthMode::decay);

    r.statement_i = r.minus_half.verdict == Verdict::holds &&
                    r.plus_half.verdict == Verdict::holds &&
                    r.bounded.status == SearchStatus::none;
    r.statement_ii = r.expansive.expansive();
    r.statement_iii = r.noncritical.noncritical();
    // Bounded growth/decay always admits a finite fit on a finite grid, so the
    // converse (iii) => (i) is in force whenever both fits succeeded.
    const bool converse_applies =
        std::isfinite(r.growth_plus.K0) && std::isfinite(r.decay_minus.K0);
    r.implications_consistent = (!r.statement_i || r.statement_ii) &&
                                (!r.statement_ii || r.statement_iii) &&
                                (!converse_applies || !r.statement_iii || r.statement_i);
    if (r.statement_i && r.noncritical.theta > r.theta_bound)
        r.notes.push_back("observed theta " + fmt(r.noncritical.theta) + " exceeds 2 L h(T)^-beta = " +
                          fmt(r.theta_bound));
    return r;
}

}  // namespace hdicho
