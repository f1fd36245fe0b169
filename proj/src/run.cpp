#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "hdicho/dichotomy.hpp"
#include "hdicho/floquet.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/report.hpp"
#include "hdicho/sampling.hpp"

namespace hdicho {

using nlohmann::json;

namespace {

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json to_json(const Complex& z) {
    return {{"re", z.real()}, {"im", z.imag()}, {"modulus", std::abs(z)}};
}

json to_json(const PairWitness& w) { return {{"t", w.t}, {"s", w.s}, {"log_slack", w.slack}}; }

json to_json(const DichotomyReport& r) {
    return {{"interval", {r.lo, r.hi}},
            {"grid_points", r.grid.size()},
            {"K", r.K},
            {"alpha", r.alpha},
            {"worst_stable_residual", r.worst_stable_residual},
            {"worst_unstable_residual", r.worst_unstable_residual},
            {"stable_witness", to_json(r.stable_witness)},
            {"unstable_witness", to_json(r.unstable_witness)},
            {"verdict", to_string(r.verdict)}};
}

json to_json(const ConstantProjector& P) {
    return {{"matrix", to_json(P.matrix())},
            {"rank", P.rank()},
            {"idempotency_residual", P.idempotency_residual()}};
}

json to_json(const BoundedSearchResult& b) {
    return {{"status", to_string(b.status)},      {"direction", to_json(b.direction)},
            {"sup_norm", b.sup_norm},             {"argmax_t", b.argmax_t},
            {"threshold", b.threshold},           {"boundary_monotone", b.boundary_monotone}};
}

json to_json(const NoncriticalityReport& r) {
    return {{"T", r.T},
            {"theta", r.theta},
            {"witness_t", r.witness_t},
            {"witness_direction", to_json(r.witness_direction)},
            {"t_points", r.t_grid.size()},
            {"window_points", r.window_points},
            {"directions", r.directions},
            {"escaped", r.escaped},
            {"verdict", r.verdict == Verdict::holds       ? "noncritical"
                        : r.verdict == Verdict::violated ? "critical"
                                                         : "inconclusive"}};
}

json to_json(const ExpansivenessReport& r) {
    return {{"L", r.L},
            {"beta", r.beta},
            {"worst_margin", r.worst_margin},
            {"worst_scaled_margin", r.worst_scaled_margin},
            {"witness", {{"a", r.witness.a}, {"t", r.witness.t}, {"b", r.witness.b}}},
            {"witness_direction", to_json(r.witness_direction)},
            {"samples", r.samples},
            {"verdict", r.verdict == Verdict::holds       ? "expansive"
                        : r.verdict == Verdict::violated ? "not_expansive"
                                                         : "inconclusive"}};
}

json to_json(const GrowthBoundReport& r, const GrowthRated& g) {
    json ct = json::object();
    for (double hT : {2.0, 10.0}) {
        const double T = g.inverse(hT);
        ct["h(T)=" + std::to_string(static_cast<int>(hT))] = r.constant_for(g, T);
    }
    return {{"mode", to_string(r.mode)},
            {"K0", r.K0},
            {"beta", r.beta},
            {"worst_residual", r.worst_residual},
            {"pairs", r.pairs},
            {"derived_CT", ct}};
}

json to_json(const FullLineAnalysis& a) {
    json failed = a.full_line.failed_conditions;
    json out = {{"left_half", to_json(a.minus_half)},
                {"right_half", to_json(a.plus_half)},
                {"P_plus", to_json(a.P_plus)},
                {"P_minus", to_json(a.P_minus)},
                {"K", a.K},
                {"alpha", a.alpha},
                {"constants_fitted", a.constants_fitted},
                {"bounded_solution", to_json(a.bounded)},
                {"index", a.combination.index},
                {"compatible", a.combination.compatible},
                {"compatibility",
                 {{"plus_minus_residual", a.combination.compat.plus_minus_residual},
                  {"minus_plus_residual", a.combination.compat.minus_plus_residual},
                  {"kernel_containment", a.combination.compat.kernel_containment},
                  {"range_containment", a.combination.compat.range_containment}}},
                {"full_line", {{"verdict", to_string(a.full_line.verdict)}, {"failed_conditions", failed}}},
                {"notes", a.notes}};
    if (a.full_line.spliced) out["full_line"]["spliced"] = to_json(*a.full_line.spliced);
    if (a.combination.full_line_projector)
        out["full_line"]["projector"] = to_json(*a.combination.full_line_projector);
    return out;
}

std::vector<double> config_grid(const AnalysisConfig& c) {
    return analysis_grid(c.growth, c.h_lo, c.h_hi, c.points_per_decade, c.extra_points);
}

std::vector<double> coarse_grid(const AnalysisConfig& c, std::size_t count) {
    auto grid = log_h_grid(c.growth, std::log(c.h_lo), std::log(c.h_hi), std::max<std::size_t>(2, count));
    const double lo = grid.front(), hi = grid.back();
    for (double t : c.extra_points)
        if (t >= lo && t <= hi) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

ConstantProjector require_projector(const AnalysisConfig& c) {
    const auto& m = c.projector ? c.projector : c.projector_plus;
    if (!m) throw ConfigError("this command needs config.projector");
    return ConstantProjector::from_matrix(*m);
}

AuditOptions audit_options(const AnalysisConfig& c) {
    AuditOptions o;
    o.h_lo = c.h_lo;
    o.h_hi = c.h_hi;
    o.points_per_decade = c.points_per_decade;
    if (c.projector_plus) o.P_plus = ConstantProjector::from_matrix(*c.projector_plus);
    if (c.projector_minus) o.P_minus = ConstantProjector::from_matrix(*c.projector_minus);
    if (c.projector && !c.projector_plus && !c.projector_minus) {
        o.P_plus = ConstantProjector::from_matrix(*c.projector);
        o.P_minus = o.P_plus;
    }
    o.K = c.K;
    o.alpha = c.alpha;
    o.T = c.noncritical_T;
    o.left_end = c.left_end;
    o.right_start = c.right_start;
    o.noncritical_points = c.noncritical_points;
    o.window_points = c.window_points;
    o.triple_points = c.triple_points;
    o.extra_points = c.extra_points;
    o.bounded.threshold = c.bounded_threshold;
    o.bounded.normalize_at = c.normalize_at;
    o.gap_tol = c.gap_tol;
    o.safety = c.safety;
    o.direction_count = c.direction_count;
    o.seed = c.seed;
    return o;
}

// --- group-selftest ---------------------------------------------------------

void run_group_selftest(const AnalysisConfig& c, RunResult& out) {
    const auto& g = c.growth;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    auto draw = [&] { return from_log_h(g, coord(rng)); };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };

    double product = 0, assoc = 0, commute = 0, inverse = 0, group3 = 0, round_trip = 0;
    std::size_t order_violations = 0, triangle_violations = 0;
    for (std::size_t i = 0; i < c.group_samples; ++i) {
        const double t = draw(), s = draw(), r = draw();
        const double ht = g.forward(t), hs = g.forward(s);
        product = std::max(product, rel(g.forward(star(g, t, s)), ht * hs));
        assoc = std::max(assoc, rel(g.forward(star(g, star(g, t, s), r)),
                                    g.forward(star(g, t, star(g, s, r)))));
        commute = std::max(commute, rel(g.forward(star(g, t, s)), g.forward(star(g, s, t))));
        inverse = std::max(inverse, std::abs(g.forward(star(g, t, star_inverse(g, t))) - 1));
        group3 = std::max(group3, rel(g.forward(star_inverse(g, star(g, t, star_inverse(g, s)))),
                                      g.forward(star(g, s, star_inverse(g, t)))));
        round_trip = std::max(round_trip, std::abs(g.inverse(ht) - t) / (1 + std::abs(t)));
        const double e = identity_element(g);
        if ((e <= star(g, t, star_inverse(g, s))) != (s <= t)) ++order_violations;
        const double lhs = g.forward(abs_star(g, star(g, t, s)));
        const double rhs = g.forward(star(g, abs_star(g, t), abs_star(g, s)));
        if (lhs > rhs * (1 + 1e-10)) ++triangle_violations;
    }
    const double tol = 1e-10;
    const bool ok = product <= tol && assoc <= tol && commute <= tol && inverse <= tol &&
                    group3 <= tol && round_trip <= tol && order_violations == 0 &&
                    triangle_violations == 0;
    out.results = {{"growth_rate", g.name},
                   {"identity_element", identity_element(g)},
                   {"samples", c.group_samples},
                   {"max_relative_residual",
                    {{"product", product},
                     {"associativity", assoc},
                     {"commutativity", commute},
                     {"inverse", inverse},
                     {"inverse_of_quotient", group3},
                     {"round_trip", round_trip}}},
                   {"order_violations", order_violations},
                   {"triangle_violations", triangle_violations},
                   {"tolerance", tol}};
    out.verdict = ok ? "group laws hold" : "group laws violated";
    out.exit_code = ok ? kPositive : kViolated;
    if (!ok) out.witnesses.push_back("largest residual exceeds " + std::to_string(tol));

    CsvTable table{"grid", {"t", "h(t)", "star_inverse", "abs_star", "round_trip_error"}, {}};
    for (double t : config_grid(c))
        table.rows.push_back({t, g.forward(t), star_inverse(g, t), abs_star(g, t),
                              std::abs(g.inverse(g.forward(t)) - t)});
    out.tables.push_back(std::move(table));
}

// --- transition -------------------------------------------------------------

void run_transition(const AnalysisConfig& c, RunResult& out) {
    const auto ev = c.make_evaluator();
    const auto grid = config_grid(c);
    const int n = ev.dim();

    json pairs = json::array();
    for (const auto& [t, s] : c.transition_pairs)
        pairs.push_back({{"t", t}, {"s", s}, {"matrix", to_json(ev.transition(t, s))}});

    std::mt19937_64 rng(c.seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    double cocycle = 0;
    bool cocycle_ok = true;
    for (int k = 0; k < 50; ++k) {
        const double t = grid[pick(rng)], s = grid[pick(rng)], r = grid[pick(rng)];
        const Matrix direct = ev.transition(t, r);
        const double res = op_norm(ev.transition(t, s) * ev.transition(s, r) - direct);
        const double bound = 100 * c.integrator.rel_tol * (1 + op_norm(direct));
        cocycle = std::max(cocycle, res / (1 + op_norm(direct)));
        if (res > bound) cocycle_ok = false;
    }

    const auto phi = ev.fundamental_on(grid);
    const auto& sys = ev.system();
    std::vector<double> cf_error(grid.size(), 0.0);
    double oracle = 0;
    if (sys.has_closed_form()) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Matrix cf = sys.closed_form_fundamental(grid[i]);
            cf_error[i] = op_norm(phi[i] - cf) / (1 + op_norm(cf));
        }
        const auto sub = coarse_grid(c, 20);
        for (double t : sub)
            for (double s : sub) {
                const Matrix cf = sys.closed_form_fundamental(t) * sys.closed_form_fundamental(s).inverse();
                oracle = std::max(oracle, op_norm(ev.transition(t, s) - cf) / (1 + op_norm(cf)));
            }
    }
    const bool oracle_ok = oracle <= 1e-6;

    out.results = {{"system", sys.name},
                   {"dim", n},
                   {"pairs", pairs},
                   {"cocycle_relative_residual", cocycle},
                   {"cocycle_within_bound", cocycle_ok},
                   {"closed_form_available", sys.has_closed_form()},
                   {"closed_form_relative_error", oracle},
                   {"grid_points", grid.size()}};
    const bool ok = cocycle_ok && oracle_ok;
    out.verdict = ok ? "transition engine consistent" : "transition engine inconsistent";
    out.exit_code = ok ? kPositive : kViolated;
    if (!cocycle_ok) out.witnesses.push_back("cocycle residual " + std::to_string(cocycle));
    if (!oracle_ok) out.witnesses.push_back("closed-form mismatch " + std::to_string(oracle));

    CsvTable table{"fundamental", {"t", "h(t)"}, {}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            table.header.push_back("phi_" + std::to_string(i + 1) + std::to_string(j + 1));
    if (sys.has_closed_form()) table.header.push_back("closed_form_error");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{grid[k], c.growth.forward(grid[k])};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) row.push_back(phi[k](i, j));
        if (sys.has_closed_form()) row.push_back(cf_error[k]);
        table.rows.push_back(std::move(row));
    }
    out.tables.push_back(std::move(table));
}

// --- dichotomy --------------------------------------------------------------

CsvTable slack_table(const DichotomyReport& r, const GrowthRated& g) {
    CsvTable table{"slack", {"t", "h(t)", "stable_log_slack", "unstable_log_slack"}, {}};
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        table.rows.push_back({r.grid[i], g.forward(r.grid[i]), r.stable_row_slack[i],
                              r.unstable_row_slack[i]});
    return table;
}

void describe_violation(const DichotomyReport& r, double tol, RunResult& out) {
    auto pair = [](const PairWitness& w) {
        std::ostringstream os;
        os << "(t, s) = (" << w.t << ", " << w.s << "), log slack " << w.slack;
        return os.str();
    };
    if (r.worst_stable_residual < -tol) out.witnesses.push_back("stable bound fails at " + pair(r.stable_witness));
    if (r.worst_unstable_residual < -tol)
        out.witnesses.push_back("unstable bound fails at " + pair(r.unstable_witness));
}

void run_dichotomy_verify(const AnalysisConfig& c, RunResult& out) {
    if (!c.K || !c.alpha) throw ConfigError("dichotomy-verify needs config.dichotomy.K and alpha");
    const auto P = require_projector(c);
    const auto ev = c.make_evaluator();
    const auto grid = config_grid(c);
    const auto r = verify_dichotomy(ev, P, grid, *c.K, *c.alpha, c.verdict_tol);
    out.results = {{"projector", to_json(P)}, {"report", to_json(r)}};
    out.verdict = "dichotomy " + to_string(r.verdict);
    out.exit_code = r.verdict == Verdict::holds ? kPositive : kViolated;
    describe_violation(r, c.verdict_tol, out);
    out.tables.push_back(slack_table(r, c.growth));
}

void run_dichotomy_estimate(const AnalysisConfig& c, RunResult& out) {
    const auto P = require_projector(c);
    const auto ev = c.make_evaluator();
    const auto grid = config_grid(c);
    const auto fit = estimate_constants(ev, P, grid, c.safety);
    out.results = {{"projector", to_json(P)},
                   {"found", fit.found},
                   {"K", fit.K},
                   {"alpha", fit.alpha},
                   {"safety", c.safety},
                   {"slope_witness", to_json(fit.witness)},
                   {"reason", fit.reason}};
    if (!fit.found) {
        out.verdict = "no dichotomy constants: " + fit.reason;
        out.exit_code = kViolated;
        std::ostringstream os;
        os << "pair (t, s) = (" << fit.witness.t << ", " << fit.witness.s << ") with decay slope "
           << fit.witness.slack;
        out.witnesses.push_back(os.str());
        return;
    }
    const auto r = verify_dichotomy(ev, P, grid, fit.K, fit.alpha, c.verdict_tol);
    out.results["verification"] = to_json(r);
    out.verdict = "estimated constants " + to_string(r.verdict);
    out.exit_code = r.verdict == Verdict::holds ? kPositive : kNumericalFailure;
    out.tables.push_back(slack_table(r, c.growth));
}

// --- noncritical / expansive -------------------------------------------------

void run_noncritical(const AnalysisConfig& c, RunResult& out) {
    if (!c.noncritical_T) throw ConfigError("noncritical needs config.noncritical.T");
    const auto ev = c.make_evaluator();
    const auto t_grid = coarse_grid(c, c.noncritical_points);
    const auto dirs = sample_directions(ev.dim(), c.seed, c.direction_count);
    const auto r = noncritical_check(ev, *c.noncritical_T, t_grid, dirs, c.window_points);
    out.results = to_json(r);
    out.verdict = out.results["verdict"].get<std::string>();
    out.exit_code = r.verdict == Verdict::holds      ? kPositive
                    : r.verdict == Verdict::violated ? kViolated
                                                     : kNumericalFailure;
    if (r.verdict == Verdict::violated) {
        std::ostringstream os;
        os << "ratio " << r.theta << " at t = " << r.witness_t;
        out.witnesses.push_back(os.str());
    }
    CsvTable table{"ratios", {"t", "h(t)", "ratio"}, {}};
    for (std::size_t i = 0; i < r.t_grid.size(); ++i)
        table.rows.push_back({r.t_grid[i], c.growth.forward(r.t_grid[i]), r.ratios[i]});
    out.tables.push_back(std::move(table));
}

void run_expansive(const AnalysisConfig& c, RunResult& out) {
    double L = 0, beta = 0;
    if (c.expansive_L && c.expansive_beta) {
        L = *c.expansive_L;
        beta = *c.expansive_beta;
    } else if (c.K && c.alpha) {
        L = expansiveness_constant(*c.K);
        beta = *c.alpha;
    } else {
        throw ConfigError("expansive needs config.expansive.{L, beta} or config.dichotomy.{K, alpha}");
    }
    const auto ev = c.make_evaluator();
    const auto points = coarse_grid(c, c.triple_points);
    const auto triples = make_triples(points);
    const auto dirs = sample_directions(ev.dim(), c.seed, c.direction_count);
    const auto r = expansive_check(ev, L, beta, triples, dirs, c.verdict_tol);
    out.results = to_json(r);
    out.results["triples"] = triples.size();
    out.verdict = out.results["verdict"].get<std::string>();
    out.exit_code = r.verdict == Verdict::holds      ? kPositive
                    : r.verdict == Verdict::violated ? kViolated
                                                     : kNumericalFailure;
    if (r.verdict == Verdict::violated) {
        std::ostringstream os;
        os << "triple (a, t, b) = (" << r.witness.a << ", " << r.witness.t << ", " << r.witness.b
           << ") with margin " << r.worst_margin;
        out.witnesses.push_back(os.str());
    }
    CsvTable table{"margins", {"t", "h(t)", "worst_scaled_margin"}, {}};
    for (const auto& [t, m] : r.worst_by_t) table.rows.push_back({t, c.growth.forward(t), m});
    out.tables.push_back(std::move(table));
}

// --- full line / audit --------------------------------------------------------

void full_line_witnesses(const FullLineAnalysis& a, RunResult& out) {
    for (const auto& f : a.full_line.failed_conditions) out.witnesses.push_back(f);
    if (a.bounded.found()) {
        std::ostringstream os;
        os << "bounded solution direction " << to_json(a.bounded.direction).dump() << ", sup "
           << a.bounded.sup_norm << " attained near t = " << a.bounded.argmax_t;
        out.witnesses.push_back(os.str());
    }
}

CsvTable profile_table(const FullLineAnalysis& a, const GrowthRated& g) {
    CsvTable table{"bounded_profile", {"t", "h(t)", "candidate_norm"}, {}};
    for (std::size_t i = 0; i < a.full_grid.size(); ++i)
        table.rows.push_back({a.full_grid[i], g.forward(a.full_grid[i]), a.bounded.profile[i]});
    return table;
}

void run_fullline(const AnalysisConfig& c, RunResult& out) {
    const auto ev = c.make_evaluator();
    const auto a = analyze_full_line(ev, audit_options(c));
    out.results = to_json(a);
    out.verdict = to_string(a.full_line.verdict);
    out.exit_code = a.full_line.verdict == FullLineVerdict::dichotomy      ? kPositive
                    : a.full_line.verdict == FullLineVerdict::no_dichotomy ? kViolated
                                                                           : kNumericalFailure;
    full_line_witnesses(a, out);
    out.tables.push_back(profile_table(a, c.growth));
}

void run_audit(const AnalysisConfig& c, RunResult& out) {
    const auto ev = c.make_evaluator();
    const auto r = equivalence_audit(ev, audit_options(c));
    out.results = to_json(static_cast<const FullLineAnalysis&>(r));
    out.results["expansiveness"] = to_json(r.expansive);
    out.results["noncriticality"] = to_json(r.noncritical);
    out.results["L"] = r.L;
    out.results["beta"] = r.beta;
    out.results["T"] = r.T;
    out.results["theta_bound"] = r.theta_bound;
    out.results["bounded_growth_right"] = to_json(r.growth_plus, c.growth);
    out.results["bounded_decay_left"] = to_json(r.decay_minus, c.growth);
    out.results["statements"] = {{"i_half_line_dichotomies_no_bounded_solution", r.statement_i},
                                 {"ii_expansive", r.statement_ii},
                                 {"iii_noncritical", r.statement_iii}};
    out.results["implications_consistent"] = r.implications_consistent;

    if (!r.implications_consistent) {
        out.verdict = "observed properties contradict the equivalence; refine the sampling";
        out.exit_code = kNumericalFailure;
    } else if (r.statement_i && r.statement_ii && r.statement_iii) {
        out.verdict = "dichotomy, expansive and noncritical";
        out.exit_code = kPositive;
    } else {
        out.verdict = "equivalent properties all fail";
        out.exit_code = kViolated;
        full_line_witnesses(r, out);
        if (!r.statement_ii) {
            std::ostringstream os;
            os << "expansiveness fails on (a, t, b) = (" << r.expansive.witness.a << ", "
               << r.expansive.witness.t << ", " << r.expansive.witness.b << ")";
            out.witnesses.push_back(os.str());
        }
        if (!r.statement_iii) {
            std::ostringstream os;
            os << "noncriticality ratio " << r.noncritical.theta << " at t = " << r.noncritical.witness_t;
            out.witnesses.push_back(os.str());
        }
    }
    CsvTable table{"noncritical", {"t", "h(t)", "ratio"}, {}};
    for (std::size_t i = 0; i < r.noncritical.t_grid.size(); ++i)
        table.rows.push_back({r.noncritical.t_grid[i], c.growth.forward(r.noncritical.t_grid[i]),
                              r.noncritical.ratios[i]});
    out.tables.push_back(std::move(table));
}

// --- floquet --------------------------------------------------------------------

void run_floquet(const AnalysisConfig& c, RunResult& out) {
    if (!c.floquet_T) throw ConfigError("floquet needs config.floquet.T");
    const auto ev = c.make_evaluator();
    const FloquetContext ctx{ev, *c.floquet_T};
    const auto& g = c.growth;

    MonodromyReport m;
    try {
        m = monodromy(ctx, c.circle_tol, c.gfs_threshold);
    } catch (const GfsViolation& e) {
        out.results = {{"gfs_residual", e.residual()}, {"gfs_threshold", c.gfs_threshold}};
        out.verdict = "not a generalized Floquet system";
        out.exit_code = kViolated;
        out.witnesses.push_back(e.what());
        return;
    }
    const auto decision = hyperbolicity_decide(m, c.circle_tol);
    json mult = json::array();
    for (const auto& z : m.multipliers) mult.push_back(to_json(z));
    out.results = {{"T", m.T},
                   {"gfs_residual", m.gfs_residual},
                   {"V", to_json(m.V)},
                   {"multipliers", mult},
                   {"circle_gap", m.circle_gap},
                   {"stable_dim", m.stable_dim},
                   {"hyperbolicity", to_string(decision.verdict)}};

    const auto check_grid = coarse_grid(c, 10);
    const auto pr = periodicity_residuals(ctx, m, check_grid, c.n_max);
    out.results["periodicity_residuals"] = {{"biperiodicity", pr.biperiodicity},
                                            {"power_identity", pr.power_identity},
                                            {"multiplier_solution", pr.multiplier_solution}};

    out.verdict = to_string(decision.verdict);
    if (decision.verdict == Hyperbolicity::dichotomy) {
        const auto fc = floquet_constants(ctx, m, c.floquet_N, c.u_points);
        out.results["spectral_projector"] = to_json(*m.spectral_projector);
        out.results["constants"] = {{"K0", fc.K0}, {"a", fc.a},   {"K1", fc.K1},
                                    {"K2", fc.K2}, {"K", fc.K},   {"alpha_tilde", fc.alpha_tilde},
                                    {"N", fc.N},   {"u_points", fc.u_points}};
        const auto grid = config_grid(c);
        const auto vr = verify_dichotomy(ev, *m.spectral_projector, grid, fc.K, fc.alpha_tilde, c.verdict_tol);
        out.results["verification"] = to_json(vr);
        const bool all_in = m.stable_dim == static_cast<int>(m.multipliers.size());
        if (all_in || m.stable_dim == 0) {
            const auto sa = stability_audit(ctx, m, fc, coarse_grid(c, 40),
                                            sample_directions(ev.dim(), c.seed, c.direction_count));
            out.results["stability_audit"] = {{"kind", sa.stable ? "stable" : "unstable"},
                                              {"passed", sa.passed},
                                              {"worst_log_slack", sa.worst_slack}};
        }
        out.exit_code = vr.verdict == Verdict::holds ? kPositive : kNumericalFailure;
        if (vr.verdict != Verdict::holds) describe_violation(vr, c.verdict_tol, out);

        CsvTable table{"u_grid", {"t", "h(t)", "norm_phi", "norm_phi_inv"}, {}};
        const auto u = log_h_grid(g, 0.0, log_h(g, ctx.T), c.u_points);
        const auto phi = ev.fundamental_on(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            table.rows.push_back({u[i], g.forward(u[i]), op_norm(phi[i]), op_norm(phi[i].inverse())});
        out.tables.push_back(std::move(table));
    } else {
        std::ostringstream os;
        os << "multiplier " << decision.witness_multiplier << " at distance " << decision.gap
           << " from the unit circle; x(t) = Phi(t) xi satisfies x(t*T) = rho x(t)";
        out.witnesses.push_back(os.str());
        out.exit_code = decision.verdict == Hyperbolicity::no_dichotomy ? kViolated : kNumericalFailure;
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

Command parse_command(const std::string& name) {
    static const std::map<std::string, Command> table = {
        {"group-selftest", Command::group_selftest},
        {"transition", Command::transition},
        {"dichotomy-verify", Command::dichotomy_verify},
        {"dichotomy-estimate", Command::dichotomy_estimate},
        {"noncritical", Command::noncritical},
        {"expansive", Command::expansive},
        {"fullline", Command::fullline},
        {"floquet", Command::floquet},
        {"audit", Command::audit}};
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown command '" + name + "'");
    return it->second;
}

std::string to_string(Command c) {
    for (const auto& name : command_names())
        if (parse_command(name) == c) return name;
    return "audit";
}

std::vector<std::string> command_names() {
    return {"group-selftest", "transition", "dichotomy-verify", "dichotomy-estimate", "noncritical",
            "expansive",      "fullline",   "floquet",          "audit"};
}

std::string CsvTable::render() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

RunResult run(const AnalysisConfig& config, Command command) {
    RunResult out;
    out.command = command;
    try {
        switch (command) {
            case Command::group_selftest: run_group_selftest(config, out); break;
            case Command::transition: run_transition(config, out); break;
            case Command::dichotomy_verify: run_dichotomy_verify(config, out); break;
            case Command::dichotomy_estimate: run_dichotomy_estimate(config, out); break;
            case Command::noncritical: run_noncritical(config, out); break;
            case Command::expansive: run_expansive(config, out); break;
            case Command::fullline: run_fullline(config, out); break;
            case Command::floquet: run_floquet(config, out); break;
            case Command::audit: run_audit(config, out); break;
        }
    } catch (const ConfigError& e) {
        out.error = e.what();
        out.exit_code = kConfigError;
    } catch (const ArgumentError& e) {
        out.error = e.what();
        out.exit_code = kConfigError;
    } catch (const DomainError& e) {
        out.error = e.what();
        out.exit_code = kConfigError;
    } catch (const std::exception& e) {
        // Integration failures, rank ambiguity, overflow of group powers.
        out.error = e.what();
        out.exit_code = kNumericalFailure;
    }
    if (!out.error.empty()) {
        out.verdict = out.exit_code == kConfigError ? "input error" : "numerical failure";
        out.tables.clear();
    }
    return out;
}

json make_report(const AnalysisConfig& config, const RunResult& result, double wall_seconds) {
    json report = {{"schema_version", kSchemaVersion},
                   {"tool", {{"name", "hdicho"}, {"version", kToolVersion}}},
                   {"command", to_string(result.command)},
                   {"config", config.source},
                   {"effective",
                    {{"growth_rate", config.growth.name},
                     {"h_interval", {config.h_lo, config.h_hi}},
                     {"points_per_decade", config.points_per_decade},
                     {"rel_tol", config.integrator.rel_tol},
                     {"abs_tol", config.integrator.abs_tol},
                     {"seed", config.seed}}},
                   {"results", result.results},
                   {"summary",
                    {{"verdict", result.verdict},
                     {"exit_code", result.exit_code},
                     {"witnesses", result.witnesses}}},
                   {"timestamp", {{"utc", utc_now()}, {"wall_seconds", wall_seconds}}}};
    if (!result.error.empty()) report["summary"]["error"] = result.error;
    return report;
}

void write_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace hdicho
