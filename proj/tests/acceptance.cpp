// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hdicho/dichotomy.hpp"
#include "hdicho/floquet.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/sampling.hpp"

using namespace hdicho;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// Composite Simpson rule, used as an independent quadrature oracle.
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4 : 2);
    return sum * h / 3;
}

Outcome group_laws() {
    Outcome o;
    const double tol = 1e-10;
    for (const std::string name : {"exp", "identity", "power:3", "expm1"}) {
        const auto g = growth::from_name<double>(name);
        const double e = identity_element(g);
        std::mt19937_64 rng(20240601);
        std::uniform_real_distribution<double> y(-5.0, 5.0);
        auto draw = [&] { return from_log_h(g, y(rng)); };
        double worst = 0;
        std::size_t order_bad = 0, triangle_bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const double t = draw(), s = draw(), r = draw();
            worst = std::max(worst, rel(g.forward(star(g, t, s)), g.forward(t) * g.forward(s)));
            worst = std::max(worst, rel(g.forward(star(g, star(g, t, s), r)),
                                        g.forward(star(g, t, star(g, s, r)))));
            worst = std::max(worst, std::abs(g.forward(star(g, t, star_inverse(g, t))) - 1));
            worst = std::max(worst, rel(g.forward(star_inverse(g, star(g, t, star_inverse(g, s)))),
                                        g.forward(star(g, s, star_inverse(g, t)))));
            if ((e <= star(g, t, star_inverse(g, s))) != (s <= t)) ++order_bad;
            if (g.forward(abs_star(g, star(g, t, s))) >
                g.forward(star(g, abs_star(g, t), abs_star(g, s))) * (1 + tol))
                ++triangle_bad;
        }
        o.require(worst <= tol, name + " residual " + num(worst));
        o.require(order_bad == 0, name + " order violations " + std::to_string(order_bad));
        o.require(triangle_bad == 0, name + " triangle violations " + std::to_string(triangle_bad));
    }
    if (o.pass) o.detail = "max relative residual within 1e-10 for all four rates";
    return o;
}

Outcome transition_oracle() {
    Outcome o;
    const auto g = growth::exponential<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::h_diagonal, g, {{"alpha", 1.0}}), g);
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);
    double worst = 0;
    for (double t : grid)
        for (double s : grid)
            worst = std::max(worst, op_norm(ev.transition(t, s) - diag2(std::exp(-(t - s)), std::exp(t - s))));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    double cocycle = 0;
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng), s = u(rng), r = u(rng);
        cocycle = std::max(cocycle, op_norm(ev.transition(t, s) * ev.transition(s, r) - ev.transition(t, r)));
    }
    o.require(worst <= 1e-6, "closed-form error " + num(worst));
    o.require(cocycle <= 1e-6, "cocycle residual " + num(cocycle));
    if (o.pass) o.detail = "closed-form error " + num(worst) + ", cocycle " + num(cocycle);
    return o;
}

Outcome stated_constants() {
    Outcome o;
    const auto g = growth::identity<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::h_diagonal, g, {{"alpha", 1.0}}), g);
    const auto P = ConstantProjector::from_matrix(diag2(1, 0));
    const auto grid = analysis_grid(g, 1e-2, 1e2, 200, {});
    const auto r = verify_dichotomy(ev, P, grid, 1.0, 1.0);
    const auto fit = estimate_constants(ev, P, grid);
    o.require(r.verdict == Verdict::holds, "verify " + to_string(r.verdict));
    o.require(fit.found && fit.K <= 1.1, "K = " + num(fit.K));
    o.require(fit.alpha >= 0.9 && fit.alpha <= 1.0, "alpha = " + num(fit.alpha));
    if (o.pass) o.detail = "verify holds; fitted K = " + num(fit.K) + ", alpha = " + num(fit.alpha);
    return o;
}

Outcome floquet_example() {
    Outcome o;
    const auto g = growth::identity<double>();
    const auto sys = make_builtin(BuiltinSystem::floquet_demo, g, {{"alpha", 1.0}});
    const TransitionEvaluator ev(sys, g);
    const FloquetContext ctx{ev, 2.0};
    const double gfs = gfs_residual(sys, g, 2.0, default_gfs_grid(g, 2.0));
    const auto m = monodromy(ctx);
    const auto d = hyperbolicity_decide(m);
    std::vector<double> moduli;
    for (const auto& z : m.multipliers) moduli.push_back(std::abs(z));
    std::sort(moduli.begin(), moduli.end());
    o.require(gfs <= 1e-10, "gfs residual " + num(gfs));
    o.require(op_norm(m.V - diag2(0.5, 2)) <= 1e-8, "V off by " + num(op_norm(m.V - diag2(0.5, 2))));
    o.require(moduli.size() == 2 && std::abs(moduli[0] - 0.5) <= 1e-8 && std::abs(moduli[1] - 2) <= 1e-8,
              "multipliers");
    o.require(d.verdict == Hyperbolicity::dichotomy, "verdict " + to_string(d.verdict));
    if (!m.spectral_projector) {
        o.require(false, "no spectral projector");
        return o;
    }
    const double perr = op_norm(m.spectral_projector->matrix() - diag2(1, 0));
    o.require(perr <= 1e-8, "projector off by " + num(perr));
    const auto fc = floquet_constants(ctx, m);
    o.require(std::abs(fc.alpha_tilde - 1) <= 1e-6, "alpha_tilde " + num(fc.alpha_tilde));
    const auto grid = analysis_grid(g, 1e-2, 1e2, 200, {});
    const auto vr = verify_dichotomy(ev, *m.spectral_projector, grid, fc.K, fc.alpha_tilde);
    o.require(vr.verdict == Verdict::holds, "derived constants " + to_string(vr.verdict));
    if (o.pass)
        o.detail = "V = diag(0.5, 2), K = " + num(fc.K) + ", alpha_tilde = " + num(fc.alpha_tilde);
    return o;
}

Outcome counterexample() {
    Outcome o;
    const auto g = growth::identity<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::counterexample, g, {{"ell", 0.5}}), g);
    const auto one = ConstantProjector::from_matrix(Matrix::Identity(1, 1));
    const auto zero = ConstantProjector::from_matrix(Matrix::Zero(1, 1));

    const auto right = verify_dichotomy(ev, one, analysis_grid(g, 1.5, 100, 200, {}), 1, 1);
    const auto left = verify_dichotomy(ev, zero, analysis_grid(g, 0.01, 0.5, 200, {}), 1, 1);
    o.require(right.verdict == Verdict::holds, "right half " + to_string(right.verdict));
    o.require(left.verdict == Verdict::holds, "left half " + to_string(left.verdict));

    const int index = dichotomy_index(one, zero, 1);
    o.require(index == 1, "index " + std::to_string(index));

    // Quadrature oracle: |x(1.25)| / |x(0.5)| = exp of the coefficient integral.
    const double oracle = std::exp(simpson([](double t) { return counterexample_coefficient(t, 0.5); }, 0.5, 1.25));
    const auto full = analysis_grid(g, 1e-2, 1e2, 200, {});
    BoundedSearchOptions opts;
    opts.normalize_at = 0.5;
    const auto b = bounded_solution_search(ev, full, sample_directions(1), opts);
    o.require(b.found(), "search status " + to_string(b.status));
    o.require(std::abs(b.sup_norm - oracle) <= 1e-4,
              "sup " + num(b.sup_norm) + " vs oracle " + num(oracle));

    const auto comb = combine_half_lines(one, zero, b);
    const auto dec = full_line_decide(ev, left, right, comb, full);
    bool cites_index = false, cites_witness = false;
    for (const auto& f : dec.failed_conditions) {
        if (f.find("index") != std::string::npos) cites_index = true;
        if (f.find("bounded solution") != std::string::npos) cites_witness = true;
    }
    o.require(dec.verdict == FullLineVerdict::no_dichotomy, "decision " + to_string(dec.verdict));
    o.require(cites_index && cites_witness, "failure does not cite index and witness");
    if (o.pass) o.detail = "index 1, sup " + num(b.sup_norm) + " (oracle " + num(oracle) + ")";
    return o;
}

Outcome audit_h_diagonal() {
    Outcome o;
    const auto g = growth::exponential<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::h_diagonal, g, {{"alpha", 1.0}}), g);
    AuditOptions opts;
    opts.points_per_decade = 40;
    opts.P_plus = ConstantProjector::from_matrix(diag2(1, 0));
    opts.P_minus = opts.P_plus;
    opts.K = 1;
    opts.alpha = 1;
    opts.T = 2;
    opts.noncritical_points = 40;
    opts.window_points = 41;
    opts.triple_points = 16;
    const auto r = equivalence_audit(ev, opts);
    const double L_expected = std::max(1.0, 1.0 + 1.0);  // max{K^3, K + K^2} at K = 1
    o.require(r.statement_i, "no dichotomy detected");
    o.require(std::abs(r.L - L_expected) <= 1e-12, "L = " + num(r.L));
    o.require(r.statement_ii && r.expansive.worst_margin >= -1e-8,
              "expansiveness margin " + num(r.expansive.worst_margin));
    o.require(std::abs(r.theta_bound - 4 * std::exp(-2.0)) <= 1e-12, "theta bound " + num(r.theta_bound));
    o.require(r.theta_bound < 1 && std::abs(r.theta_bound - 0.541) <= 1e-3, "theta bound not ~0.541");
    o.require(r.statement_iii && r.noncritical.theta <= r.theta_bound + 1e-8,
              "observed theta " + num(r.noncritical.theta));
    o.require(r.implications_consistent, "implications inconsistent");
    if (o.pass)
        o.detail = "L = 2, theta bound " + num(r.theta_bound) + ", observed theta " + num(r.noncritical.theta);
    return o;
}

Outcome contrapositive() {
    Outcome o;
    const auto g = growth::identity<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::counterexample, g, {{"ell", 0.5}}), g);
    const std::array<double, 1> extra{1.25};
    const auto grid = analysis_grid(g, 1e-2, 1e2, 20, extra);
    const auto r = noncritical_check(ev, 2.0, grid, sample_directions(1), 81);
    o.require(r.theta >= 1 - 1e-6, "theta " + num(r.theta));
    o.require(r.verdict == Verdict::violated, "verdict " + to_string(r.verdict));
    if (o.pass) o.detail = "theta " + num(r.theta) + " at t = " + num(r.witness_t) + ", critical";
    return o;
}

Outcome converse_witness() {
    Outcome o;
    const auto g = growth::exponential<double>();
    const TransitionEvaluator ev(make_constant_system(Matrix::Zero(1, 1), g), g);
    const FloquetContext ctx{ev, 1.0};
    const auto m = monodromy(ctx);
    const auto d = hyperbolicity_decide(m);
    std::vector<double> grid;
    for (int i = -10; i <= 10; ++i) grid.push_back(0.3 * i);
    const auto pr = periodicity_residuals(ctx, m, grid, 3);
    o.require(m.multipliers.size() == 1 && std::abs(m.multipliers[0] - Complex(1, 0)) <= 1e-12,
              "multiplier");
    o.require(d.verdict == Hyperbolicity::no_dichotomy, "verdict " + to_string(d.verdict));
    o.require(pr.multiplier_solution <= 1e-12, "Floquet identity residual " + num(pr.multiplier_solution));
    if (o.pass) o.detail = "rho = 1, no_dichotomy, residual " + num(pr.multiplier_solution);
    return o;
}

Outcome split_bounds() {
    Outcome o;
    const auto g = growth::identity<double>();
    const TransitionEvaluator ev(make_builtin(BuiltinSystem::h_diagonal, g, {{"alpha", 1.0}}), g);
    const auto P = ConstantProjector::from_matrix(diag2(1, 0));
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> y(std::log(1e-2), std::log(1e2));
    std::normal_distribution<double> n01;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        const double t = std::exp(y(rng)), t0 = std::exp(y(rng));
        Vector x0(2);
        x0 << n01(rng), n01(rng);
        const auto s = split_solution(ev, P, t, t0, x0, 1, 1);
        worst = std::min({worst, s.first_slack, s.second_slack});
    }
    o.require(worst >= -1e-9, "worst slack " + num(worst));
    if (o.pass) o.detail = "worst relative slack " + num(worst);
    return o;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / ("hdicho_det_" + std::to_string(std::random_device{}()));
    std::array<nlohmann::json, 2> runs;
    for (int k = 0; k < 2; ++k) {
        const fs::path dir = base / std::to_string(k);
        const std::string cmd = std::string("\"") + HDICHO_CLI + "\" audit --config \"" + HDICHO_CONFIGS +
                                "/h_diagonal_exp.json\" --out \"" + dir.string() + "\" > /dev/null";
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, "cli run " + std::to_string(k) + " returned " + std::to_string(rc));
        if (!o.pass) break;
        runs[k] = nlohmann::json::parse(read_file((dir / "audit.json").string()));
        runs[k].erase("timestamp");
    }
    if (o.pass) o.require(runs[0].dump() == runs[1].dump(), "reports differ");
    std::error_code ec;
    fs::remove_all(base, ec);
    if (o.pass) o.detail = "two audit reports identical apart from timestamp";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"group laws", group_laws},
        {"transition oracle", transition_oracle},
        {"stated dichotomy constants", stated_constants},
        {"Floquet example", floquet_example},
        {"counterexample", counterexample},
        {"equivalence audit", audit_h_diagonal},
        {"critical counterexample", contrapositive},
        {"converse witness", converse_witness},
        {"split bounds", split_bounds},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2zu %-28s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
