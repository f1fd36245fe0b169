#include <algorithm>
#include <cmath>

#include "hdicho/dichotomy.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/parallel.hpp"

namespace hdicho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinLogRatio = 0.6931471805599453;  // ln 2

void require_sorted_grid(std::span<const double> grid, std::size_t min_points) {
    if (grid.size() < min_points)
        throw ArgumentError("grid needs at least " + std::to_string(min_points) + " points");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw ArgumentError("grid must be sorted in increasing order");
}

void require_projector_dim(const ConstantProjector& P, const TransitionEvaluator& ev) {
    if (P.dim() != ev.dim()) throw ArgumentError("projector dimension does not match the system");
}

// Row-wise minimum of a pair functional, reduced in index order so that ties
// always resolve to the same witness.
struct RowBest {
    double value = kInf;
    std::size_t j = 0;
};

PairWitness reduce_rows(const std::vector<RowBest>& rows, std::span<const double> grid) {
    PairWitness w;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].value < w.slack) {
            w.slack = rows[i].value;
            w.t = grid[i];
            w.s = grid[rows[i].j];
        }
    }
    return w;
}

}  // namespace

ConstantProjector ConstantProjector::from_matrix(const Matrix& p, double tol) {
    if (p.rows() != p.cols() || p.rows() == 0) throw ArgumentError("projector must be square");
    if (!p.allFinite()) throw ArgumentError("projector has non-finite entries");
    ConstantProjector out;
    out.p_ = p;
    out.residual_ = op_norm(p * p - p);
    if (out.residual_ > tol)
        throw ArgumentError("matrix is not idempotent: ||P^2 - P|| = " +
                            std::to_string(out.residual_));
    return out;
}

int ConstantProjector::rank(double tol) const { return numerical_rank(p_, tol).rank; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string to_string(GrowthMode m) {
    switch (m) {
        case GrowthMode::growth: return "growth";
        case GrowthMode::decay: return "decay";
        case GrowthMode::both: return "both";
    }
    return "both";
}

GrowthMode parse_growth_mode(const std::string& name) {
    if (name == "growth") return GrowthMode::growth;
    if (name == "decay") return GrowthMode::decay;
    if (name == "both") return GrowthMode::both;
    throw ArgumentError("unknown growth mode '" + name + "'");
}

std::vector<double> analysis_grid(const GrowthRated& g, double h_lo, double h_hi,
                                  std::size_t per_decade, std::span<const double> extra) {
    auto grid = h_decade_grid(g, h_lo, h_hi, per_decade);
    for (double t : extra)
        if (g.contains(t)) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DichotomyReport verify_dichotomy(const TransitionEvaluator& ev, const ConstantProjector& P,
                                 std::span<const double> grid, double K, double alpha,
                                 double tol) {
    require_sorted_grid(grid, 2);
    require_projector_dim(P, ev);
    if (!(K >= 1)) throw ArgumentError("dichotomy constant K must be >= 1");
    if (!(alpha > 0)) throw ArgumentError("dichotomy exponent alpha must be > 0");

    const auto table = FundamentalTable::build(ev, grid);
    const std::size_t n = grid.size();
    const double lnK = std::log(K);
    std::vector<Matrix> stable(n), unstable(n);
    for (std::size_t i = 0; i < n; ++i) {
        stable[i] = table.phi[i] * P.matrix();
        unstable[i] = table.phi[i] * P.complement();
    }

    std::vector<RowBest> st(n), un(n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double dy = table.log_h[i] - table.log_h[j];
            if (j <= i) {  // t >= s: stable part decays forward
                const double r = op_norm(stable[i] * table.phi_inv[j]);
                const double slack = r > 0 ? lnK - alpha * dy - std::log(r) : kInf;
                if (slack < st[i].value) st[i] = {slack, j};
            }
            if (j >= i) {  // t <= s: unstable part decays backward
                const double r = op_norm(unstable[i] * table.phi_inv[j]);
                const double slack = r > 0 ? lnK + alpha * dy - std::log(r) : kInf;
                if (slack < un[i].value) un[i] = {slack, j};
            }
        }
    });

    DichotomyReport report;
    report.lo = grid.front();
    report.hi = grid.back();
    report.grid.assign(grid.begin(), grid.end());
    report.K = K;
    report.alpha = alpha;
    report.stable_witness = reduce_rows(st, grid);
    report.unstable_witness = reduce_rows(un, grid);
    report.worst_stable_residual = report.stable_witness.slack;
    report.worst_unstable_residual = report.unstable_witness.slack;
    for (std::size_t i = 0; i < n; ++i) {
        report.stable_row_slack.push_back(st[i].value);
        report.unstable_row_slack.push_back(un[i].value);
    }
    report.verdict = report.worst_stable_residual >= -tol && report.worst_unstable_residual >= -tol
                         ? Verdict::holds
                         : Verdict::violated;
    return report;
}

ConstantsFit estimate_constants(const TransitionEvaluator& ev, const ConstantProjector& P,
                                std::span<const double> grid, double safety) {
    require_sorted_grid(grid, 10);
    require_projector_dim(P, ev);
    if (!(safety > 0) || safety > 1) throw ArgumentError("safety factor must lie in (0, 1]");

    const auto table = FundamentalTable::build(ev, grid);
    const std::size_t n = grid.size();
    std::vector<Matrix> stable(n), unstable(n);
    for (std::size_t i = 0; i < n; ++i) {
        stable[i] = table.phi[i] * P.matrix();
        unstable[i] = table.phi[i] * P.complement();
    }

    // Decaying-part samples: stable pairs t_i >= s_j, unstable pairs t_i <= s_j.
    struct Sample {
        double log_ratio;
        double log_norm;
        std::size_t j;
    };
    std::vector<std::vector<Sample>> rows(n);
    std::vector<RowBest> slope(n);
    parallel_for(n, [&](std::size_t i) {
        auto& row = rows[i];
        row.reserve(n + 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j <= i) {
                const double r = op_norm(stable[i] * table.phi_inv[j]);
                if (r > 0) row.push_back({table.log_h[i] - table.log_h[j], std::log(r), j});
            }
            if (j >= i) {
                const double r = op_norm(unstable[i] * table.phi_inv[j]);
                if (r > 0) row.push_back({table.log_h[j] - table.log_h[i], std::log(r), j});
            }
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k].log_ratio < kMinLogRatio) continue;
            const double s = -row[k].log_norm / row[k].log_ratio;
            if (s < slope[i].value) slope[i] = {s, k};
        }
    });

    ConstantsFit fit;
    double raw = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (slope[i].value < raw) {
            raw = slope[i].value;
            fit.witness.t = grid[i];
            fit.witness.s = grid[rows[i][slope[i].j].j];
        }
    }
    if (!std::isfinite(raw)) {
        fit.reason = "no grid pair with h-ratio >= 2 carries a nonzero norm";
        return fit;
    }
    fit.alpha = safety * raw;
    fit.witness.slack = raw;
    if (!(fit.alpha > 0)) {
        fit.reason = "no decay detected: fitted exponent " + std::to_string(raw) + " <= 0";
        return fit;
    }
    double logK = 0;
    for (const auto& row : rows)
        for (const auto& s : row) logK = std::max(logK, s.log_norm + fit.alpha * s.log_ratio);
    fit.K = std::exp(logK);
    fit.found = true;
    return fit;
}

SplitSolution split_solution(const TransitionEvaluator& ev, const ConstantProjector& P, double t,
                             double t0, const Vector& x0, double K, double alpha, double tol) {
    require_projector_dim(P, ev);
    if (x0.size() != ev.dim()) throw ArgumentError("initial vector has the wrong dimension");
    const Matrix phi_t = ev.fundamental(t);
    const Matrix phi_t0 = ev.fundamental(t0);
    const Matrix phi_t0_inv = phi_t0.inverse();
    const Vector z = phi_t0_inv * x0;

    SplitSolution out;
    out.x_plus = phi_t * (P.matrix() * z);
    out.x_minus = phi_t * (P.complement() * z);
    out.forward = t >= t0;

    const double dy = log_h(ev.growth(), t) - log_h(ev.growth(), t0);
    const double x0_norm = x0.norm();
    const double p0_norm = (phi_t0 * (P.matrix() * z)).norm();     // |P(t0) x0|
    const double q0_norm = (phi_t0 * (P.complement() * z)).norm();  // |Q(t0) x0|
    const double plus = out.x_plus.norm();
    const double minus = out.x_minus.norm();

    auto relative = [](double bigger, double smaller) {
        const double scale = std::max(std::abs(bigger), std::abs(smaller));
        return scale > 0 ? (bigger - smaller) / scale : 0.0;
    };
    if (out.forward) {
        // |x+| <= K (h(t0)/h(t))^a |x0|  and  |Q(t0)x0| (h(t)/h(t0))^a / K <= |x-|
        out.first_slack = relative(K * std::exp(-alpha * dy) * x0_norm, plus);
        out.second_slack = relative(minus, q0_norm * std::exp(alpha * dy) / K);
    } else {
        // (h(t0)/h(t))^a |P(t0)x0| / K <= |x+|  and  |x-| <= K (h(t)/h(t0))^a |x0|
        out.first_slack = relative(plus, std::exp(-alpha * dy) * p0_norm / K);
        out.second_slack = relative(K * std::exp(alpha * dy) * x0_norm, minus);
    }
    out.first_ok = out.first_slack >= -tol;
    out.second_ok = out.second_slack >= -tol;
    return out;
}

double GrowthBoundReport::constant_for(const GrowthRated& g, double T) const {
    const double y = log_h(g, T);
    if (!(y > 0)) throw ArgumentError("T must exceed the identity element");
    return K0 * std::exp(beta * y);
}

GrowthBoundReport growth_bound(const TransitionEvaluator& ev, std::span<const double> grid,
                               GrowthMode mode) {
    require_sorted_grid(grid, 1);
    GrowthBoundReport report;
    report.mode = mode;
    const std::size_t n = grid.size();
    if (n == 1) {
        report.worst_residual = 0;
        report.pairs = 1;
        return report;
    }
    const auto table = FundamentalTable::build(ev, grid);
    auto wanted = [mode](std::size_t i, std::size_t j) {
        switch (mode) {
            case GrowthMode::growth: return i >= j;
            case GrowthMode::decay: return i <= j;
            case GrowthMode::both: return true;
        }
        return true;
    };

    // (log h-ratio >= 0, log ||Phi(t_i, s_j)||) for every selected pair.
    std::vector<std::vector<std::pair<double, double>>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!wanted(i, j)) continue;
            const double r = op_norm(table.phi[i] * table.phi_inv[j]);
            rows[i].emplace_back(std::abs(table.log_h[i] - table.log_h[j]), std::log(r));
        }
    });

    double beta = 0;
    for (const auto& row : rows)
        for (const auto& [lr, ln] : row)
            if (lr >= kMinLogRatio) beta = std::max(beta, ln / lr);
    double logK0 = 0;
    std::size_t pairs = 0;
    for (const auto& row : rows) {
        pairs += row.size();
        for (const auto& [lr, ln] : row) logK0 = std::max(logK0, ln - beta * lr);
    }
    double worst = kInf;
    for (const auto& row : rows)
        for (const auto& [lr, ln] : row) worst = std::min(worst, logK0 + beta * lr - ln);

    report.beta = beta;
    report.K0 = std::exp(logK0);
    report.worst_residual = worst;
    report.pairs = pairs;
    return report;
}

}  // namespace hdicho
