#include "hdicho/floquet.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

#include "hdicho/linalg.hpp"
#include "hdicho/parallel.hpp"

namespace hdicho {

namespace {

void require_period(const GrowthRated& g, double T) {
    require_in_domain(g, T, "period T");
    if (!(log_h(g, T) > 0)) throw ArgumentError("T must exceed identity element");
}

bool inside(const Complex& z) { return std::abs(z) < 1; }

}  // namespace

std::vector<double> default_gfs_grid(const GrowthRated& g, double T, std::size_t count) {
    require_period(g, T);
    const double y = log_h(g, T);
    return log_h_grid(g, -2 * y, 2 * y, count);
}

double gfs_residual(const LinearSystem& sys, const GrowthRated& g, double T,
                    std::span<const double> grid) {
    if (!g.log_derivative) throw ArgumentError("generalized Floquet condition needs h'");
    require_period(g, T);
    double worst = 0;
    for (double t : grid) {
        const double shifted = star(g, t, T);
        // h'(t) h(T) / h'(t*T) = (h'/h)(t) / (h'/h)(t*T)
        const double factor = g.log_derivative(t) / g.log_derivative(shifted);
        const Matrix At = sys.coefficient(t);
        const double r = op_norm(factor * sys.coefficient(shifted) - At) / (1 + op_norm(At));
        worst = std::max(worst, r);
    }
    return worst;
}

MonodromyReport monodromy(const FloquetContext& ctx, double circle_tol, double gfs_threshold,
                          std::span<const double> gfs_grid) {
    const auto& g = ctx.growth();
    require_period(g, ctx.T);
    if (ctx.ev.anchor() != identity_element(g))
        throw ArgumentError("monodromy needs the fundamental matrix normalized at e*");

    MonodromyReport r;
    r.T = ctx.T;
    r.tolerance = circle_tol;
    if (gfs_grid.empty()) {
        const auto grid = default_gfs_grid(g, ctx.T);
        r.gfs_residual = gfs_residual(ctx.ev.system(), g, ctx.T, grid);
    } else {
        r.gfs_residual = gfs_residual(ctx.ev.system(), g, ctx.T, gfs_grid);
    }
    if (!(r.gfs_residual <= gfs_threshold))
        throw GfsViolation("coefficient violates the generalized Floquet condition (residual " +
                               std::to_string(r.gfs_residual) + ")",
                           r.gfs_residual);

    r.V = ctx.ev.fundamental(ctx.T);
    Eigen::EigenSolver<Matrix> es(r.V, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    const auto vals = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
    r.circle_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        r.multipliers.push_back(vals(i));
        r.circle_gap = std::min(r.circle_gap, std::abs(std::abs(vals(i)) - 1));
        if (inside(vals(i))) ++r.stable_dim;
    }
    r.hyperbolic = r.circle_gap > circle_tol;
    if (r.hyperbolic) r.spectral_projector = spectral_projector(r.V, circle_tol);
    return r;
}

PeriodicityResiduals periodicity_residuals(const FloquetContext& ctx, const MonodromyReport& report,
                                           std::span<const double> grid, int n_max) {
    if (n_max < 0) throw ArgumentError("n_max must be nonnegative");
    const auto& g = ctx.growth();
    const double T = ctx.T;

    // Every time needed below, integrated once.
    std::vector<double> shifted(grid.size());
    std::vector<std::vector<double>> powers(grid.size());
    std::vector<double> times(grid.begin(), grid.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        shifted[i] = star(g, grid[i], T);
        times.push_back(shifted[i]);
        for (int k = 0; k <= n_max; ++k) {
            powers[i].push_back(star(g, grid[i], star_power(g, T, k)));
            times.push_back(powers[i].back());
        }
    }
    const auto phi = ctx.ev.fundamental_on(times);
    std::map<double, Matrix> at;
    for (std::size_t i = 0; i < times.size(); ++i) at.emplace(times[i], phi[i]);

    PeriodicityResiduals out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Matrix& pt = at.at(grid[i]);
        const Matrix& ptT = at.at(shifted[i]);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Matrix base = pt * at.at(grid[j]).inverse();
            const Matrix moved = ptT * at.at(shifted[j]).inverse();
            out.biperiodicity =
                std::max(out.biperiodicity, op_norm(moved - base) / (1 + op_norm(base)));
        }
    }

    out.power_by_n.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    Matrix Vn = Matrix::Identity(report.V.rows(), report.V.cols());
    for (int k = 0; k <= n_max; ++k) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Matrix expected = at.at(grid[i]) * Vn;
            const double r = op_norm(at.at(powers[i][k]) - expected) / (1 + op_norm(expected));
            out.power_by_n[k] = std::max(out.power_by_n[k], r);
        }
        out.power_identity = std::max(out.power_identity, out.power_by_n[k]);
        Vn = Vn * report.V;
    }

    for (std::size_t e = 0; e < report.multipliers.size(); ++e) {
        const Complex rho = report.multipliers[e];
        const Eigen::VectorXcd xi = report.eigenvectors.col(static_cast<Eigen::Index>(e)).normalized();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Eigen::VectorXcd x = at.at(grid[i]).cast<Complex>() * xi;
            const Eigen::VectorXcd xT = at.at(shifted[i]).cast<Complex>() * xi;
            const double r = (xT - rho * x).norm() / std::max(1.0, xT.norm());
            out.multiplier_solution = std::max(out.multiplier_solution, r);
        }
    }
    return out;
}

std::string to_string(Hyperbolicity h) {
    switch (h) {
        case Hyperbolicity::dichotomy: return "dichotomy";
        case Hyperbolicity::no_dichotomy: return "no_dichotomy";
        case Hyperbolicity::marginal: return "marginal";
    }
    return "marginal";
}

HyperbolicityDecision hyperbolicity_decide(const MonodromyReport& report, double tol) {
    HyperbolicityDecision d;
    d.gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < report.multipliers.size(); ++i) {
        const double gap = std::abs(std::abs(report.multipliers[i]) - 1);
        if (gap < d.gap) {
            d.gap = gap;
            d.witness = i;
        }
    }
    if (!report.multipliers.empty()) {
        d.witness_multiplier = report.multipliers[d.witness];
        d.witness_direction = report.eigenvectors.col(static_cast<Eigen::Index>(d.witness)).normalized();
    }
    if (d.gap > 10 * tol)
        d.verdict = Hyperbolicity::dichotomy;
    else if (d.gap <= tol)
        d.verdict = Hyperbolicity::no_dichotomy;
    else
        d.verdict = Hyperbolicity::marginal;
    return d;
}

ConstantProjector spectral_projector(const Matrix& V, double tol) {
    const Eigen::Index n = V.rows();
    if (V.cols() != n || n == 0) throw ArgumentError("monodromy matrix must be square");
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(V.cast<Complex>());
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
    Eigen::MatrixXcd Tm = schur.matrixT();
    Eigen::MatrixXcd U = schur.matrixU();

    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(std::abs(Tm(i, i)) - 1) <= tol)
            throw NumericalError("reordering failed: a multiplier lies on the unit circle");

    // Bubble the multipliers inside the unit circle to the leading block.
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            if (inside(Tm(k, k)) || !inside(Tm(k + 1, k + 1))) continue;
            const Complex a = Tm(k, k), c = Tm(k + 1, k + 1);
            Eigen::JacobiRotation<Complex> G;
            G.makeGivens(Tm(k, k + 1), c - a);
            Tm.applyOnTheLeft(k, k + 1, G.adjoint());
            Tm.applyOnTheRight(k, k + 1, G);
            U.applyOnTheRight(k, k + 1, G);
            Tm(k, k) = c;
            Tm(k + 1, k + 1) = a;
            Tm(k + 1, k) = 0;
            swapped = true;
        }
    }

    Eigen::Index p = 0;
    while (p < n && inside(Tm(p, p))) ++p;
    if (p == 0) return ConstantProjector::from_matrix(Matrix::Zero(n, n), 1e-8);
    if (p == n) return ConstantProjector::from_matrix(Matrix::Identity(n, n), 1e-8);

    // T11 X - X T22 = T12, solved column by column (both blocks upper triangular).
    const Eigen::MatrixXcd T11 = Tm.topLeftCorner(p, p);
    const Eigen::MatrixXcd T12 = Tm.topRightCorner(p, n - p);
    const Eigen::MatrixXcd T22 = Tm.bottomRightCorner(n - p, n - p);
    Eigen::MatrixXcd X(p, n - p);
    for (Eigen::Index j = 0; j < n - p; ++j) {
        Eigen::VectorXcd rhs = T12.col(j);
        for (Eigen::Index l = 0; l < j; ++l) rhs += X.col(l) * T22(l, j);
        Eigen::MatrixXcd M = T11;
        M.diagonal().array() -= T22(j, j);
        X.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
    }
    Eigen::MatrixXcd Ps = Eigen::MatrixXcd::Zero(n, n);
    Ps.topLeftCorner(p, p).setIdentity();
    Ps.topRightCorner(p, n - p) = X;
    const Matrix P = (U * Ps * U.adjoint()).real();
    return ConstantProjector::from_matrix(P, 1e-8);
}

FloquetConstants floquet_constants(const FloquetContext& ctx, const MonodromyReport& report, int N,
                                   std::size_t u_points) {
    if (!report.hyperbolic || !report.spectral_projector)
        throw ArgumentError("Floquet constants need a hyperbolic monodromy matrix");
    if (N < 5) throw ArgumentError("N must be at least 5");
    if (u_points < 2) throw ArgumentError("u grid needs at least 2 points");
    const auto& g = ctx.growth();
    const Matrix& V = report.V;
    const Matrix& P = report.spectral_projector->matrix();
    const Matrix Q = report.spectral_projector->complement();
    const Matrix Vinv = V.inverse();

    // P commutes with V, so V^n P V^{-k} = V^{n-k} P and only m = n - k in [0, 2N] matters.
    const int M = 2 * N;
    std::vector<double> rs(M + 1), ru(M + 1);
    Matrix fwd = P, bwd = Q;
    for (int m = 0; m <= M; ++m) {
        rs[m] = op_norm(fwd);
        ru[m] = op_norm(bwd);
        fwd = V * fwd;
        bwd = Vinv * bwd;
    }
    double a = std::numeric_limits<double>::infinity();
    if (rs[0] > 0) a = std::min(a, -std::log(rs[M] / rs[0]) / M);
    if (ru[0] > 0) a = std::min(a, -std::log(ru[M] / ru[0]) / M);
    if (!(a > 0) || !std::isfinite(a)) throw NumericalError("no discrete decay rate detected");

    FloquetConstants c;
    c.N = N;
    c.a = a;
    double logK0 = 0;
    for (int m = 0; m <= M; ++m) {
        if (rs[m] > 0) logK0 = std::max(logK0, std::log(rs[m]) + a * m);
        if (ru[m] > 0) logK0 = std::max(logK0, std::log(ru[m]) + a * m);
    }
    c.K0 = std::exp(logK0);

    const auto u = log_h_grid(g, 0.0, log_h(g, ctx.T), u_points);
    const auto phi = ctx.ev.fundamental_on(u);
    for (const auto& m : phi) {
        c.K1 = std::max(c.K1, op_norm(m));
        c.K2 = std::max(c.K2, op_norm(m.inverse()));
    }
    c.u_points = u_points;
    c.K = c.K0 * c.K1 * c.K2 * std::exp(a);
    c.alpha_tilde = a / log_h(g, ctx.T);
    return c;
}

StabilityAudit stability_audit(const FloquetContext& ctx, const MonodromyReport& report,
                               const FloquetConstants& constants, std::span<const double> grid,
                               const std::vector<Vector>& directions, double tol) {
    const bool all_in = std::all_of(report.multipliers.begin(), report.multipliers.end(),
                                    [](const Complex& z) { return std::abs(z) < 1; });
    const bool all_out = std::all_of(report.multipliers.begin(), report.multipliers.end(),
                                     [](const Complex& z) { return std::abs(z) > 1; });
    if (!all_in && !all_out)
        throw ArgumentError("inapplicable spectrum: multipliers on both sides of the unit circle");

    StabilityAudit out;
    out.stable = all_in;
    const auto table = FundamentalTable::build(ctx.ev, grid);
    const double lnK = std::log(constants.K);
    const double alpha = constants.alpha_tilde;
    const std::size_t n = grid.size();

    struct Worst {
        double slack = std::numeric_limits<double>::infinity();
        std::size_t j = 0, d = 0;
    };
    std::vector<Worst> rows(n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const Matrix transfer = table.phi[i] * table.phi_inv[j];
            const double dy = table.log_h[i] - table.log_h[j];
            for (std::size_t d = 0; d < directions.size(); ++d) {
                const double x = (transfer * directions[d]).norm() / directions[d].norm();
                const double lx = std::log(x);
                const double slack = out.stable ? lnK - alpha * dy - lx : lx - alpha * dy + lnK;
                if (slack < rows[i].slack) rows[i] = {slack, j, d};
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].slack < out.worst_slack) {
            out.worst_slack = rows[i].slack;
            out.witness_t = grid[i];
            out.witness_t0 = grid[rows[i].j];
            out.witness_direction = directions[rows[i].d];
        }
    }
    out.passed = out.worst_slack >= -tol;
    return out;
}

}  // namespace hdicho
