#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "hdicho/floquet.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/sampling.hpp"

using namespace hdicho;

namespace {

const GrowthRated Id = growth::identity<double>();
const GrowthRated Exp = growth::exponential<double>();

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

std::vector<double> moduli(const MonodromyReport& m) {
    std::vector<double> out;
    for (const auto& z : m.multipliers) out.push_back(std::abs(z));
    std::sort(out.begin(), out.end());
    return out;
}

MonodromyReport fake(std::vector<Complex> rho) {
    MonodromyReport m;
    m.multipliers = std::move(rho);
    m.eigenvectors = Eigen::MatrixXcd::Identity(m.multipliers.size(), m.multipliers.size());
    return m;
}

}  // namespace

TEST_SUITE("floquet") {

TEST_CASE("gfs residual") {
    for (double alpha : {0.5, 1.0, 3.0}) {
        const auto sys = make_builtin(BuiltinSystem::floquet_demo, Id, {{"alpha", alpha}});
        CHECK(gfs_residual(sys, Id, 2.0, default_gfs_grid(Id, 2.0)) <= 1e-12);
    }
    Matrix A(2, 2);
    A << 0.1, 2.0, -1.0, 0.4;
    for (double T : {0.5, 1.0, 3.0})
        CHECK(gfs_residual(make_constant_system(A, Exp), Exp, T, default_gfs_grid(Exp, T)) <= 1e-12);

    const auto ce = make_builtin(BuiltinSystem::counterexample, Id);
    CHECK(gfs_residual(ce, Id, 2.0, default_gfs_grid(Id, 2.0)) > 0.1);

    auto rough = growth::identity<double>();
    rough.derivative = nullptr;
    rough.log_derivative = nullptr;
    CHECK_THROWS_AS(gfs_residual(make_constant_system(A, rough), rough, 2.0, default_gfs_grid(Id, 2.0)),
                    ArgumentError);
}

TEST_CASE("monodromy") {
    const TransitionEvaluator fd(make_builtin(BuiltinSystem::floquet_demo, Id), Id);
    const auto m2 = monodromy({fd, 2.0});
    CHECK(op_norm(m2.V - diag2(0.5, 2)) < 1e-8);
    const auto r2 = moduli(m2);
    CHECK(r2[0] == doctest::Approx(0.5));
    CHECK(r2[1] == doctest::Approx(2.0));
    CHECK(m2.stable_dim == 1);
    CHECK(m2.hyperbolic);

    const auto m4 = monodromy({fd, 4.0});
    const auto r4 = moduli(m4);
    CHECK(r4[0] == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(r4[1] == doctest::Approx(4.0).epsilon(1e-8));

    const TransitionEvaluator c(make_constant_system(diag2(-1, 1), Exp), Exp);
    CHECK(op_norm(monodromy({c, 1.0}).V - diag2(std::exp(-1.0), std::exp(1.0))) < 1e-8);

    const TransitionEvaluator ce(make_builtin(BuiltinSystem::counterexample, Id), Id);
    try {
        monodromy({ce, 2.0});
        FAIL("expected a GFS violation");
    } catch (const GfsViolation& e) {
        CHECK(e.residual() > 0.1);
    }
}

TEST_CASE("monodromy consistency and anchor independence") {
    Matrix A(2, 2);
    A << 0.2, 1.0, -2.0, -0.1;
    const TransitionEvaluator ev(make_constant_system(A, Exp), Exp);
    const FloquetContext ctx{ev, 0.7};
    const auto m = monodromy(ctx);
    for (double t : log_h_grid(Exp, -3.0, 3.0, 50)) {
        const Matrix lhs = ev.fundamental(star(Exp, t, 0.7));
        const Matrix rhs = ev.fundamental(t) * m.V;
        CHECK(op_norm(lhs - rhs) <= 1e-6 * (1 + op_norm(rhs)));
    }
    const TransitionEvaluator fd(make_builtin(BuiltinSystem::floquet_demo, Id, {{"alpha", 1.5}}), Id);
    const auto ref = moduli(monodromy({fd, 2.0}));
    for (double s : {0.2, 0.9, 1.7, 5.0, 11.0}) {
        Eigen::EigenSolver<Matrix> es(fd.transition(star(Id, s, 2.0), s));
        std::vector<double> r;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r.push_back(std::abs(es.eigenvalues()(i)));
        std::sort(r.begin(), r.end());
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(r[i] - ref[i]) <= 1e-7);
    }
}

TEST_CASE("periodicity residuals") {
    const TransitionEvaluator fd(make_builtin(BuiltinSystem::floquet_demo, Id), Id);
    const FloquetContext ctx{fd, 2.0};
    const auto m = monodromy(ctx);
    const auto grid = log_h_grid(Id, std::log(0.1), std::log(10.0), 15);
    const auto r = periodicity_residuals(ctx, m, grid, 3);
    CHECK(r.biperiodicity <= 1e-7);
    CHECK(r.power_identity <= 1e-7);
    CHECK(r.multiplier_solution <= 1e-7);
    REQUIRE(r.power_by_n.size() == 4);
    CHECK(r.power_by_n[0] == 0.0);
}

TEST_CASE("hyperbolicity decisions") {
    CHECK(hyperbolicity_decide(fake({0.5, 2.0})).verdict == Hyperbolicity::dichotomy);
    CHECK(hyperbolicity_decide(fake({1.0})).verdict == Hyperbolicity::no_dichotomy);
    const auto d = hyperbolicity_decide(fake({0.999}), 1e-2);
    CHECK(d.verdict == Hyperbolicity::no_dichotomy);
    CHECK(d.gap == doctest::Approx(1e-3));
    CHECK(hyperbolicity_decide(fake({1.0 + 5e-6})).verdict == Hyperbolicity::marginal);
    CHECK(hyperbolicity_decide(fake({Complex(0, 1.0)})).verdict == Hyperbolicity::no_dichotomy);

    const TransitionEvaluator zero(make_constant_system(Matrix::Zero(1, 1), Exp), Exp);
    const auto m = monodromy({zero, 1.0});
    CHECK(hyperbolicity_decide(m).verdict == Hyperbolicity::no_dichotomy);
    CHECK_FALSE(m.spectral_projector);
}

TEST_CASE("spectral projector") {
    CHECK(op_norm(spectral_projector(diag2(0.5, 2)).matrix() - diag2(1, 0)) < 1e-12);
    CHECK(op_norm(spectral_projector(diag2(0.5, 0.2)).matrix() - Matrix::Identity(2, 2)) < 1e-12);
    CHECK(op_norm(spectral_projector(diag2(3, 2)).matrix()) < 1e-12);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(0, 6.283185307179586);
    for (int k = 0; k < 10; ++k) {
        const double a = angle(rng);
        Matrix R(2, 2);
        R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        const Matrix V = R * diag2(0.5, 2) * R.transpose();
        const auto P = spectral_projector(V);
        CHECK(op_norm(P.matrix() - R * diag2(1, 0) * R.transpose()) < 1e-8);
        CHECK(op_norm(P.matrix() * V - V * P.matrix()) < 1e-8 * op_norm(V));
    }

    // Non-normal with a complex pair inside and a real multiplier outside.
    Matrix V(3, 3);
    V << 0.3, -0.4, 5.0, 0.4, 0.3, -2.0, 0.0, 0.0, 3.0;
    const auto P = spectral_projector(V);
    CHECK(P.idempotency_residual() < 1e-8);
    CHECK(P.rank() == 2);
    CHECK(op_norm(P.matrix() * V - V * P.matrix()) < 1e-8 * op_norm(V));

    CHECK_THROWS_AS(spectral_projector(diag2(1.0, 2.0)), NumericalError);
}

TEST_CASE("floquet constants") {
    const TransitionEvaluator fd(make_builtin(BuiltinSystem::floquet_demo, Id), Id);
    const FloquetContext ctx{fd, 2.0};
    const auto m = monodromy(ctx);
    const auto c = floquet_constants(ctx, m);
    CHECK(c.a == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(c.alpha_tilde == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(c.alpha_tilde * std::log(2.0) == doctest::Approx(c.a).epsilon(1e-15));
    CHECK(c.K1 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(c.K2 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(c.K == doctest::Approx(c.K0 * c.K1 * c.K2 * std::exp(c.a)));
    const auto grid = analysis_grid(Id, 1e-2, 1e2, 50, {});
    CHECK(verify_dichotomy(fd, *m.spectral_projector, grid, c.K, c.alpha_tilde).verdict == Verdict::holds);

    const TransitionEvaluator cs(make_constant_system(diag2(-1, 1), Exp), Exp);
    const FloquetContext cc{cs, 1.0};
    const auto cm = monodromy(cc);
    const auto k = floquet_constants(cc, cm);
    CHECK(k.alpha_tilde == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(verify_dichotomy(cs, *cm.spectral_projector, analysis_grid(Exp, 1e-2, 1e2, 50, {}), k.K, k.alpha_tilde)
              .verdict == Verdict::holds);

    const TransitionEvaluator zero(make_constant_system(Matrix::Zero(1, 1), Exp), Exp);
    const FloquetContext zc{zero, 1.0};
    CHECK_THROWS_AS(floquet_constants(zc, monodromy(zc), 20, 100), ArgumentError);
}

TEST_CASE("converse witness: x' = 0 has no dichotomy on widening grids") {
    const TransitionEvaluator zero(make_constant_system(Matrix::Zero(1, 1), Exp), Exp);
    const auto P0 = ConstantProjector::from_matrix(Matrix::Zero(1, 1));
    const auto P1 = ConstantProjector::from_matrix(Matrix::Identity(1, 1));
    for (double span : {1e1, 1e2, 1e3}) {
        const auto grid = analysis_grid(Exp, 1 / span, span, 10, {});
        for (double K : {1.0, 2.0, 10.0})
            for (double a : {0.5, 1.0}) {
                // Some spans are too short to break a large K; the widest always is.
                if (span == 1e3) {
                    CHECK(verify_dichotomy(zero, P0, grid, K, a).verdict == Verdict::violated);
                    CHECK(verify_dichotomy(zero, P1, grid, K, a).verdict == Verdict::violated);
                }
            }
    }
}

TEST_CASE("stability audits") {
    const auto dirs = sample_directions(1);
    const auto grid = log_h_grid(Id, std::log(0.05), std::log(20.0), 25);

    const TransitionEvaluator st(make_expression_system({{"-1/t"}}, Id), Id);
    const FloquetContext sc{st, 2.0};
    const auto sm = monodromy(sc);
    const auto s = stability_audit(sc, sm, floquet_constants(sc, sm), grid, dirs);
    CHECK(s.stable);
    CHECK(s.passed);

    const TransitionEvaluator un(make_expression_system({{"1/t"}}, Id), Id);
    const FloquetContext uc{un, 2.0};
    const auto um = monodromy(uc);
    const auto u = stability_audit(uc, um, floquet_constants(uc, um), grid, dirs);
    CHECK_FALSE(u.stable);
    CHECK(u.passed);

    const TransitionEvaluator fd(make_builtin(BuiltinSystem::floquet_demo, Id), Id);
    const FloquetContext fc{fd, 2.0};
    const auto fm = monodromy(fc);
    CHECK_THROWS_WITH_AS(stability_audit(fc, fm, floquet_constants(fc, fm), grid, sample_directions(2)),
                         doctest::Contains("inapplicable"), ArgumentError);
}

}
