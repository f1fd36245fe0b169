#include "hdicho/linear_system.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "hdicho/expression.hpp"

namespace hdicho {

namespace {

double param(const ParameterMap& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

// Bridge on [1-ell, 1+ell]: the linear interpolant between 1/(1-ell) and -1/(1+ell).
double bridge(double t, double ell) {
    const double left = 1.0 / (1.0 - ell);
    const double right = -1.0 / (1.0 + ell);
    return left + (t - (1.0 - ell)) * (right - left) / (2.0 * ell);
}

// Integral of a(t) from 1-ell to t.
double counterexample_primitive(double t, double ell) {
    const double lo = 1.0 - ell;
    const double hi = 1.0 + ell;
    const double left = 1.0 / lo;
    const double slope = (-1.0 / hi - left) / (2.0 * ell);
    auto bridge_integral = [&](double u) {
        const double d = u - lo;
        return left * d + 0.5 * slope * d * d;
    };
    if (t <= lo) return std::log(t / lo);
    if (t < hi) return bridge_integral(t);
    return bridge_integral(hi) - std::log(t / hi);
}

}  // namespace

double counterexample_coefficient(double t, double ell) {
    if (t <= 1.0 - ell) return 1.0 / t;
    if (t < 1.0 + ell) return bridge(t, ell);
    return -1.0 / t;
}

BuiltinSystem parse_builtin_system(const std::string& name) {
    if (name == "h_diagonal") return BuiltinSystem::h_diagonal;
    if (name == "counterexample") return BuiltinSystem::counterexample;
    if (name == "floquet_demo") return BuiltinSystem::floquet_demo;
    throw ArgumentError("unknown builtin system '" + name + "'");
}

std::string to_string(BuiltinSystem kind) {
    switch (kind) {
        case BuiltinSystem::h_diagonal: return "h_diagonal";
        case BuiltinSystem::counterexample: return "counterexample";
        case BuiltinSystem::floquet_demo: return "floquet_demo";
    }
    return "unknown";
}

LinearSystem make_builtin(BuiltinSystem kind, const GrowthRated& g, const ParameterMap& params) {
    LinearSystem sys;
    sys.lower_endpoint = g.lower_endpoint;
    sys.name = to_string(kind);

    switch (kind) {
        case BuiltinSystem::h_diagonal:
        case BuiltinSystem::floquet_demo: {
            if (!g.differentiable())
                throw ArgumentError(sys.name + " requires a differentiable growth rate");
            const double alpha = param(params, "alpha", 1.0);
            if (!(alpha > 0)) throw ArgumentError(sys.name + " requires alpha > 0");
            sys.dim = 2;
            if (kind == BuiltinSystem::floquet_demo) {
                if (g.lower_endpoint != 0)
                    throw ArgumentError("floquet_demo lives on J = (0, +inf); growth rate " +
                                        g.name + " has a different domain");
                sys.coefficient = [alpha](double t) {
                    Matrix A = Matrix::Zero(2, 2);
                    A(0, 0) = -alpha / t;
                    A(1, 1) = alpha / t;
                    return A;
                };
                sys.closed_form_fundamental = [alpha](double t) {
                    Matrix F = Matrix::Zero(2, 2);
                    F(0, 0) = std::pow(t, -alpha);
                    F(1, 1) = std::pow(t, alpha);
                    return F;
                };
            } else {
                sys.coefficient = [g, alpha](double t) {
                    const double rate = alpha * g.log_derivative(t);
                    Matrix A = Matrix::Zero(2, 2);
                    A(0, 0) = -rate;
                    A(1, 1) = rate;
                    return A;
                };
                sys.closed_form_fundamental = [g, alpha](double t) {
                    const double y = alpha * g.log_forward(t);
                    Matrix F = Matrix::Zero(2, 2);
                    F(0, 0) = std::exp(-y);
                    F(1, 1) = std::exp(y);
                    return F;
                };
            }
            break;
        }
        case BuiltinSystem::counterexample: {
            if (g.name != "identity")
                throw ArgumentError("counterexample requires the identity growth rate h(t) = t");
            const double ell = param(params, "ell", 0.5);
            if (!(ell > 0 && ell < 1)) throw ArgumentError("counterexample requires ell in (0, 1)");
            sys.dim = 1;
            sys.coefficient = [ell](double t) {
                return Matrix::Constant(1, 1, counterexample_coefficient(t, ell));
            };
            // Normalized at e* = 1.
            const double at_identity = counterexample_primitive(1.0, ell);
            sys.closed_form_fundamental = [ell, at_identity](double t) {
                return Matrix::Constant(1, 1,
                                        std::exp(counterexample_primitive(t, ell) - at_identity));
            };
            sys.breakpoints = {1.0 - ell, 1.0 + ell};
            break;
        }
    }
    return sys;
}

LinearSystem make_constant_system(const Matrix& A, const GrowthRated& g) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw ArgumentError("constant system needs a non-empty square matrix");
    LinearSystem sys;
    sys.dim = static_cast<int>(A.rows());
    sys.lower_endpoint = g.lower_endpoint;
    sys.coefficient = [A](double) { return A; };
    const double anchor = identity_element(g);
    sys.closed_form_fundamental = [A, anchor](double t) {
        return Matrix((A * (t - anchor)).exp());
    };
    sys.name = "constant";
    return sys;
}

LinearSystem make_expression_system(const std::vector<std::vector<std::string>>& entries,
                                    const GrowthRated& g) {
    const std::size_t n = entries.size();
    if (n == 0) throw ConfigError("expression system needs at least one row");
    std::vector<Expression> parsed;
    parsed.reserve(n * n);
    for (const auto& row : entries) {
        if (row.size() != n) throw ConfigError("expression system matrix must be square");
        for (const auto& cell : row) parsed.push_back(Expression::parse(cell));
    }
    LinearSystem sys;
    sys.dim = static_cast<int>(n);
    sys.lower_endpoint = g.lower_endpoint;
    sys.coefficient = [parsed, n](double t) {
        Matrix A(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) A(i, j) = parsed[i * n + j](t);
        return A;
    };
    sys.name = "expression";
    return sys;
}

}  // namespace hdicho
