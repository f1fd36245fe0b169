#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hdicho/growth_group.hpp"

namespace hdicho {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// x' = A(t) x on J = (lower_endpoint, +inf).
struct LinearSystem {
    int dim = 0;
    std::function<Matrix(double)> coefficient;
    double lower_endpoint = -std::numeric_limits<double>::infinity();
    /// Fundamental matrix normalized at e*, when known in closed form.
    std::function<Matrix(double)> closed_form_fundamental;
    /// Points where A(t) is only continuous; integration steps land on them.
    std::vector<double> breakpoints;
    std::string name;

    bool has_closed_form() const { return static_cast<bool>(closed_form_fundamental); }
    bool contains(double t) const { return std::isfinite(t) && t > lower_endpoint; }
};

enum class BuiltinSystem { h_diagonal, counterexample, floquet_demo };

using ParameterMap = std::map<std::string, double>;

BuiltinSystem parse_builtin_system(const std::string& name);
std::string to_string(BuiltinSystem kind);

/// Builds one of the reference systems. Parameters: "alpha" (h_diagonal,
/// floquet_demo; default 1) and "ell" (counterexample; default 0.5).
LinearSystem make_builtin(BuiltinSystem kind, const GrowthRated& g, const ParameterMap& params = {});

/// x' = A x with constant A; closed form is the matrix exponential about e*.
LinearSystem make_constant_system(const Matrix& A, const GrowthRated& g);

/// Square matrix of expressions in t.
LinearSystem make_expression_system(const std::vector<std::vector<std::string>>& entries,
                                    const GrowthRated& g);

/// Coefficient of the scalar counterexample equation x' = a(t) x.
double counterexample_coefficient(double t, double ell);

}  // namespace hdicho
