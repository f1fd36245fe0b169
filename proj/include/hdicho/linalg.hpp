#pragma once

#include <Eigen/Dense>

#include "hdicho/linear_system.hpp"

namespace hdicho {

/// Operator norm induced by the Euclidean vector norm.
double op_norm(const Matrix& m);

struct RankInfo {
    int rank = 0;
    bool ambiguous = false;      // a singular value sits near the threshold
    double nearest_ratio = 0;    // closest singular value to the threshold, as sigma/tol
};

RankInfo numerical_rank(const Matrix& m, double tol = 1e-8);

/// Orthonormal basis (columns) of the range of m at rank tolerance tol.
Matrix range_basis(const Matrix& m, double tol = 1e-8);

/// Orthonormal basis (columns) of the kernel of m at rank tolerance tol.
Matrix kernel_basis(const Matrix& m, double tol = 1e-8);

/// Orthonormal basis of the orthogonal complement of span(basis) in R^n.
Matrix orthogonal_complement(const Matrix& basis, int n);

/// Sine of the largest principal angle by which span(sub) leaves span(super);
/// zero iff span(sub) is contained in span(super).
double containment_gap(const Matrix& sub, const Matrix& super);

/// Oblique projector with the given range along the given kernel. The two
/// spans must be complementary.
Matrix oblique_projector(const Matrix& range, const Matrix& kernel);

}  // namespace hdicho
