#include "hdicho/linalg.hpp"

#include <cmath>

#include "hdicho/errors.hpp"

namespace hdicho {

double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    if (m.rows() == 2 && m.cols() == 2) {
        const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        const double fro = a * a + b * b + c * c + d * d;
        const double det = a * d - b * c;
        const double disc = std::max(0.0, fro * fro - 4 * det * det);
        return std::sqrt(0.5 * (fro + std::sqrt(disc)));
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

RankInfo numerical_rank(const Matrix& m, double tol) {
    RankInfo info;
    if (m.size() == 0) return info;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol) ++info.rank;
        const double ratio = sv(i) / tol;
        if (std::abs(std::log(std::max(ratio, 1e-300))) < std::abs(std::log(std::max(nearest, 1e-300))))
            nearest = ratio;
        if (ratio > 1e-2 && ratio < 1e2) info.ambiguous = true;
    }
    info.nearest_ratio = nearest;
    return info;
}

Matrix range_basis(const Matrix& m, double tol) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return svd.matrixU().leftCols(r);
}

Matrix kernel_basis(const Matrix& m, double tol) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return svd.matrixV().rightCols(m.cols() - r);
}

Matrix orthogonal_complement(const Matrix& basis, int n) {
    if (basis.cols() == 0) return Matrix::Identity(n, n);
    if (basis.cols() >= n) return Matrix(n, 0);
    return kernel_basis(basis.transpose());
}

double containment_gap(const Matrix& sub, const Matrix& super) {
    if (sub.cols() == 0) return 0;
    if (super.cols() == 0) return 1;
    const Matrix residual = sub - super * (super.transpose() * sub);
    return std::min(1.0, op_norm(residual));
}

Matrix oblique_projector(const Matrix& range, const Matrix& kernel) {
    const Eigen::Index n = range.rows();
    if (range.cols() + kernel.cols() != n)
        throw ArgumentError("range and kernel dimensions must add up to n");
    if (range.cols() == 0) return Matrix::Zero(n, n);
    if (kernel.cols() == 0) return Matrix::Identity(n, n);
    Matrix basis(n, n);
    basis << range, kernel;
    Eigen::FullPivLU<Matrix> lu(basis);
    if (!lu.isInvertible()) throw ArgumentError("range and kernel are not complementary");
    Matrix selector = Matrix::Zero(n, n);
    selector.topLeftCorner(range.cols(), range.cols()).setIdentity();
    return basis * selector * lu.inverse();
}

}  // namespace hdicho
