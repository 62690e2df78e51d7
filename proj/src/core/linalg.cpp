#include "conjlab/core/linalg.hpp"

#include "conjlab/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace conjlab {

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double tol) {
    if (cov.rows() != cov.cols()) throw ShapeError("psd_factor: matrix is not square");
    const Eigen::Index m = cov.rows();
    if (m == 0) return Eigen::MatrixXd(0, 0);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success) throw CovarianceNotPsdError("LDL^T factorization failed");

    Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = std::max(d.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (d(i) < -tol * std::max(dmax, 1.0))
            throw CovarianceNotPsdError("covariance matrix has a negative pivot " + std::to_string(d(i)));
        d(i) = std::sqrt(std::max(d(i), 0.0));
    }
    Eigen::MatrixXd l = ldlt.matrixL();
    Eigen::MatrixXd f = l * d.asDiagonal();
    // cov = P^T L D L^T P
    return ldlt.transpositionsP().transpose() * f;
}

} // namespace conjlab
