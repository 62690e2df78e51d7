#pragma once

#include <Eigen/Dense>

namespace conjlab {

/// Factor F with F F^T = cov for a symmetric positive semi-definite matrix,
/// via pivoted LDL^T. Pivots below -tol * max pivot raise CovarianceNotPsdError;
/// the remaining small negatives are clipped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double tol = 1e-10);

} // namespace conjlab
