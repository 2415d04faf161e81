#pragma once

// Shared Fisher discriminant solver (classifier and cross-fitted EMI projection).

#include <Eigen/Dense>
#include <span>

#include "rffcap/fingerprint.hpp"

namespace rffcap::detail {

struct FisherFit {
  Eigen::MatrixXd projection;   // M x k, columns scaled so v^T Sw v = 1
  Eigen::MatrixXd class_means;  // C x M, unprojected
  Eigen::MatrixXd sw;           // regularized within-class scatter
  double ridge = 0.0;
  int rank = 0;                 // numerical rank of the between-class scatter
};

/// `dense` holds labels in 0..n_classes-1; every class needs two or more rows.
/// At most max_dim directions are kept.
FisherFit fisher_fit(const FeatureMatrix& x, std::span<const int> dense, int n_classes,
                     int max_dim, double ridge_scale);

/// Ledoit-Wolf shrinkage of the pooled within-class covariance toward a scaled
/// identity, returned as a ridge_scale for fisher_fit (ridge = scale * trace(Sw) / M).
double ledoit_wolf_ridge_scale(const FeatureMatrix& x, std::span<const int> dense, int n_classes);

}  // namespace rffcap::detail
