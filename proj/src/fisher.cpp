#include "fisher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rffcap::detail {

FisherFit fisher_fit(const FeatureMatrix& x, std::span<const int> dense, int n_classes,
                     int max_dim, double ridge_scale) {
  const auto n = x.rows();
  const auto m = x.cols();
  FisherFit fit;

  fit.class_means = Eigen::MatrixXd::Zero(n_classes, m);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
  for (Eigen::Index r = 0; r < n; ++r) {
    fit.class_means.row(dense[static_cast<std::size_t>(r)]) += x.row(r);
    counts[dense[static_cast<std::size_t>(r)]] += 1.0;
  }
  for (int c = 0; c < n_classes; ++c) fit.class_means.row(c) /= counts[c];
  const Eigen::RowVectorXd grand = x.colwise().mean();

  Eigen::MatrixXd deviations(n, m);
  for (Eigen::Index r = 0; r < n; ++r)
    deviations.row(r) = x.row(r) - fit.class_means.row(dense[static_cast<std::size_t>(r)]);
  fit.sw = Eigen::MatrixXd::Zero(m, m);
  fit.sw.selfadjointView<Eigen::Lower>().rankUpdate(deviations.transpose());
  fit.sw = fit.sw.selfadjointView<Eigen::Lower>();

  // Between-class scatter factor: Sb = B * B^T.
  Eigen::MatrixXd between(m, n_classes);
  for (int c = 0; c < n_classes; ++c)
    between.col(c) = std::sqrt(counts[c]) * (fit.class_means.row(c) - grand).transpose();

  double scale = fit.sw.trace();
  if (!(scale > 0.0)) scale = between.squaredNorm();  // trace of the total scatter
  fit.ridge = ridge_scale * scale / static_cast<double>(m);
  fit.sw.diagonal().array() += fit.ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(fit.sw);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12))
    throw std::invalid_argument(
        "Fisher LDA: within-class scatter is singular; use a positive ridge_scale");

  // Nonzero generalized eigenpairs of (Sb, Sw) through the C x C matrix B^T Sw^-1 B:
  // if G u = l u then v = Sw^-1 B u solves Sb v = l Sw v, with v^T Sw v = l.
  const Eigen::MatrixXd sw_inv_b = llt.solve(between);
  const Eigen::MatrixXd reduced = between.transpose() * sw_inv_b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  const auto& values = eig.eigenvalues();
  const double top = values[values.size() - 1];
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (top > 0.0 && values[k] > 1e-10 * top) ++fit.rank;

  const int keep = std::min({max_dim, n_classes - 1, fit.rank});
  fit.projection.resize(m, keep);
  for (int k = 0; k < keep; ++k) {
    const Eigen::Index idx = values.size() - 1 - k;
    fit.projection.col(k) = sw_inv_b * eig.eigenvectors().col(idx) / std::sqrt(values[idx]);
  }
  return fit;
}

double ledoit_wolf_ridge_scale(const FeatureMatrix& x, std::span<const int> dense, int n_classes) {
  const auto n = x.rows();
  const auto m = x.cols();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n_classes, m);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
  for (Eigen::Index r = 0; r < n; ++r) {
    means.row(dense[static_cast<std::size_t>(r)]) += x.row(r);
    counts[dense[static_cast<std::size_t>(r)]] += 1.0;
  }
  for (int c = 0; c < n_classes; ++c) means.row(c) /= counts[c];
  Eigen::MatrixXd dev(n, m);
  for (Eigen::Index r = 0; r < n; ++r)
    dev.row(r) = x.row(r) - means.row(dense[static_cast<std::size_t>(r)]);

  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd s = dev.transpose() * dev / nd;
  const double mu = s.trace() / static_cast<double>(m);
  if (!(mu > 0.0)) return 0.0;
  const double delta2 = (s - mu * Eigen::MatrixXd::Identity(m, m)).squaredNorm();
  if (!(delta2 > 0.0)) return 0.0;

  // sum_k ||x_k x_k^T - S||_F^2 = sum_k (|x_k|^4 - 2 x_k^T S x_k) + n ||S||_F^2
  const Eigen::VectorXd sq = dev.rowwise().squaredNorm();
  const Eigen::VectorXd quad = ((dev * s).array() * dev.array()).rowwise().sum();
  const double spread = (sq.array().square() - 2.0 * quad.array()).sum() + nd * s.squaredNorm();
  const double beta2 = std::min(spread / (nd * nd), delta2);
  const double shrink = beta2 / delta2;
  if (shrink >= 1.0) return 1e12;  // pure identity target
  return shrink / (1.0 - shrink);
}

}  // namespace rffcap::detail
