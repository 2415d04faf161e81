#include "rffcap/infotheory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fisher.hpp"
#include "rffcap/common.hpp"

namespace rffcap {

namespace {


constexpr double kTiny = 1e-300;

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

std::vector<std::size_t> class_counts(std::span<const int> dense, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : dense) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

}  // namespace

double entropy_discrete(std::span<const double> probabilities) {
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  double h = 0.0;
  for (double p : probabilities) h += plogp(p);
  return h;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0, 1]");
  return plogp(p) + plogp(1.0 - p);
}

MiReport per_feature_mi(const FingerprintDataset& dataset, int bins) {
  dataset.validate();
  if (bins < 2) throw std::invalid_argument("per_feature_mi needs at least 2 bins");
  const auto classes = dataset.classes();
  if (classes.size() < 2) throw std::invalid_argument("per_feature_mi needs at least 2 classes");

  const auto dense = dataset.dense_labels();
  const int n_classes = static_cast<int>(classes.size());
  const auto counts = class_counts(dense, n_classes);
  const auto n = static_cast<double>(dataset.rows());
  const auto nb = static_cast<std::size_t>(bins);

  MiReport report;
  report.bins = bins;
  report.n_classes = n_classes;
  report.per_bin_mi.assign(dataset.cols(), 0.0);
  report.h_x.assign(dataset.cols(), 0.0);

  std::vector<double> joint(nb * counts.size());
  std::vector<double> marginal(nb);
  for (Eigen::Index m = 0; m < dataset.features.cols(); ++m) {
    const auto col = dataset.features.col(m);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (!(hi > lo)) continue;  // constant member carries no information

    std::fill(joint.begin(), joint.end(), 0.0);
    std::fill(marginal.begin(), marginal.end(), 0.0);
    const double width = (hi - lo) / bins;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      auto b = static_cast<std::size_t>((col[r] - lo) / width);
      b = std::min(b, nb - 1);
      joint[b * counts.size() + static_cast<std::size_t>(dense[static_cast<std::size_t>(r)])] += 1.0;
      marginal[b] += 1.0;
    }

    double h_x = 0.0;
    for (double c : marginal) h_x += plogp(c / n);
    double h_x_given_y = 0.0;
    for (std::size_t y = 0; y < counts.size(); ++y) {
      const auto ny = static_cast<double>(counts[y]);
      double h = 0.0;
      for (std::size_t b = 0; b < nb; ++b) h += plogp(joint[b * counts.size() + y] / ny);
      h_x_given_y += ny / n * h;
    }
    const auto idx = static_cast<std::size_t>(m);
    report.h_x[idx] = h_x;
    report.per_bin_mi[idx] = std::max(0.0, h_x - h_x_given_y);
  }
  return report;
}

namespace {

// Principal-component scores of the centered rows, at most max_dim columns;
// directions with negligible variance are dropped.
Eigen::MatrixXd pca_scores(const FeatureMatrix& features, int max_dim) {
  const auto n = features.rows();
  const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
  const bool use_gram = n < centered.cols();
  const Eigen::MatrixXd scatter = use_gram ? Eigen::MatrixXd(centered * centered.transpose())
                                           : Eigen::MatrixXd(centered.transpose() * centered);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  const auto& values = eig.eigenvalues();  // ascending
  const double top = values.size() > 0 ? values[values.size() - 1] : 0.0;
  int keep = 0;
  for (Eigen::Index k = values.size() - 1; k >= 0 && keep < max_dim; --k) {
    if (!(top > 0.0) || !(values[k] > 1e-12 * top)) break;
    ++keep;
  }
  if (keep == 0) return Eigen::MatrixXd(n, 0);
  const Eigen::MatrixXd vecs = eig.eigenvectors().rightCols(keep).rowwise().reverse();
  if (!use_gram) return centered * vecs;
  // Gram route: scores are u_k * sqrt(lambda_k).
  const Eigen::VectorXd sv = values.tail(keep).reverse().cwiseSqrt();
  return vecs * sv.asDiagonal();
}

void check_classes(std::span<const std::size_t> counts, std::span<const int> classes,
                   std::size_t min_count, const char* what) {
  for (std::size_t y = 0; y < counts.size(); ++y)
    if (counts[y] < min_count)
      throw std::invalid_argument(std::string("emi_kde: class ") + std::to_string(classes[y]) +
                                  what);
}

// Per-column within-class standard deviation; constant columns get 1.
Eigen::RowVectorXd within_sd(const FeatureMatrix& x, std::span<const int> dense, int n_classes) {
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n_classes, x.cols());
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    means.row(dense[static_cast<std::size_t>(r)]) += x.row(r);
    counts[static_cast<std::size_t>(dense[static_cast<std::size_t>(r)])] += 1.0;
  }
  for (int c = 0; c < n_classes; ++c) means.row(c) /= counts[static_cast<std::size_t>(c)];
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    var += (x.row(r) - means.row(dense[static_cast<std::size_t>(r)])).cwiseAbs2();
  Eigen::RowVectorXd sd = (var / static_cast<double>(x.rows())).cwiseSqrt();
  for (Eigen::Index k = 0; k < sd.size(); ++k)
    if (!(sd[k] > 0.0)) sd[k] = 1.0;
  return sd;
}

}  // namespace

EmiEstimate kde_mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   std::span<const int> labels, int threads) {
  if (static_cast<std::size_t>(points.rows()) != labels.size())
    throw std::invalid_argument("kde_mutual_information: point and label counts differ");
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw std::invalid_argument("emi_kde needs at least 2 classes");
  const int n_classes = static_cast<int>(classes.size());
  std::vector<int> dense(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    dense[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) -
                                classes.begin());
  const auto counts = class_counts(dense, n_classes);
  check_classes(counts, classes, 2, " has fewer than 2 samples");

  const auto n = points.rows();
  const auto d = static_cast<int>(points.cols());
  EmiEstimate est;
  est.n_samples = static_cast<std::size_t>(n);
  est.n_classes = n_classes;
  est.projected_dim = d;
  if (d == 0) return est;

  // Silverman bandwidths from the pooled within-class spread.
  Eigen::MatrixXd class_means = Eigen::MatrixXd::Zero(n_classes, d);
  for (Eigen::Index r = 0; r < n; ++r) class_means.row(dense[static_cast<std::size_t>(r)]) += points.row(r);
  for (int y = 0; y < n_classes; ++y)
    class_means.row(y) /= static_cast<double>(counts[static_cast<std::size_t>(y)]);
  Eigen::VectorXd within = Eigen::VectorXd::Zero(d);
  for (Eigen::Index r = 0; r < n; ++r)
    within += (points.row(r) - class_means.row(dense[static_cast<std::size_t>(r)]))
                  .cwiseAbs2()
                  .transpose();
  within /= static_cast<double>(std::max<Eigen::Index>(n - n_classes, 1));
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::VectorXd total =
      (points.rowwise() - mean).colwise().squaredNorm().transpose() / static_cast<double>(n - 1);

  const double n_eff = static_cast<double>(n) / n_classes;
  const double factor = std::pow(4.0 / ((d + 2.0) * n_eff), 1.0 / (d + 4.0));
  est.bandwidths.resize(static_cast<std::size_t>(d));
  FeatureMatrix scaled(n, d);
  for (int k = 0; k < d; ++k) {
    double spread = std::max(std::sqrt(within[k]), 1e-3 * std::sqrt(total[k]));
    if (!(spread > 0.0)) spread = 1.0;  // constant direction: every kernel value is 1
    const double h = factor * spread;
    est.bandwidths[static_cast<std::size_t>(k)] = h;
    scaled.col(k) = points.col(k) / h;
  }

  // Leave-one-out kernel sums; the i = j term is excluded from both averages.
  std::vector<double> terms(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t j) {
    const int yj = dense[j];
    const double* xj = scaled.row(static_cast<Eigen::Index>(j)).data();
    double sum_all = 0.0;
    double sum_class = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(i) == j) continue;
      const double* xi = scaled.row(i).data();
      double d2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = xj[k] - xi[k];
        d2 += diff * diff;
      }
      const double kv = std::exp(-0.5 * d2);
      sum_all += kv;
      if (dense[static_cast<std::size_t>(i)] == yj) sum_class += kv;
    }
    const double ny = static_cast<double>(counts[static_cast<std::size_t>(yj)]) - 1.0;
    const double all = static_cast<double>(n) - 1.0;
    // A point with no neighbour inside kernel reach contributes nothing.
    terms[j] = sum_all > 0.0 ? std::log2((std::max(sum_class, kTiny) / ny) / (sum_all / all)) : 0.0;
  });

  double acc = 0.0;
  for (double t : terms) acc += t;
  est.emi_bits_raw = acc / static_cast<double>(n);
  est.emi_bits = std::clamp(est.emi_bits_raw, 0.0, std::log2(static_cast<double>(n_classes)));
  return est;
}

EmiEstimate emi_kde(const FingerprintDataset& dataset, int projected_dim, int threads,
                    EmiProjection projection) {
  dataset.validate();
  if (projected_dim < 1 || projected_dim > 20)
    throw std::invalid_argument("projected_dim must lie in [1, 20]");
  const auto classes = dataset.classes();
  if (classes.size() < 2) throw std::invalid_argument("emi_kde needs at least 2 classes");
  const int n_classes = static_cast<int>(classes.size());
  const auto dense = dataset.dense_labels();
  const auto counts = class_counts(dense, n_classes);
  check_classes(counts, classes, 2, " has fewer than 2 samples");

  if (projection == EmiProjection::Pca || dataset.features.cols() <= projected_dim) {
    const Eigen::MatrixXd scores =
        projection == EmiProjection::Pca ? pca_scores(dataset.features, projected_dim)
                                         : Eigen::MatrixXd(dataset.features);
    check_classes(counts, classes, static_cast<std::size_t>(10 * scores.cols()),
                  " needs at least 10 x projected_dim samples");
    return kde_mutual_information(scores, dataset.labels, threads);
  }

  const int dim = std::min(projected_dim, n_classes - 1);
  check_classes(counts, classes, static_cast<std::size_t>(std::max(10 * dim, 4)),
                " needs at least 10 x projected_dim samples");

  // Two folds by alternating occurrence within each class; each fold is scored
  // with the Fisher directions fitted on the other.
  std::array<std::vector<Eigen::Index>, 2> fold_rows;
  std::vector<int> seen(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t r = 0; r < dense.size(); ++r)
    fold_rows[static_cast<std::size_t>(seen[static_cast<std::size_t>(dense[r])]++ % 2)]
        .push_back(static_cast<Eigen::Index>(r));

  auto take = [&](const std::vector<Eigen::Index>& rows, FeatureMatrix& x, std::vector<int>& y,
                  std::vector<int>& raw) {
    x.resize(static_cast<Eigen::Index>(rows.size()), dataset.features.cols());
    y.resize(rows.size());
    raw.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = dataset.features.row(rows[i]);
      y[i] = dense[static_cast<std::size_t>(rows[i])];
      raw[i] = dataset.labels[static_cast<std::size_t>(rows[i])];
    }
  };
  std::array<FeatureMatrix, 2> xs;
  std::array<std::vector<int>, 2> ys, raws;
  for (std::size_t f = 0; f < 2; ++f) take(fold_rows[f], xs[f], ys[f], raws[f]);

  EmiEstimate out;
  out.n_samples = dataset.rows();
  out.n_classes = n_classes;
  out.bandwidths.assign(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t f = 0; f < 2; ++f) {
    // Columns scaled to unit within-class spread so the shrinkage target is the diagonal.
    const Eigen::RowVectorXd inv_sd = within_sd(xs[1 - f], ys[1 - f], n_classes).cwiseInverse();
    const FeatureMatrix train = xs[1 - f].array().rowwise() * inv_sd.array();
    const double ridge = detail::ledoit_wolf_ridge_scale(train, ys[1 - f], n_classes);
    const auto fit = detail::fisher_fit(train, ys[1 - f], n_classes, dim, ridge);
    const Eigen::MatrixXd z = (xs[f].array().rowwise() * inv_sd.array()).matrix() * fit.projection;
    const EmiEstimate half = kde_mutual_information(z, raws[f], threads);
    out.emi_bits_raw += 0.5 * half.emi_bits_raw;
    out.projected_dim = std::max(out.projected_dim, half.projected_dim);
    for (std::size_t k = 0; k < half.bandwidths.size(); ++k)
      out.bandwidths[k] += 0.5 * half.bandwidths[k];
  }
  out.bandwidths.resize(static_cast<std::size_t>(out.projected_dim));
  out.emi_bits = std::clamp(out.emi_bits_raw, 0.0, std::log2(static_cast<double>(n_classes)));
  return out;
}

}  // namespace rffcap
