#include "rffcap/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fisher.hpp"
#include "rffcap/common.hpp"

namespace rffcap {

Eigen::VectorXd LdaModel::project(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return (x * projection).transpose();
}

LdaModel fit_lda(const FingerprintDataset& train, int kappa, double ridge_scale) {
  train.validate();
  if (kappa < 1) throw std::invalid_argument("kappa must be at least 1");
  if (ridge_scale < 0.0) throw std::invalid_argument("ridge_scale must be non-negative");
  const auto classes = train.classes();
  const int n_classes = static_cast<int>(classes.size());
  if (n_classes < 3) throw std::invalid_argument("fit_lda needs at least 3 classes");
  const auto dense = train.dense_labels();
  std::vector<int> counts(classes.size(), 0);
  for (int y : dense) ++counts[static_cast<std::size_t>(y)];
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (counts[c] < 2)
      throw std::invalid_argument("fit_lda: class " + std::to_string(classes[c]) +
                                  " has fewer than 2 samples");

  const auto fit = detail::fisher_fit(train.features, dense, n_classes, kappa, ridge_scale);
  LdaModel model;
  model.ridge = fit.ridge;
  model.class_ids = classes;
  model.kappa_eff = static_cast<int>(fit.projection.cols());
  model.projection = fit.projection;
  model.class_means = fit.class_means * model.projection;

  const double dof = static_cast<double>(std::max<std::size_t>(train.rows() - classes.size(), 1));
  const Eigen::MatrixXd pooled = model.projection.transpose() * fit.sw * model.projection / dof;
  model.pooled_cov_inv =
      pooled.ldlt().solve(Eigen::MatrixXd::Identity(model.kappa_eff, model.kappa_eff));
  return model;
}

ClassificationReport classify(const LdaModel& model, const FingerprintDataset& test, int threads) {
  test.validate();
  if (test.features.cols() != model.projection.rows())
    throw std::invalid_argument("classify: test feature length does not match the model");

  const std::size_t n = test.rows();
  ClassificationReport rep;
  rep.n_test = n;
  rep.min_distance_scores.resize(n);
  rep.assigned_ids.resize(n);
  rep.true_ids = test.labels;

  const auto n_model = static_cast<Eigen::Index>(model.class_ids.size());
  parallel_for(n, threads, [&](std::size_t r) {
    const Eigen::VectorXd z = model.project(test.features.row(static_cast<Eigen::Index>(r)));
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_c = 0;
    for (Eigen::Index c = 0; c < n_model; ++c) {
      const Eigen::VectorXd diff = z - model.class_means.row(c).transpose();
      const double d2 = diff.dot(model.pooled_cov_inv * diff);
      if (d2 < best) {
        best = d2;
        best_c = c;
      }
    }
    rep.min_distance_scores[r] = std::sqrt(std::max(best, 0.0));
    rep.assigned_ids[r] = model.class_ids[static_cast<std::size_t>(best_c)];
  });

  rep.class_ids = model.class_ids;
  rep.class_ids.insert(rep.class_ids.end(), test.labels.begin(), test.labels.end());
  std::sort(rep.class_ids.begin(), rep.class_ids.end());
  rep.class_ids.erase(std::unique(rep.class_ids.begin(), rep.class_ids.end()), rep.class_ids.end());
  const std::size_t k = rep.class_ids.size();
  auto index_of = [&](int id) {
    return static_cast<std::size_t>(
        std::lower_bound(rep.class_ids.begin(), rep.class_ids.end(), id) - rep.class_ids.begin());
  };

  rep.per_class_errors.assign(k, 0);
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t r = 0; r < n; ++r) {
    const int truth = test.labels[r];
    if (!std::binary_search(model.class_ids.begin(), model.class_ids.end(), truth))
      ++rep.unseen_label_samples;
    const std::size_t ti = index_of(truth);
    ++rep.confusion[ti][index_of(rep.assigned_ids[r])];
    if (rep.assigned_ids[r] != truth) {
      ++rep.per_class_errors[ti];
      ++rep.n_errors;
    }
  }
  rep.pe = n ? static_cast<double>(rep.n_errors) / static_cast<double>(n) : 0.0;
  return rep;
}

ExperimentOutcome error_rate_experiment(std::span<const DeviceProfile> profiles, int n_classes,
                                        const PipelineConfig& pipeline,
                                        const ClassifierConfig& classifier,
                                        std::uint64_t master_seed, bool shuffle_train_labels,
                                        int threads) {
  if (n_classes < 3) throw std::invalid_argument("error_rate_experiment needs n_classes >= 3");
  if (profiles.size() < static_cast<std::size_t>(n_classes))
    throw std::invalid_argument("error_rate_experiment: population smaller than n_classes");
  const auto chosen = profiles.first(static_cast<std::size_t>(n_classes));

  ExperimentOutcome out;
  out.train = build_dataset(chosen, classifier.train_per_class, pipeline,
                            derive_seed(master_seed, 0x747261696eULL), threads);
  const FingerprintDataset test = build_dataset(chosen, classifier.test_per_class, pipeline,
                                                derive_seed(master_seed, 0x74657374ULL), threads);
  if (shuffle_train_labels) {
    std::mt19937_64 rng(derive_seed(master_seed, 0x73687566ULL));
    std::shuffle(out.train.labels.begin(), out.train.labels.end(), rng);
  }
  const LdaModel model = fit_lda(out.train, classifier.kappa, classifier.ridge_scale);
  out.kappa_eff = model.kappa_eff;
  out.report = classify(model, test, threads);
  return out;
}

}  // namespace rffcap
