#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rffcap/fingerprint.hpp"

namespace rffcap {

struct LdaModel {
  Eigen::MatrixXd projection;      // M x kappa_eff
  Eigen::MatrixXd class_means;     // C x kappa_eff, projected
  Eigen::MatrixXd pooled_cov_inv;  // kappa_eff x kappa_eff
  std::vector<int> class_ids;      // row r of class_means is class_ids[r]
  int kappa_eff = 0;
  double ridge = 0.0;  // absolute value added to the within-class scatter diagonal

  Eigen::VectorXd project(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

inline constexpr double kDefaultRidgeScale = 1e-6;

/// Fisher LDA. The within-class scatter gets `ridge_scale * trace(Sw) / M` on
/// its diagonal (total scatter is used when Sw vanishes). With ridge_scale = 0
/// a singular Sw is rejected.
LdaModel fit_lda(const FingerprintDataset& train, int kappa = 150,
                 double ridge_scale = kDefaultRidgeScale);

struct ClassificationReport {
  double pe = 0.0;
  std::size_t n_test = 0;
  std::size_t n_errors = 0;
  /// Union of model classes and test labels; indexes per_class_errors and confusion.
  std::vector<int> class_ids;
  std::vector<std::size_t> per_class_errors;
  std::vector<std::vector<std::size_t>> confusion;  // [true][assigned]
  std::vector<double> min_distance_scores;
  std::vector<int> assigned_ids;
  std::vector<int> true_ids;
  /// Number of test samples whose label never appeared in training.
  std::size_t unseen_label_samples = 0;
};

/// Nearest projected class mean under the pooled Mahalanobis metric. Ties
/// go to the smaller class id.
ClassificationReport classify(const LdaModel& model, const FingerprintDataset& test,
                              int threads = 1);

struct ClassifierConfig {
  int kappa = 150;
  double ridge_scale = kDefaultRidgeScale;
  int train_per_class = 200;
  int test_per_class = 200;
};

struct ExperimentOutcome {
  ClassificationReport report;
  FingerprintDataset train;
  int kappa_eff = 0;
};

/// Trains on the first n_classes profiles and tests on independent captures
/// of the same devices. Train and test seeds are derived from master_seed.
ExperimentOutcome error_rate_experiment(std::span<const DeviceProfile> profiles, int n_classes,
                                        const PipelineConfig& pipeline,
                                        const ClassifierConfig& classifier,
                                        std::uint64_t master_seed,
                                        bool shuffle_train_labels = false, int threads = 1);

}  // namespace rffcap
