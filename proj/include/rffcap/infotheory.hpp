#pragma once

#include <span>
#include <vector>

#include "rffcap/fingerprint.hpp"

namespace rffcap {

// All entropies and informations are in bits.

/// -sum p log2 p with 0 log 0 = 0. Rejects negative entries or a sum off 1 by more than 1e-9.
double entropy_discrete(std::span<const double> probabilities);

double binary_entropy(double p);

struct MiReport {
  std::vector<double> per_bin_mi;
  std::vector<double> h_x;
  int bins = 0;
  int n_classes = 0;
};

/// Plug-in histogram estimate of I(X_m; Y) for every feature column m.
/// Each column is binned into `bins` equal-width cells over its pooled range.
MiReport per_feature_mi(const FingerprintDataset& dataset, int bins = 64);

struct EmiEstimate {
  double emi_bits = 0.0;  // clamped to [0, log2 C]
  double emi_bits_raw = 0.0;
  int projected_dim = 0;
  std::vector<double> bandwidths;
  std::size_t n_samples = 0;
  int n_classes = 0;
};

/// Leave-one-out KDE estimate of I(X; Y) for low-dimensional points, one row per sample.
///
/// Product Gaussian kernel; Silverman bandwidths come from the pooled
/// within-class spread with N/C as the sample count, floored at 1e-3 of the
/// total spread. The sample j is excluded from its own kernel sums:
///
///   I ~= (1/N) sum_j log2[ mean_{i in y(j), i != j} K(x_j - x_i) / mean_{i != j} K(x_j - x_i) ].
///
/// Each j term sums over i in a fixed order, so results are identical for any `threads`.
EmiEstimate kde_mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   std::span<const int> labels, int threads = 1);

enum class EmiProjection {
  /// Leading principal directions of the centered features.
  Pca,
  /// Fisher directions fitted on one half of each class and applied to the
  /// other half, both ways; the two estimates are averaged. At most C - 1 dims.
  CrossFitFisher,
};

/// Ensemble MI between the full feature vector and the label: the features are
/// reduced to at most `projected_dim` dimensions and passed to
/// kde_mutual_information. Each class needs 10 x dim samples.
EmiEstimate emi_kde(const FingerprintDataset& dataset, int projected_dim = 10, int threads = 1,
                    EmiProjection projection = EmiProjection::CrossFitFisher);

}  // namespace rffcap
