#pragma once

#include <span>
#include <utility>
#include <vector>

namespace rffcap {

/// Fano lower bound on the error rate of any N-class classifier.
struct FanoLower {
  double raw = 0.0;
  double value = 0.0;  // raw clamped below at 0
};

/// (log2 N - I - H(pe)) / log2(N - 1). Requires n_users >= 3.
FanoLower fano_lower_bound(double emi_bits, int n_users, double pe);

struct FanoUpper {
  double raw = 0.0;
  double value = 0.0;  // raw clamped to [0, 1]
};

/// (log2 N - I) / 2. Requires n_users >= 2.
FanoUpper fano_upper_bound(double emi_bits, int n_users);

/// True when an observed error rate does not beat the Fano lower bound.
bool check_fano_consistency(double emi_bits, int n_users, double observed_pe);

struct CapacityResult {
  int n_c = 2;
  double threshold = 0.0;
  double emi_bits = 0.0;
  /// n_max itself satisfied the inequality; n_c is a floor, not the capacity.
  bool saturated = false;
  /// Even N = 3 violates the inequality; n_c = 2 is a sentinel.
  bool below_min = false;
  /// trace[k] is the raw lower-bound ratio at N = k + 3.
  std::vector<double> trace;
};

inline constexpr int kDefaultCapacityScan = 10000;

/// Largest N in [3, n_max] whose Fano lower bound at pe = threshold stays at or below threshold.
CapacityResult user_capacity(double emi_bits, double threshold, int n_max = kDefaultCapacityScan);

struct CapacityRow {
  double parameter = 0.0;
  double emi_bits = 0.0;
  std::vector<CapacityResult> per_threshold;  // parallel to the thresholds argument
};

/// user_capacity for each (parameter, emi) pair and each threshold.
std::vector<CapacityRow> capacity_curve(std::span<const std::pair<double, double>> emi_series,
                                        std::span<const double> thresholds,
                                        int n_max = kDefaultCapacityScan);

}  // namespace rffcap
