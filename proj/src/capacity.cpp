#include "rffcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rffcap/infotheory.hpp"

namespace rffcap {

namespace {

double lower_ratio(double emi_bits, int n_users, double h_pe) {
  const double n = static_cast<double>(n_users);
  return (std::log2(n) - emi_bits - h_pe) / std::log2(n - 1.0);
}

}  // namespace

FanoLower fano_lower_bound(double emi_bits, int n_users, double pe) {
  if (n_users < 3) throw std::invalid_argument("Fano lower bound needs at least 3 classes");
  FanoLower b;
  b.raw = lower_ratio(emi_bits, n_users, binary_entropy(pe));
  b.value = std::max(0.0, b.raw);
  return b;
}

FanoUpper fano_upper_bound(double emi_bits, int n_users) {
  if (n_users < 2) throw std::invalid_argument("Fano upper bound needs at least 2 classes");
  FanoUpper b;
  b.raw = 0.5 * (std::log2(static_cast<double>(n_users)) - emi_bits);
  b.value = std::clamp(b.raw, 0.0, 1.0);
  return b;
}

bool check_fano_consistency(double emi_bits, int n_users, double observed_pe) {
  return fano_lower_bound(emi_bits, n_users, observed_pe).value <= observed_pe;
}

CapacityResult user_capacity(double emi_bits, double threshold, int n_max) {
  if (!(threshold > 0.0 && threshold < 0.5))
    throw std::invalid_argument("capacity threshold must lie in (0, 0.5)");
  if (n_max < 3) throw std::invalid_argument("n_max must be at least 3");

  CapacityResult r;
  r.threshold = threshold;
  r.emi_bits = emi_bits;
  r.trace.reserve(static_cast<std::size_t>(n_max - 2));
  const double h = binary_entropy(threshold);
  int best = 0;
  for (int n = 3; n <= n_max; ++n) {
    const double ratio = lower_ratio(emi_bits, n, h);
    r.trace.push_back(ratio);
    if (ratio <= threshold) best = n;
  }
  if (best == 0) {
    r.n_c = 2;
    r.below_min = true;
  } else {
    r.n_c = best;
    r.saturated = best == n_max;
  }
  return r;
}

std::vector<CapacityRow> capacity_curve(std::span<const std::pair<double, double>> emi_series,
                                        std::span<const double> thresholds, int n_max) {
  std::vector<CapacityRow> rows;
  rows.reserve(emi_series.size());
  for (const auto& [param, emi] : emi_series) {
    CapacityRow row{param, emi, {}};
    for (double t : thresholds) row.per_threshold.push_back(user_capacity(emi, t, n_max));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rffcap
