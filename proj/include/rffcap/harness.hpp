#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rffcap/classifier.hpp"
#include "rffcap/fingerprint.hpp"
#include "rffcap/infotheory.hpp"
#include "rffcap/signal_model.hpp"

namespace rffcap {

/// Everything needed to turn a device population into EMI, capacity and error rates.
struct ScenarioConfig {
  PopulationSpec population;
  /// Explicit devices; when non-empty they replace the drawn population.
  std::vector<DeviceProfile> devices;
  PipelineConfig pipeline;
  ClassifierConfig classifier;
  int n_train_devices = 12;
  int per_class = 200;
  int projected_dim = 10;
  EmiProjection emi_projection = EmiProjection::CrossFitFisher;
  int mi_bins = 64;
  int n_max = 10000;
  double emi_slack = 0.2;
  /// fs sweeps: SNR is quoted at pipeline.fs_hz and falls by 10 log10(fs / fs_ref).
  bool noise_scales_with_fs = true;
  /// fs sweeps: n_fft follows fs (next power of two) to keep the bin width.
  bool keep_resolution_with_fs = false;
  std::uint64_t seed = 1;

  std::vector<DeviceProfile> profiles() const;
};

enum class SweepAxis { NTrainDevices, SnrDb, QBits, NFft, FsHz };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> values;
  ScenarioConfig fixed;

  /// Non-empty, strictly increasing, each value inside the axis range.
  void validate() const;
};

/// The scenario at one sweep point.
ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

/// One classifier run inside a sweep row.
struct BracketResult {
  int n_classes = 0;
  double pe = 0.0;
  double emi_train = 0.0;  // EMI of the classifier's own training set
  double fano_lower = 0.0;
  double fano_upper_raw = 0.0;
  bool consistent = false;  // Fano lower bound at emi_train does not exceed pe
  int kappa_eff = 0;
};

struct SweepRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  double emi_bits = 0.0;
  double emi_raw = 0.0;
  int nc_1pct = 0;
  int nc_10pct = 0;
  bool saturated = false;
  bool below_min = false;
  std::optional<BracketResult> at_nc;     // n_classes = nc_1pct (at least 3)
  std::optional<BracketResult> above_nc;  // n_classes = nc_1pct + 1
};

struct AbortedRow {
  double axis_value = 0.0;
  std::string reason;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<SweepRow> rows;
  std::vector<AbortedRow> aborted;
};

/// Seed of a sweep point: hash of (master seed, axis, value).
std::uint64_t point_seed(std::uint64_t master, SweepAxis axis, double value);

/// per_class fingerprints for each of the first n_train_devices profiles.
FingerprintDataset training_dataset(const ScenarioConfig& scenario, std::uint64_t seed,
                                    int threads = 1);

/// EMI and capacity (plus optional bracketing classifier runs) for one scenario.
SweepRow evaluate_point(const ScenarioConfig& scenario, double axis_value, std::uint64_t seed,
                        bool with_classifier, int threads = 1);

/// Rows come out in spec order. A failing point is recorded in `aborted` and
/// the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, bool with_classifier, int threads = 1);

struct BoundVerdict {
  double axis_value = 0.0;
  int n_classes = 0;
  double pe = 0.0;
  double emi_bits = 0.0;
  double lower_bound = 0.0;  // Fano lower bound at emi_bits + slack
  double margin = 0.0;       // pe - lower_bound
  bool pass = false;
};

/// Checks fano_lower(emi + slack, n, pe) <= pe for every classifier run in `rows`.
std::vector<BoundVerdict> validate_bounds(const std::vector<SweepRow>& rows, double slack);

void write_sweep_csv(std::ostream& os, const SweepResult& result, bool timestamp_line = true);
SweepResult read_sweep_csv(std::istream& is);
void write_verdict_csv(std::ostream& os, const std::vector<BoundVerdict>& verdicts);

}  // namespace rffcap
