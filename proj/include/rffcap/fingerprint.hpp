#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rffcap/signal_model.hpp"

namespace rffcap {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureVector {
  std::vector<double> values;  // dB, natural FFT bin order
  int label = 0;
};

struct DatasetMeta {
  double fs_hz = 0.0;
  int n_fft = 0;
  std::optional<double> snr_db;  // nullopt: noiseless
  int q_bits = 0;
};

/// N_x rows of M spectral features, one identity label per row.
struct FingerprintDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  DatasetMeta meta;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Sorted distinct labels.
  std::vector<int> classes() const;
  /// Labels remapped onto 0..C-1 following the order of classes().
  std::vector<int> dense_labels() const;
  /// Rows whose label is in `keep`, in original order.
  FingerprintDataset subset(std::span<const int> keep) const;

  void validate() const;
};

struct AcquireResult {
  IqCapture segment;
  std::size_t onset = 0;
  /// Set when no threshold crossing was found and the max-energy window was returned.
  bool flagged = false;
  double noise_floor = 0.0;
};

/// Locates the start of the burst and returns `window` samples from there.
AcquireResult acquire(const IqCapture& capture, std::size_t window, double threshold_factor);

/// Welch PSD (Hann, 50% overlap, two-sided), scaled so the bins sum to the
/// mean signal power. Captures shorter than n_fft are zero padded.
std::vector<double> welch_psd(std::span<const Sample> samples, int n_fft);

FeatureVector extract_spectral_feature(const IqCapture& capture, int n_fft);

/// Frequency in Hz of a natural-order FFT bin.
double bin_frequency(int bin, int n_fft, double fs_hz);

/// Receiver chain settings used to turn devices into fingerprints.
struct PipelineConfig {
  double fs_hz = 4e6;
  int n_symbols = 8;
  std::optional<double> snr_db = 24.0;
  int q_bits = 14;
  double full_scale_vpp = 2.0;
  int n_fft = 512;
  double threshold_factor = 10.0;
  /// Amplitude scale in front of the ADC (headroom for impairments and noise).
  double rx_scale = 0.5;
  /// Silence before the burst is drawn from [min_lead, max_lead] samples.
  int min_lead = 32;
  int max_lead = 96;
  int tail = 32;
  /// Synthesize at an integer multiple of fs (at least 16 MS/s), low-pass to
  /// 0.45 fs and decimate, like a receiver's anti-alias filter. When false the
  /// burst is sampled directly at fs and out-of-band content aliases.
  bool anti_alias = true;

  AdcConfig adc() const { return {q_bits, full_scale_vpp, fs_hz}; }
  void validate() const;
};

/// Burst with random leading silence, AWGN and ADC; everything before acquisition.
IqCapture simulate_capture(const DeviceProfile& profile, const PipelineConfig& cfg,
                           std::uint64_t seed);

/// Full chain for one capture: simulate_capture -> acquire -> extract_spectral_feature.
FeatureVector fingerprint_once(const DeviceProfile& profile, const PipelineConfig& cfg,
                               std::uint64_t seed);

/// per_class fingerprints per profile. Per-sample seeds hash
/// (master_seed, device_id, sample index), so the result does not depend on `threads`.
FingerprintDataset build_dataset(std::span<const DeviceProfile> profiles, int per_class,
                                 const PipelineConfig& cfg, std::uint64_t master_seed,
                                 int threads = 1);

}  // namespace rffcap
