#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rffcap {

using Sample = std::complex<double>;

/// 802.15.4 O-QPSK chip rate (I and Q together).
inline constexpr double kChipRateHz = 2e6;
inline constexpr int kChipsPerSymbol = 32;
/// Lowest accepted sampling rate: Nyquist for the 1 Mchip/s per-branch rate.
inline constexpr double kMinSampleRateHz = 2e6;

/// Hardware impairments of one transmitter. The all-zero profile is an ideal radio.
struct DeviceProfile {
  int device_id = 0;
  double cfo_hz = 0.0;
  double iq_gain_db = 0.0;
  double iq_phase_deg = 0.0;
  double clock_jitter_ppm = 0.0;
  double pa_alpha3 = 0.0;
  Sample dc_offset{0.0, 0.0};

  /// Throws std::invalid_argument when outside the weak-impairment regime.
  void validate() const;
};

struct AdcConfig {
  int q_bits = 14;
  double full_scale_vpp = 2.0;
  double fs_hz = 4e6;

  void validate() const;
  /// Quantizer step U / 2^Q.
  double step() const;
};

struct ChannelConfig {
  /// In-band SNR in dB; std::nullopt is the noiseless channel.
  std::optional<double> snr_db;
  std::uint64_t rng_seed = 0;
};

struct IqCapture {
  std::vector<Sample> samples;
  double fs_hz = 0.0;
  std::optional<int> true_id;

  /// Throws when empty or when any sample is non-finite.
  void validate() const;
};

struct AdcResult {
  IqCapture capture;
  /// Fraction of I and Q components that hit the rails.
  double clip_fraction = 0.0;
};

/// Normal distribution parameters for one impairment.
struct ParamDistribution {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Describes how a device population is drawn.
struct PopulationSpec {
  int n_devices = 40;
  // Spreads are small because captures of one device differ only by noise,
  // lead-in and quantization; wider spreads make every device separable.
  ParamDistribution cfo_hz{0.0, 600.0};
  ParamDistribution iq_gain_db{0.0, 0.01};
  ParamDistribution iq_phase_deg{0.0, 0.06};
  ParamDistribution clock_jitter_ppm{0.0, 0.3};
  ParamDistribution pa_alpha3{0.0, 0.0015};
  ParamDistribution dc_offset_re{0.0, 3e-4};
  ParamDistribution dc_offset_im{0.0, 3e-4};
};

double mean_power(std::span<const Sample> samples);

/// Number of samples generate_preamble produces for a given rate.
std::size_t preamble_length(double fs_hz, int n_symbols);

/// Ideal unit-power O-QPSK preamble of all-zero symbols, sampled at (n + 1/2) / fs.
std::vector<Sample> ideal_preamble(double fs_hz, int n_symbols);

/// Applies the impairment chain DC -> I/Q imbalance -> PA -> CFO -> clock
/// resampling to a unit-power signal.
std::vector<Sample> apply_impairments(std::span<const Sample> clean, const DeviceProfile& profile,
                                      double fs_hz);

IqCapture generate_preamble(const DeviceProfile& profile, double fs_hz, int n_symbols);

/// Adds complex white Gaussian noise. The SNR is referenced to
/// `signal_power` when given, otherwise to the capture's mean power.
IqCapture apply_awgn(const IqCapture& capture, const ChannelConfig& channel,
                     std::optional<double> signal_power = std::nullopt);

/// Clips I and Q to [-U/2, U/2] and quantizes each with a mid-tread step U / 2^Q.
AdcResult adc_sample(const IqCapture& capture, const AdcConfig& adc);

/// Documented ceiling 2^-Q * U. adc_sample guarantees half of this for in-range input.
double quantization_error_bound(const AdcConfig& adc);

/// Draws `spec.n_devices` profiles with ids 0..n-1, clamped to the valid ranges.
std::vector<DeviceProfile> draw_population(const PopulationSpec& spec, std::uint64_t seed);

}  // namespace rffcap
