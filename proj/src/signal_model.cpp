#include "rffcap/signal_model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rffcap/common.hpp"

namespace rffcap {

namespace {

// Chip sequence c0..c31 for data symbol 0.
constexpr std::array<int, kChipsPerSymbol> kSymbolZeroChips = {
    1, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1,
    0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0};

double chip_value(std::size_t chip) {
  return kSymbolZeroChips[chip % kChipsPerSymbol] ? 1.0 : -1.0;
}

// One branch of the half-sine O-QPSK waveform. `t` is in chip periods
// relative to the branch start; each pulse spans two chip periods.
double branch_value(double t, std::size_t first_chip, std::size_t n_pulses) {
  if (t < 0.0) return 0.0;
  const auto pulse = static_cast<std::size_t>(std::floor(t / 2.0));
  if (pulse >= n_pulses) return 0.0;
  const double phase = t - 2.0 * static_cast<double>(pulse);
  return chip_value(first_chip + 2 * pulse) * std::sin(std::numbers::pi * phase / 2.0);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

double clamp_symmetric(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

void DeviceProfile::validate() const {
  require(std::abs(pa_alpha3) < 1.0, "pa_alpha3 must satisfy |alpha3| < 1");
  require(iq_gain_db >= -3.0 && iq_gain_db <= 3.0, "iq_gain_db must lie in [-3, 3]");
  require(std::abs(cfo_hz) <= 200e3, "|cfo_hz| must not exceed 200 kHz");
  require(std::isfinite(iq_phase_deg) && std::isfinite(clock_jitter_ppm) &&
              std::isfinite(dc_offset.real()) && std::isfinite(dc_offset.imag()),
          "device profile fields must be finite");
}

void AdcConfig::validate() const {
  require(q_bits >= 4 && q_bits <= 24, "q_bits must lie in [4, 24]");
  require(full_scale_vpp > 0.0, "full_scale_vpp must be positive");
  require(fs_hz >= kMinSampleRateHz, "fs_hz must be at least 2 MS/s");
}

double AdcConfig::step() const { return std::ldexp(full_scale_vpp, -q_bits); }

void IqCapture::validate() const {
  require(!samples.empty(), "capture is empty");
  for (const auto& s : samples)
    require(std::isfinite(s.real()) && std::isfinite(s.imag()), "capture has non-finite samples");
}

double mean_power(std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

std::size_t preamble_length(double fs_hz, int n_symbols) {
  const double seconds = n_symbols * kChipsPerSymbol / kChipRateHz;
  return static_cast<std::size_t>(std::llround(seconds * fs_hz));
}

std::vector<Sample> ideal_preamble(double fs_hz, int n_symbols) {
  if (!(fs_hz >= kMinSampleRateHz)) {
    std::ostringstream msg;
    msg << "fs_hz=" << fs_hz << " is below the 2 MS/s Nyquist rate of the O-QPSK chip stream";
    throw std::invalid_argument(msg.str());
  }
  require(n_symbols >= 1, "n_symbols must be at least 1");

  const std::size_t n = preamble_length(fs_hz, n_symbols);
  const std::size_t pulses = static_cast<std::size_t>(n_symbols) * kChipsPerSymbol / 2;
  const double chips_per_sample = kChipRateHz / fs_hz;
  std::vector<Sample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * chips_per_sample;
    // Even chips on I, odd chips on Q delayed by one chip period.
    out[k] = {branch_value(t, 0, pulses), branch_value(t - 1.0, 1, pulses)};
  }
  const double scale = 1.0 / std::sqrt(mean_power(out));
  for (auto& s : out) s *= scale;
  return out;
}

std::vector<Sample> apply_impairments(std::span<const Sample> clean, const DeviceProfile& profile,
                                      double fs_hz) {
  std::vector<Sample> x(clean.begin(), clean.end());

  if (profile.dc_offset != Sample{})
    for (auto& s : x) s += profile.dc_offset;

  if (profile.iq_gain_db != 0.0 || profile.iq_phase_deg != 0.0) {
    const double gain = std::pow(10.0, profile.iq_gain_db / 20.0);
    const double phi = profile.iq_phase_deg * std::numbers::pi / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    for (auto& v : x) v = {gain * v.real(), c * v.imag() - s * v.real()};
  }

  if (profile.pa_alpha3 != 0.0)
    for (auto& v : x) v *= 1.0 + profile.pa_alpha3 * std::norm(v);

  if (profile.cfo_hz != 0.0) {
    const double w = 2.0 * std::numbers::pi * profile.cfo_hz / fs_hz;
    for (std::size_t n = 0; n < x.size(); ++n)
      x[n] *= std::polar(1.0, w * static_cast<double>(n));
  }

  if (profile.clock_jitter_ppm != 0.0) {
    // Receiver sample n lands at transmitter time n * (1 + ppm), interpolated linearly.
    const double rate = 1.0 + profile.clock_jitter_ppm * 1e-6;
    std::vector<Sample> y(x.size());
    for (std::size_t n = 0; n < y.size(); ++n) {
      const double t = static_cast<double>(n) * rate;
      const auto i = static_cast<std::size_t>(std::floor(t));
      const double frac = t - static_cast<double>(i);
      const Sample a = i < x.size() ? x[i] : Sample{};
      const Sample b = i + 1 < x.size() ? x[i + 1] : Sample{};
      y[n] = a * (1.0 - frac) + b * frac;
    }
    x = std::move(y);
  }
  return x;
}

IqCapture generate_preamble(const DeviceProfile& profile, double fs_hz, int n_symbols) {
  profile.validate();
  IqCapture cap;
  cap.samples = apply_impairments(ideal_preamble(fs_hz, n_symbols), profile, fs_hz);
  cap.fs_hz = fs_hz;
  cap.true_id = profile.device_id;
  return cap;
}

IqCapture apply_awgn(const IqCapture& capture, const ChannelConfig& channel,
                     std::optional<double> signal_power) {
  require(!capture.samples.empty(), "apply_awgn: capture is empty");
  IqCapture out = capture;
  if (!channel.snr_db) return out;

  const double ps = signal_power.value_or(mean_power(capture.samples));
  const double noise_power = ps / std::pow(10.0, *channel.snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);
  std::mt19937_64 rng(channel.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& s : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s += Sample{sigma * re, sigma * im};
  }
  return out;
}

AdcResult adc_sample(const IqCapture& capture, const AdcConfig& adc) {
  const double half = adc.full_scale_vpp / 2.0;
  const double step = adc.step();
  std::size_t clipped = 0;
  auto quantize = [&](double v) {
    if (v > half || v < -half) {
      ++clipped;
      v = std::clamp(v, -half, half);
    }
    return step * std::nearbyint(v / step);
  };

  AdcResult result;
  result.capture = capture;
  for (auto& s : result.capture.samples) s = {quantize(s.real()), quantize(s.imag())};
  if (!capture.samples.empty())
    result.clip_fraction =
        static_cast<double>(clipped) / (2.0 * static_cast<double>(capture.samples.size()));
  return result;
}

double quantization_error_bound(const AdcConfig& adc) {
  return std::ldexp(adc.full_scale_vpp, -adc.q_bits);
}

std::vector<DeviceProfile> draw_population(const PopulationSpec& spec, std::uint64_t seed) {
  require(spec.n_devices >= 1, "population needs at least one device");
  std::vector<DeviceProfile> out;
  out.reserve(static_cast<std::size_t>(spec.n_devices));
  for (int id = 0; id < spec.n_devices; ++id) {
    std::mt19937_64 rng(derive_seed(seed, 0x706f70ULL, static_cast<std::uint64_t>(id)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](const ParamDistribution& d) { return d.mean + d.stddev * gauss(rng); };
    DeviceProfile p;
    p.device_id = id;
    p.cfo_hz = clamp_symmetric(draw(spec.cfo_hz), 200e3);
    p.iq_gain_db = clamp_symmetric(draw(spec.iq_gain_db), 3.0);
    p.iq_phase_deg = draw(spec.iq_phase_deg);
    p.clock_jitter_ppm = draw(spec.clock_jitter_ppm);
    p.pa_alpha3 = clamp_symmetric(draw(spec.pa_alpha3), 0.99);
    const double re = draw(spec.dc_offset_re);
    const double im = draw(spec.dc_offset_im);
    p.dc_offset = {re, im};
    out.push_back(p);
  }
  return out;
}

}  // namespace rffcap
