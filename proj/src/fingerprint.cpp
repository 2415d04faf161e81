#include "rffcap/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unsupported/Eigen/FFT>

#include "rffcap/common.hpp"

namespace rffcap {

namespace {

constexpr std::size_t kPowerWindow = 16;
constexpr double kNoiseFloorQuantile = 0.10;
constexpr double kMinPsd = 1e-20;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> hann(std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len < 2) return w;
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(len));
  return w;
}

std::size_t max_energy_start(std::span<const Sample> x, std::size_t window) {
  double acc = 0.0;
  for (std::size_t i = 0; i < window; ++i) acc += std::norm(x[i]);
  double best = acc;
  std::size_t best_start = 0;
  for (std::size_t s = 1; s + window <= x.size(); ++s) {
    acc += std::norm(x[s + window - 1]) - std::norm(x[s - 1]);
    if (acc > best) {
      best = acc;
      best_start = s;
    }
  }
  return best_start;
}

}  // namespace

std::vector<int> FingerprintDataset::classes() const {
  std::vector<int> c(labels);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

std::vector<int> FingerprintDataset::dense_labels() const {
  const auto c = classes();
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(c.begin(), c.end(), labels[i]) - c.begin());
  return out;
}

FingerprintDataset FingerprintDataset::subset(std::span<const int> keep) const {
  std::vector<Eigen::Index> rows_kept;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (std::find(keep.begin(), keep.end(), labels[i]) != keep.end())
      rows_kept.push_back(static_cast<Eigen::Index>(i));
  FingerprintDataset out;
  out.meta = meta;
  out.features.resize(static_cast<Eigen::Index>(rows_kept.size()), features.cols());
  out.labels.reserve(rows_kept.size());
  for (std::size_t r = 0; r < rows_kept.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(rows_kept[r]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows_kept[r])]);
  }
  return out;
}

void FingerprintDataset::validate() const {
  if (labels.size() != rows())
    throw std::invalid_argument("dataset row count does not match label count");
  if (!features.allFinite()) throw std::invalid_argument("dataset has non-finite features");
}

AcquireResult acquire(const IqCapture& capture, std::size_t window, double threshold_factor) {
  const auto& x = capture.samples;
  if (window == 0 || window > x.size())
    throw std::invalid_argument("acquire: window must be in [1, capture length]");

  const std::size_t len = std::min(kPowerWindow, x.size());
  const std::size_t n_pos = x.size() - len + 1;
  std::vector<double> power(n_pos);
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += std::norm(x[i]);
  power[0] = acc / static_cast<double>(len);
  for (std::size_t s = 1; s < n_pos; ++s) {
    acc += std::norm(x[s + len - 1]) - std::norm(x[s - 1]);
    power[s] = std::max(acc, 0.0) / static_cast<double>(len);
  }

  std::vector<double> sorted(power);
  const auto q = static_cast<std::size_t>(kNoiseFloorQuantile * static_cast<double>(n_pos - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
  const double floor = sorted[q];
  const double threshold = threshold_factor * floor;

  AcquireResult result;
  result.noise_floor = floor;
  const auto crossing =
      std::find_if(power.begin(), power.end(), [&](double p) { return p > threshold; });
  if (crossing == power.end()) {
    result.flagged = true;
    result.onset = max_energy_start(x, window);
  } else {
    // Refine to the first pair of consecutive samples above threshold inside the window.
    const auto coarse = static_cast<std::size_t>(crossing - power.begin());
    std::size_t onset = coarse;
    for (std::size_t k = coarse; k < std::min(coarse + len, x.size()); ++k) {
      const bool next_ok = k + 1 >= x.size() || std::norm(x[k + 1]) > threshold;
      if (std::norm(x[k]) > threshold && next_ok) {
        onset = k;
        break;
      }
    }
    result.onset = std::min(onset, x.size() - window);
  }

  result.segment.fs_hz = capture.fs_hz;
  result.segment.true_id = capture.true_id;
  const auto first = x.begin() + static_cast<std::ptrdiff_t>(result.onset);
  result.segment.samples.assign(first, first + static_cast<std::ptrdiff_t>(window));
  return result;
}

std::vector<double> welch_psd(std::span<const Sample> samples, int n_fft) {
  if (!is_pow2(n_fft) || n_fft < 64 || n_fft > 4096)
    throw std::invalid_argument("n_fft must be a power of two in [64, 4096]");
  if (samples.empty()) throw std::invalid_argument("cannot take the spectrum of an empty capture");

  const auto nfft = static_cast<std::size_t>(n_fft);
  const std::size_t seg_len = std::min(nfft, samples.size());
  const std::size_t hop = nfft / 2;
  const std::size_t n_seg = samples.size() < nfft ? 1 : (samples.size() - nfft) / hop + 1;

  const auto w = hann(seg_len);
  double w_energy = 0.0;
  for (double v : w) w_energy += v * v;

  Eigen::FFT<double> fft;
  std::vector<Sample> buf(nfft);
  std::vector<Sample> spec;
  std::vector<double> psd(nfft, 0.0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    std::fill(buf.begin(), buf.end(), Sample{});
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = samples[s * hop + i] * w[i];
    fft.fwd(spec, buf);
    for (std::size_t k = 0; k < nfft; ++k) psd[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (static_cast<double>(n_seg) * static_cast<double>(nfft) * w_energy);
  for (auto& v : psd) v *= scale;
  return psd;
}

FeatureVector extract_spectral_feature(const IqCapture& capture, int n_fft) {
  const auto psd = welch_psd(capture.samples, n_fft);
  FeatureVector fv;
  fv.label = capture.true_id.value_or(0);
  fv.values.resize(psd.size());
  std::transform(psd.begin(), psd.end(), fv.values.begin(),
                 [](double p) { return 10.0 * std::log10(std::max(p, kMinPsd)); });
  return fv;
}

double bin_frequency(int bin, int n_fft, double fs_hz) {
  const int k = bin < n_fft / 2 ? bin : bin - n_fft;
  return static_cast<double>(k) * fs_hz / static_cast<double>(n_fft);
}

void PipelineConfig::validate() const {
  adc().validate();
  if (n_symbols < 1) throw std::invalid_argument("n_symbols must be at least 1");
  if (!is_pow2(n_fft) || n_fft < 64 || n_fft > 4096)
    throw std::invalid_argument("n_fft must be a power of two in [64, 4096]");
  if (min_lead < 0 || max_lead < min_lead || tail < 0)
    throw std::invalid_argument("lead/tail lengths must satisfy 0 <= min_lead <= max_lead");
  if (!(rx_scale > 0.0)) throw std::invalid_argument("rx_scale must be positive");
  if (!(threshold_factor > 0.0)) throw std::invalid_argument("threshold_factor must be positive");
}

namespace {

constexpr double kFrontEndRateHz = 16e6;

// Blackman-windowed sinc, cutoff 0.45 fs at the oversampled rate, unit DC gain.
std::vector<double> anti_alias_taps(int factor) {
  const int half = 32 * factor;
  const double fc = 0.45 / factor;  // cycles per oversampled sample
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double x = 2.0 * fc * k;
    const double sinc = k == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double w = 0.42 + 0.5 * std::cos(std::numbers::pi * k / half) +
                     0.08 * std::cos(2.0 * std::numbers::pi * k / half);
    taps[static_cast<std::size_t>(k + half)] = sinc * w;
    sum += sinc * w;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

IqCapture transmitted_burst(const DeviceProfile& profile, const PipelineConfig& cfg) {
  if (!cfg.anti_alias) return generate_preamble(profile, cfg.fs_hz, cfg.n_symbols);
  const int factor = std::max(2, static_cast<int>(std::ceil(kFrontEndRateHz / cfg.fs_hz)));
  const IqCapture fine = generate_preamble(profile, factor * cfg.fs_hz, cfg.n_symbols);
  const auto taps = anti_alias_taps(factor);
  const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto n_fine = static_cast<std::ptrdiff_t>(fine.samples.size());

  IqCapture out;
  out.fs_hz = cfg.fs_hz;
  out.true_id = fine.true_id;
  out.samples.resize(preamble_length(cfg.fs_hz, cfg.n_symbols));
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    const auto center = static_cast<std::ptrdiff_t>(n) * factor + factor / 2;
    Sample acc{};
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const auto m = center - k;
      if (m >= 0 && m < n_fine)
        acc += taps[static_cast<std::size_t>(k + half)] * fine.samples[static_cast<std::size_t>(m)];
    }
    out.samples[n] = acc;
  }
  return out;
}

}  // namespace

IqCapture simulate_capture(const DeviceProfile& profile, const PipelineConfig& cfg,
                           std::uint64_t seed) {
  const IqCapture burst = transmitted_burst(profile, cfg);
  std::mt19937_64 rng(derive_seed(seed, 0x6c656164ULL));
  std::uniform_int_distribution<int> lead_dist(cfg.min_lead, cfg.max_lead);
  const auto lead = static_cast<std::size_t>(lead_dist(rng));

  IqCapture framed;
  framed.fs_hz = cfg.fs_hz;
  framed.true_id = profile.device_id;
  framed.samples.assign(lead + burst.samples.size() + static_cast<std::size_t>(cfg.tail), Sample{});
  std::copy(burst.samples.begin(), burst.samples.end(),
            framed.samples.begin() + static_cast<std::ptrdiff_t>(lead));

  IqCapture noisy = apply_awgn(framed, ChannelConfig{cfg.snr_db, derive_seed(seed, 0x6e6fULL)},
                               mean_power(burst.samples));
  for (auto& s : noisy.samples) s *= cfg.rx_scale;
  return adc_sample(noisy, cfg.adc()).capture;
}

FeatureVector fingerprint_once(const DeviceProfile& profile, const PipelineConfig& cfg,
                               std::uint64_t seed) {
  const IqCapture raw = simulate_capture(profile, cfg, seed);
  const auto segment =
      acquire(raw, preamble_length(cfg.fs_hz, cfg.n_symbols), cfg.threshold_factor).segment;
  return extract_spectral_feature(segment, cfg.n_fft);
}

FingerprintDataset build_dataset(std::span<const DeviceProfile> profiles, int per_class,
                                 const PipelineConfig& cfg, std::uint64_t master_seed,
                                 int threads) {
  if (profiles.size() < 2) throw std::invalid_argument("build_dataset needs at least 2 profiles");
  if (per_class < 2) throw std::invalid_argument("build_dataset needs per_class >= 2");
  cfg.validate();
  for (const auto& p : profiles) p.validate();

  const auto per = static_cast<std::size_t>(per_class);
  const std::size_t n_rows = profiles.size() * per;
  FingerprintDataset ds;
  ds.meta = {cfg.fs_hz, cfg.n_fft, cfg.snr_db, cfg.q_bits};
  ds.features.resize(static_cast<Eigen::Index>(n_rows), cfg.n_fft);
  ds.labels.resize(n_rows);

  parallel_for(n_rows, threads, [&](std::size_t row) {
    const auto& profile = profiles[row / per];
    const std::size_t idx = row % per;
    const auto seed = derive_seed(master_seed, static_cast<std::uint64_t>(profile.device_id), idx);
    const auto fv = fingerprint_once(profile, cfg, seed);
    ds.features.row(static_cast<Eigen::Index>(row)) =
        Eigen::Map<const Eigen::RowVectorXd>(fv.values.data(), cfg.n_fft);
    ds.labels[row] = profile.device_id;
  });
  return ds;
}

}  // namespace rffcap
