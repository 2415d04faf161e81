#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rffcap/fingerprint.hpp"

using namespace rffcap;

namespace {

double linear_sum(const std::vector<double>& db) {
  double s = 0.0;
  for (double v : db) s += std::pow(10.0, v / 10.0);
  return s;
}

IqCapture white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  IqCapture cap;
  cap.fs_hz = 4e6;
  cap.samples.resize(n);
  for (auto& s : cap.samples) s = {g(rng), g(rng)};
  return cap;
}

PipelineConfig quiet_pipeline() {
  PipelineConfig cfg;
  cfg.snr_db = std::nullopt;
  cfg.q_bits = 24;
  return cfg;
}

}  // namespace

TEST_SUITE("fingerprint") {
  TEST_CASE("acquire finds the exact onset of a noise-free burst") {
    const auto burst = generate_preamble(DeviceProfile{}, 4e6, 8);
    IqCapture cap;
    cap.fs_hz = 4e6;
    cap.samples.assign(100, Sample{});
    cap.samples.insert(cap.samples.end(), burst.samples.begin(), burst.samples.end());
    cap.samples.resize(cap.samples.size() + 40);
    const auto res = acquire(cap, 512, 10.0);
    CHECK(res.onset == 100);
    CHECK_FALSE(res.flagged);
    CHECK(res.segment.samples.size() == 512);
    CHECK(res.segment.samples.front() == burst.samples.front());
  }

  TEST_CASE("acquire flags an all-noise capture instead of failing") {
    const auto cap = white_noise(2000, 3);
    AcquireResult res;
    CHECK_NOTHROW(res = acquire(cap, 512, 10.0));
    CHECK(res.flagged);
    CHECK(res.segment.samples.size() == 512);
  }

  TEST_CASE("acquire rejects a window longer than the capture") {
    const auto cap = white_noise(100, 1);
    CHECK_THROWS_AS(acquire(cap, 101, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(acquire(cap, 0, 10.0), std::invalid_argument);
  }

  TEST_CASE("acquire onset accuracy at 20 dB SNR (Monte Carlo)") {
    const auto burst = generate_preamble(DeviceProfile{}, 4e6, 8);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> lead(20, 200);
    int good = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      const int l = lead(rng);
      IqCapture cap;
      cap.fs_hz = 4e6;
      cap.samples.assign(static_cast<std::size_t>(l), Sample{});
      cap.samples.insert(cap.samples.end(), burst.samples.begin(), burst.samples.end());
      cap.samples.resize(cap.samples.size() + 32);
      const auto noisy = apply_awgn(cap, ChannelConfig{20.0, static_cast<std::uint64_t>(t)}, 1.0);
      const auto res = acquire(noisy, burst.samples.size(), 10.0);
      if (std::abs(static_cast<int>(res.onset) - l) <= 4) ++good;
    }
    CHECK(good >= 990);
  }

  TEST_CASE("tone at fs/8 peaks in bin n_fft/8") {
    IqCapture cap;
    cap.fs_hz = 4e6;
    cap.samples.resize(1024);
    for (std::size_t n = 0; n < cap.samples.size(); ++n)
      cap.samples[n] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(n) / 8.0);
    const auto fv = extract_spectral_feature(cap, 64);
    REQUIRE(fv.values.size() == 64);
    const auto peak = std::max_element(fv.values.begin(), fv.values.end()) - fv.values.begin();
    CHECK(peak == 8);
  }

  TEST_CASE("negative frequencies land in the upper half") {
    IqCapture cap;
    cap.fs_hz = 4e6;
    cap.samples.resize(512);
    for (std::size_t n = 0; n < cap.samples.size(); ++n)
      cap.samples[n] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(n) / 8.0);
    const auto fv = extract_spectral_feature(cap, 64);
    const auto peak = std::max_element(fv.values.begin(), fv.values.end()) - fv.values.begin();
    CHECK(peak == 56);
    CHECK(bin_frequency(56, 64, 4e6) == doctest::Approx(-0.5e6));
    CHECK(bin_frequency(8, 64, 4e6) == doctest::Approx(0.5e6));
  }

  TEST_CASE("white noise PSD sums to its power") {
    const auto cap = white_noise(8192, 17);
    const auto psd = welch_psd(cap.samples, 256);
    const double total = std::accumulate(psd.begin(), psd.end(), 0.0);
    CHECK(total == doctest::Approx(mean_power(cap.samples)).epsilon(0.05));
    CHECK(total == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("short captures are zero padded") {
    const auto cap = white_noise(100, 4);
    const auto psd = welch_psd(cap.samples, 256);
    CHECK(psd.size() == 256);
    CHECK(std::accumulate(psd.begin(), psd.end(), 0.0) ==
          doctest::Approx(mean_power(cap.samples)).epsilon(0.25));
  }

  TEST_CASE("feature length always equals n_fft") {
    const auto cap = white_noise(600, 5);
    for (int n : {64, 128, 512, 1024, 4096}) CHECK(extract_spectral_feature(cap, n).values.size() == static_cast<std::size_t>(n));
    CHECK_THROWS_AS(extract_spectral_feature(cap, 100), std::invalid_argument);
    CHECK_THROWS_AS(extract_spectral_feature(cap, 32), std::invalid_argument);
    CHECK_THROWS_AS(extract_spectral_feature(IqCapture{}, 64), std::invalid_argument);
  }

  TEST_CASE("energy conservation holds for pipeline fingerprints (property)") {
    PipelineConfig cfg;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      DeviceProfile p;
      p.cfo_hz = 5e3 * g(rng);
      p.iq_gain_db = 0.3 * g(rng);
      p.dc_offset = {0.01 * g(rng), 0.01 * g(rng)};
      const auto raw = simulate_capture(p, cfg, static_cast<std::uint64_t>(t));
      const auto seg = acquire(raw, preamble_length(cfg.fs_hz, cfg.n_symbols), cfg.threshold_factor).segment;
      const auto fv = extract_spectral_feature(seg, cfg.n_fft);
      CHECK(linear_sum(fv.values) == doctest::Approx(mean_power(seg.samples)).epsilon(0.05));
    }
  }

  TEST_CASE("anti-alias filter attenuates the band edge and keeps the passband") {
    PipelineConfig on = quiet_pipeline();
    on.fs_hz = 4e6;
    on.n_fft = 256;
    PipelineConfig off = on;
    off.anti_alias = false;
    // Eight times the rate with the same bin width: aliasing there is negligible.
    PipelineConfig wide = off;
    wide.fs_hz = 32e6;
    wide.n_fft = 2048;
    const auto a = fingerprint_once(DeviceProfile{}, on, 1).values;
    const auto b = fingerprint_once(DeviceProfile{}, off, 1).values;
    const auto w = fingerprint_once(DeviceProfile{}, wide, 1).values;
    auto lin = [](double db) { return std::pow(10.0, db / 10.0); };

    double edge_on = 0.0, edge_off = 0.0;
    for (int k = 0; k < 256; ++k)
      if (std::abs(bin_frequency(k, 256, 4e6)) >= 0.48 * 4e6) {
        edge_on += lin(a[static_cast<std::size_t>(k)]);
        edge_off += lin(b[static_cast<std::size_t>(k)]);
      }
    CHECK(10.0 * std::log10(edge_on / edge_off) < -3.0);

    // Power in 16-bin bands across |f| <= 0.25 fs, against the wideband reference.
    double worst_on = 0.0, worst_off = 0.0;
    for (int start = -64; start < 64; start += 16) {
      double p_on = 0.0, p_off = 0.0, p_ref = 0.0;
      for (int k = start; k < start + 16; ++k) {
        const auto narrow = static_cast<std::size_t>(k < 0 ? k + 256 : k);
        const auto ref = static_cast<std::size_t>(k < 0 ? k + 2048 : k);
        p_on += lin(a[narrow]);
        p_off += lin(b[narrow]);
        p_ref += lin(w[ref]);
      }
      worst_on = std::max(worst_on, std::abs(10.0 * std::log10(p_on / p_ref)));
      worst_off = std::max(worst_off, std::abs(10.0 * std::log10(p_off / p_ref)));
    }
    CHECK(worst_on < 0.1);
    CHECK(worst_on < worst_off);
  }

  TEST_CASE("build_dataset shape and labels") {
    std::vector<DeviceProfile> devs(3);
    for (int i = 0; i < 3; ++i) {
      devs[static_cast<std::size_t>(i)].device_id = i;
      devs[static_cast<std::size_t>(i)].cfo_hz = 1e3 * i;
    }
    PipelineConfig cfg;
    cfg.n_fft = 128;
    const auto ds = build_dataset(devs, 10, cfg, 77, 1);
    CHECK(ds.rows() == 30);
    CHECK(ds.cols() == 128);
    for (int i = 0; i < 3; ++i)
      CHECK(std::count(ds.labels.begin(), ds.labels.end(), i) == 10);
    CHECK(ds.classes() == std::vector<int>{0, 1, 2});
    CHECK(ds.meta.n_fft == 128);
    CHECK(ds.meta.fs_hz == 4e6);
    CHECK(ds.meta.q_bits == 14);
  }

  TEST_CASE("build_dataset is identical for one or several workers") {
    std::vector<DeviceProfile> devs(2);
    devs[1].device_id = 5;
    devs[1].iq_phase_deg = 1.0;
    PipelineConfig cfg;
    cfg.n_fft = 64;
    const auto a = build_dataset(devs, 12, cfg, 9, 1);
    const auto b = build_dataset(devs, 12, cfg, 9, 3);
    const auto c = build_dataset(devs, 12, cfg, 10, 1);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.features != c.features);
  }

  TEST_CASE("a 50 kHz CFO difference shows up in the class means") {
    std::vector<DeviceProfile> devs(2);
    devs[1].device_id = 1;
    devs[1].cfo_hz = 50e3;
    PipelineConfig cfg;
    cfg.snr_db = 30.0;
    const auto ds = build_dataset(devs, 20, cfg, 3, 1);
    Eigen::RowVectorXd m0 = Eigen::RowVectorXd::Zero(cfg.n_fft), m1 = m0;
    for (std::size_t r = 0; r < ds.rows(); ++r)
      (ds.labels[r] == 0 ? m0 : m1) += ds.features.row(static_cast<Eigen::Index>(r)) / 20.0;
    CHECK((m0 - m1).cwiseAbs().maxCoeff() > 3.0);
  }

  TEST_CASE("build_dataset preconditions") {
    std::vector<DeviceProfile> one(1);
    CHECK_THROWS_AS(build_dataset(one, 10, PipelineConfig{}, 1, 1), std::invalid_argument);
    std::vector<DeviceProfile> two(2);
    two[1].device_id = 1;
    CHECK_THROWS_AS(build_dataset(two, 1, PipelineConfig{}, 1, 1), std::invalid_argument);
    PipelineConfig bad;
    bad.n_fft = 96;
    CHECK_THROWS_AS(build_dataset(two, 4, bad, 1, 1), std::invalid_argument);
  }

  TEST_CASE("dense labels and subsets") {
    FingerprintDataset ds;
    ds.features = FeatureMatrix::Random(5, 3);
    ds.labels = {7, 3, 7, 9, 3};
    CHECK(ds.classes() == std::vector<int>{3, 7, 9});
    CHECK(ds.dense_labels() == std::vector<int>{1, 0, 1, 2, 0});
    const std::vector<int> keep = {7, 9};
    const auto sub = ds.subset(keep);
    CHECK(sub.labels == std::vector<int>{7, 7, 9});
    CHECK(sub.features.row(1) == ds.features.row(2));
    ds.labels.pop_back();
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  }

  TEST_CASE("simulate_capture frames the burst with silence") {
    PipelineConfig cfg = quiet_pipeline();
    const auto cap = simulate_capture(DeviceProfile{}, cfg, 4);
    const auto burst_len = preamble_length(cfg.fs_hz, cfg.n_symbols);
    CHECK(cap.samples.size() >= burst_len + static_cast<std::size_t>(cfg.min_lead + cfg.tail));
    CHECK(cap.samples.size() <= burst_len + static_cast<std::size_t>(cfg.max_lead + cfg.tail));
    CHECK(cap.samples.front() == Sample{});
    CHECK(cap.samples.back() == Sample{});
  }
}
