#include <doctest.h>

#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rffcap/config.hpp"
#include "rffcap/io.hpp"

using namespace rffcap;
using nlohmann::json;

namespace {

float as_f32(double v) { return static_cast<float>(v); }

}  // namespace

TEST_SUITE("io_config") {
  TEST_CASE("capture round trip (property)") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 300);
    for (int t = 0; t < 50; ++t) {
      IqCapture cap;
      cap.fs_hz = 1e6 * (1 + t % 10);
      if (t % 3) cap.true_id = t * 7 - 20;
      cap.samples.resize(static_cast<std::size_t>(len(rng)));
      for (auto& s : cap.samples) s = {g(rng), g(rng)};
      std::stringstream ss;
      io::write_capture(ss, cap);
      CHECK(ss.str().size() == 4 + 4 + 8 + 8 + 8 + 8 * cap.samples.size());
      const auto back = io::read_capture(ss);
      CHECK(back.fs_hz == cap.fs_hz);
      CHECK(back.true_id == cap.true_id);
      REQUIRE(back.samples.size() == cap.samples.size());
      for (std::size_t i = 0; i < cap.samples.size(); ++i) {
        CHECK(back.samples[i].real() == as_f32(cap.samples[i].real()));
        CHECK(back.samples[i].imag() == as_f32(cap.samples[i].imag()));
      }
    }
  }

  TEST_CASE("capture layout is little-endian") {
    IqCapture cap;
    cap.fs_hz = 2.0;
    cap.samples = {{1.0, -1.0}};
    std::stringstream ss;
    io::write_capture(ss, cap);
    const auto bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "RFFC");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(bytes[5] == 0);
    // f64 2.0 = 0x4000000000000000
    CHECK(static_cast<unsigned char>(bytes[15]) == 0x40);
    CHECK(static_cast<unsigned char>(bytes[16]) == 1);  // count = 1
    // absent id is INT64_MIN: 0x8000000000000000
    CHECK(static_cast<unsigned char>(bytes[31]) == 0x80);
  }

  TEST_CASE("dataset round trip (property)") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 10.0);
    for (int t = 0; t < 20; ++t) {
      FingerprintDataset ds;
      const int rows = 1 + t * 3, cols = 1 + t % 7;
      ds.features.resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        ds.labels.push_back(r % 4 - 1);
        for (int c = 0; c < cols; ++c) ds.features(r, c) = g(rng);
      }
      ds.meta = {4e6, 256, t % 2 ? std::optional<double>(12.5) : std::nullopt, 10};
      std::stringstream ss;
      io::write_dataset(ss, ds);
      const auto back = io::read_dataset(ss);
      CHECK(back.labels == ds.labels);
      CHECK(back.meta.fs_hz == 4e6);
      CHECK(back.meta.n_fft == 256);
      CHECK(back.meta.snr_db == ds.meta.snr_db);
      CHECK(back.meta.q_bits == 10);
      REQUIRE(back.features.rows() == rows);
      REQUIRE(back.features.cols() == cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) CHECK(back.features(r, c) == as_f32(ds.features(r, c)));
    }
  }

  TEST_CASE("bad magic, version and truncation are rejected") {
    std::istringstream bad("XXXX\x01\x00\x00\x00");
    CHECK_THROWS(io::read_capture(bad));

    IqCapture cap;
    cap.fs_hz = 1.0;
    cap.samples = {{0.5, 0.5}, {0.25, 0.25}};
    std::stringstream ss;
    io::write_capture(ss, cap);
    auto bytes = ss.str();

    std::istringstream as_dataset(bytes);
    CHECK_THROWS(io::read_dataset(as_dataset));

    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS(io::read_capture(truncated));

    bytes[4] = 9;
    std::istringstream wrong_version(bytes);
    CHECK_THROWS(io::read_capture(wrong_version));

    CHECK_THROWS(io::read_capture(std::string("/nonexistent/dir/x.rffc")));
  }

  TEST_CASE("format_double round trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int t = 0; t < 1000; ++t) {
      const double v = u(rng) * std::pow(10.0, t % 20 - 10);
      CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(3.0) == "3");
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  }

  TEST_CASE("CSV headers") {
    FingerprintDataset ds;
    ds.features = FeatureMatrix::Constant(2, 3, 1.5);
    ds.labels = {4, 7};
    std::ostringstream a;
    io::write_dataset_csv(a, ds);
    CHECK(a.str() == "f0,f1,f2,label\n1.5,1.5,1.5,4\n1.5,1.5,1.5,7\n");

    MiReport mi;
    mi.per_bin_mi = {0.1, 0.2, 0.3, 0.4};
    mi.h_x = {1, 1, 1, 1};
    std::ostringstream b;
    io::write_mi_csv(b, mi, 4e6);
    CHECK(b.str().rfind("bin,freq_hz,mi_bits,h_x_bits\n0,0,0.1,1\n1,1000000,0.2,1\n2,", 0) == 0);

    const std::vector<double> th = {0.01, 0.10};
    const std::vector<std::pair<double, double>> series = {{20.0, 3.5}};
    std::ostringstream c;
    io::write_capacity_csv(c, capacity_curve(series, th, 1000));
    CHECK(c.str().rfind("parameter,emi_bits,nc_at_1pct,nc_at_10pct,saturated,below_min\n20,3.5,12,", 0) == 0);

    const std::vector<double> one = {0.01};
    std::ostringstream d;
    CHECK_THROWS_AS(io::write_capacity_csv(d, capacity_curve(series, one, 1000)), std::invalid_argument);

    ClassificationReport rep;
    rep.n_test = 1;
    rep.min_distance_scores = {0.25};
    rep.assigned_ids = {3};
    rep.true_ids = {2};
    std::ostringstream e;
    io::write_classification_csv(e, rep);
    CHECK(e.str() == "sample,min_distance,assigned_id,true_id\n0,0.25,3,2\n");
  }

  TEST_CASE("empty config gives defaults") {
    const auto cfg = parse_config(json::object());
    const ScenarioConfig def;
    CHECK(cfg.scenario.seed == def.seed);
    CHECK(cfg.scenario.pipeline.fs_hz == def.pipeline.fs_hz);
    CHECK(cfg.scenario.pipeline.anti_alias);
    CHECK(cfg.scenario.emi_projection == EmiProjection::CrossFitFisher);
    CHECK_FALSE(cfg.sweep.has_value());
  }

  TEST_CASE("config values are applied") {
    const auto doc = json::parse(R"({
      "seed": 9,
      "population": {"n_devices": 12, "cfo_hz": {"mean": 10, "stddev": 500}},
      "adc": {"q_bits": 10},
      "channel": {"snr_db": "noiseless"},
      "signal": {"fs_hz": 8e6, "anti_alias": false},
      "feature": {"n_fft": 1024},
      "estimator": {"per_class": 50, "projection": "pca"},
      "classifier": {"kappa": 20, "n_classes": 5},
      "scenario": {"n_train_devices": 7, "keep_resolution_with_fs": true},
      "sweep": {"axis": "q_bits", "values": [8, 12], "with_classifier": true}
    })");
    const auto cfg = parse_config(doc);
    const auto& sc = cfg.scenario;
    CHECK(sc.seed == 9);
    CHECK(sc.population.n_devices == 12);
    CHECK(sc.population.cfo_hz.mean == 10);
    CHECK(sc.population.cfo_hz.stddev == 500);
    CHECK(sc.pipeline.q_bits == 10);
    CHECK_FALSE(sc.pipeline.snr_db.has_value());
    CHECK(sc.pipeline.fs_hz == 8e6);
    CHECK_FALSE(sc.pipeline.anti_alias);
    CHECK(sc.pipeline.n_fft == 1024);
    CHECK(sc.per_class == 50);
    CHECK(sc.emi_projection == EmiProjection::Pca);
    CHECK(sc.classifier.kappa == 20);
    CHECK(cfg.classify_n_classes == 5);
    CHECK(sc.n_train_devices == 7);
    CHECK(sc.keep_resolution_with_fs);
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.sweep->axis == SweepAxis::QBits);
    CHECK(cfg.sweep->values == std::vector<double>{8, 12});
    CHECK(cfg.sweep->fixed.seed == 9);
    CHECK(cfg.sweep_with_classifier);
  }

  TEST_CASE("explicit devices replace the population") {
    const auto cfg = parse_config(json::parse(R"({"devices": [
      {"device_id": 3, "cfo_hz": 1000, "dc_offset_re": 0.01},
      {"device_id": 4, "iq_gain_db": 0.5}]})"));
    const auto devs = cfg.scenario.profiles();
    REQUIRE(devs.size() == 2);
    CHECK(devs[0].device_id == 3);
    CHECK(devs[0].dc_offset.real() == 0.01);
    CHECK(devs[1].iq_gain_db == 0.5);
  }

  TEST_CASE("bad configs are rejected") {
    for (const char* text : {
             R"({"adc": {"qbits": 10}})",
             R"({"extra": {}})",
             R"({"adc": 5})",
             R"({"channel": {"snr_db": "loud"}})",
             R"({"estimator": {"projection": "lda"}})",
             R"({"population": {"cfo_hz": {"mean": 0, "sigma": 1}}})",
             R"({"devices": [{"device_id": 1, "color": 2}]})",
             R"({"adc": {"q_bits": "ten"}})",
             R"({"sweep": {"axis": "snr_db", "values": [20, 10]}})",
             R"({"sweep": {"axis": "volume", "values": [1]}})",
             R"([1, 2])",
         }) {
      CAPTURE(text);
      CHECK_THROWS_AS(parse_config(json::parse(text)), std::invalid_argument);
    }
    CHECK_THROWS(load_config("/nonexistent/config.json"));
  }

  TEST_CASE("sweep results serialise to JSON") {
    SweepResult r;
    r.axis = SweepAxis::SnrDb;
    SweepRow row;
    row.axis_value = 10;
    row.nc_1pct = 4;
    r.rows = {row};
    r.aborted = {{20, "boom"}};
    const auto j = to_json(r);
    CHECK(j["axis"] == "snr_db");
    CHECK(j["rows"][0]["nc_1pct"] == 4);
    CHECK(j["rows"][0]["at_nc"].is_null());
    CHECK(j["aborted"][0]["reason"] == "boom");
  }
}
