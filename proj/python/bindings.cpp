#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <sstream>

#include "rffcap/capacity.hpp"
#include "rffcap/classifier.hpp"
#include "rffcap/config.hpp"
#include "rffcap/fingerprint.hpp"
#include "rffcap/harness.hpp"
#include "rffcap/infotheory.hpp"
#include "rffcap/signal_model.hpp"

namespace py = pybind11;
using namespace rffcap;

namespace {

FingerprintDataset make_dataset(const FeatureMatrix& features, std::vector<int> labels) {
  FingerprintDataset ds;
  ds.features = features;
  ds.labels = std::move(labels);
  return ds;
}

EmiProjection parse_projection(const std::string& name) {
  if (name == "crossfit_fisher") return EmiProjection::CrossFitFisher;
  if (name == "pca") return EmiProjection::Pca;
  throw std::invalid_argument("projection must be 'crossfit_fisher' or 'pca'");
}

}  // namespace

PYBIND11_MODULE(_rffcap, m) {
  m.doc() = "Radio-fingerprint simulation, information estimates and user capacity";

  py::class_<DeviceProfile>(m, "DeviceProfile")
      .def(py::init<>())
      .def_readwrite("device_id", &DeviceProfile::device_id)
      .def_readwrite("cfo_hz", &DeviceProfile::cfo_hz)
      .def_readwrite("iq_gain_db", &DeviceProfile::iq_gain_db)
      .def_readwrite("iq_phase_deg", &DeviceProfile::iq_phase_deg)
      .def_readwrite("clock_jitter_ppm", &DeviceProfile::clock_jitter_ppm)
      .def_readwrite("pa_alpha3", &DeviceProfile::pa_alpha3)
      .def_readwrite("dc_offset", &DeviceProfile::dc_offset)
      .def("validate", &DeviceProfile::validate)
      .def("__repr__", [](const DeviceProfile& p) {
        std::ostringstream os;
        os << "DeviceProfile(id=" << p.device_id << ", cfo_hz=" << p.cfo_hz << ")";
        return os.str();
      });

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("fs_hz", &PipelineConfig::fs_hz)
      .def_readwrite("n_symbols", &PipelineConfig::n_symbols)
      .def_readwrite("snr_db", &PipelineConfig::snr_db, "None means noiseless")
      .def_readwrite("q_bits", &PipelineConfig::q_bits)
      .def_readwrite("full_scale_vpp", &PipelineConfig::full_scale_vpp)
      .def_readwrite("n_fft", &PipelineConfig::n_fft)
      .def_readwrite("threshold_factor", &PipelineConfig::threshold_factor)
      .def_readwrite("rx_scale", &PipelineConfig::rx_scale)
      .def_readwrite("anti_alias", &PipelineConfig::anti_alias)
      .def("validate", &PipelineConfig::validate);

  m.def(
      "draw_population",
      [](int n_devices, std::uint64_t seed) {
        PopulationSpec spec;
        spec.n_devices = n_devices;
        return draw_population(spec, seed);
      },
      py::arg("n_devices"), py::arg("seed"), "Devices drawn with the default spreads");

  m.def("ideal_preamble", &ideal_preamble, py::arg("fs_hz"), py::arg("n_symbols") = 8);

  m.def(
      "simulate_capture",
      [](const DeviceProfile& p, const PipelineConfig& cfg, std::uint64_t seed) {
        return simulate_capture(p, cfg, seed).samples;
      },
      py::arg("profile"), py::arg("pipeline"), py::arg("seed"),
      "Complex baseband samples after channel and ADC");

  m.def(
      "build_dataset",
      [](const std::vector<DeviceProfile>& profiles, int per_class, const PipelineConfig& cfg,
         std::uint64_t seed, int threads) {
        auto ds = build_dataset(profiles, per_class, cfg, seed, threads);
        return py::make_tuple(std::move(ds.features), std::move(ds.labels));
      },
      py::arg("profiles"), py::arg("per_class"), py::arg("pipeline"), py::arg("seed"),
      py::arg("threads") = 1, "Returns (features [N x n_fft] in dB, labels)");

  m.def(
      "per_feature_mi",
      [](const FeatureMatrix& x, std::vector<int> labels, int bins) {
        return per_feature_mi(make_dataset(x, std::move(labels)), bins).per_bin_mi;
      },
      py::arg("features"), py::arg("labels"), py::arg("bins") = 64);

  m.def(
      "emi_kde",
      [](const FeatureMatrix& x, std::vector<int> labels, int projected_dim,
         const std::string& projection, int threads) {
        const auto e = emi_kde(make_dataset(x, std::move(labels)), projected_dim, threads,
                               parse_projection(projection));
        py::dict d;
        d["emi_bits"] = e.emi_bits;
        d["emi_raw"] = e.emi_bits_raw;
        d["projected_dim"] = e.projected_dim;
        d["bandwidths"] = e.bandwidths;
        d["n_samples"] = e.n_samples;
        d["n_classes"] = e.n_classes;
        return d;
      },
      py::arg("features"), py::arg("labels"), py::arg("projected_dim") = 10,
      py::arg("projection") = "crossfit_fisher", py::arg("threads") = 1);

  m.def(
      "fano_lower_bound", [](double emi, int n, double pe) { return fano_lower_bound(emi, n, pe).value; },
      py::arg("emi_bits"), py::arg("n_users"), py::arg("pe"));
  m.def(
      "fano_upper_bound", [](double emi, int n) { return fano_upper_bound(emi, n).value; },
      py::arg("emi_bits"), py::arg("n_users"));
  m.def("check_fano_consistency", &check_fano_consistency, py::arg("emi_bits"), py::arg("n_users"),
        py::arg("observed_pe"));

  m.def(
      "user_capacity",
      [](double emi, double threshold, int n_max) {
        const auto r = user_capacity(emi, threshold, n_max);
        py::dict d;
        d["n_c"] = r.n_c;
        d["saturated"] = r.saturated;
        d["below_min"] = r.below_min;
        return d;
      },
      py::arg("emi_bits"), py::arg("threshold"), py::arg("n_max") = kDefaultCapacityScan);

  m.def(
      "lda_error_rate",
      [](const FeatureMatrix& train_x, std::vector<int> train_y, const FeatureMatrix& test_x,
         std::vector<int> test_y, int kappa, int threads) {
        const auto model = fit_lda(make_dataset(train_x, std::move(train_y)), kappa);
        const auto rep = classify(model, make_dataset(test_x, std::move(test_y)), threads);
        py::dict d;
        d["pe"] = rep.pe;
        d["kappa_eff"] = model.kappa_eff;
        d["assigned_ids"] = rep.assigned_ids;
        d["min_distance"] = rep.min_distance_scores;
        return d;
      },
      py::arg("train_features"), py::arg("train_labels"), py::arg("test_features"),
      py::arg("test_labels"), py::arg("kappa") = 150, py::arg("threads") = 1);

  m.def(
      "run_sweep_csv",
      [](const std::string& config_json, int threads) {
        const auto cfg = parse_config(nlohmann::json::parse(config_json, nullptr, true, true));
        if (!cfg.sweep) throw std::invalid_argument("config has no sweep section");
        std::ostringstream os;
        write_sweep_csv(os, run_sweep(*cfg.sweep, cfg.sweep_with_classifier, threads), false);
        return os.str();
      },
      py::arg("config_json"), py::arg("threads") = 1,
      "Runs the sweep section of a JSON config and returns the CSV body");
}
