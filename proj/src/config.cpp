#include "rffcap/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace rffcap {

namespace {

using nlohmann::json;

// Reads keys from one JSON object and complains about keys nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      if (!doc.at(name_).is_object()) throw std::invalid_argument("config: '" + name_ + "' must be an object");
      obj_ = &doc.at(name_);
    }
  }
  Section(const json& obj, std::string name, bool) : obj_(&obj), name_(std::move(name)) {}

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (obj_ && obj_->contains(key)) {
      try {
        out = obj_->at(key).get<T>();
      } catch (const json::exception& e) {
        throw std::invalid_argument("config: " + name_ + "." + key + ": " + e.what());
      }
    }
  }

  void read(const char* key, ParamDistribution& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    Section sub(obj_->at(key), name_ + "." + key, true);
    sub.read("mean", out.mean);
    sub.read("stddev", out.stddev);
    sub.finish();
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return obj_ && obj_->contains(key) ? &obj_->at(key) : nullptr;
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, _] : obj_->items())
      if (!seen_.count(key)) throw std::invalid_argument("config: unknown key " + name_ + "." + key);
  }

 private:
  const json* obj_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

DeviceProfile parse_device(const json& j) {
  DeviceProfile p;
  Section s(j, "devices[]", true);
  s.read("device_id", p.device_id);
  s.read("cfo_hz", p.cfo_hz);
  s.read("iq_gain_db", p.iq_gain_db);
  s.read("iq_phase_deg", p.iq_phase_deg);
  s.read("clock_jitter_ppm", p.clock_jitter_ppm);
  s.read("pa_alpha3", p.pa_alpha3);
  double re = 0.0, im = 0.0;
  s.read("dc_offset_re", re);
  s.read("dc_offset_im", im);
  p.dc_offset = {re, im};
  s.finish();
  p.validate();
  return p;
}

}  // namespace

AppConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config root must be an object");
  static const std::set<std::string> kSections = {"seed", "population", "devices", "adc",
                                                  "channel", "signal", "feature", "estimator",
                                                  "classifier", "scenario", "sweep"};
  for (const auto& [key, _] : doc.items())
    if (!kSections.count(key)) throw std::invalid_argument("config: unknown section " + key);

  AppConfig cfg;
  auto& sc = cfg.scenario;
  if (doc.contains("seed")) sc.seed = doc.at("seed").get<std::uint64_t>();

  {
    Section s(doc, "population");
    s.read("n_devices", sc.population.n_devices);
    s.read("cfo_hz", sc.population.cfo_hz);
    s.read("iq_gain_db", sc.population.iq_gain_db);
    s.read("iq_phase_deg", sc.population.iq_phase_deg);
    s.read("clock_jitter_ppm", sc.population.clock_jitter_ppm);
    s.read("pa_alpha3", sc.population.pa_alpha3);
    s.read("dc_offset_re", sc.population.dc_offset_re);
    s.read("dc_offset_im", sc.population.dc_offset_im);
    s.finish();
  }
  if (doc.contains("devices")) {
    for (const auto& d : doc.at("devices")) sc.devices.push_back(parse_device(d));
  }
  {
    Section s(doc, "adc");
    s.read("q_bits", sc.pipeline.q_bits);
    s.read("full_scale_vpp", sc.pipeline.full_scale_vpp);
    s.finish();
  }
  {
    Section s(doc, "channel");
    if (const auto* snr = s.raw("snr_db")) {
      if (snr->is_string()) {
        if (snr->get<std::string>() != "noiseless")
          throw std::invalid_argument("config: channel.snr_db must be a number or \"noiseless\"");
        sc.pipeline.snr_db.reset();
      } else {
        sc.pipeline.snr_db = snr->get<double>();
      }
    }
    s.finish();
  }
  {
    Section s(doc, "signal");
    s.read("fs_hz", sc.pipeline.fs_hz);
    s.read("n_symbols", sc.pipeline.n_symbols);
    s.read("rx_scale", sc.pipeline.rx_scale);
    s.read("threshold_factor", sc.pipeline.threshold_factor);
    s.read("min_lead", sc.pipeline.min_lead);
    s.read("max_lead", sc.pipeline.max_lead);
    s.read("tail", sc.pipeline.tail);
    s.read("anti_alias", sc.pipeline.anti_alias);
    s.finish();
  }
  {
    Section s(doc, "feature");
    s.read("n_fft", sc.pipeline.n_fft);
    s.finish();
  }
  {
    Section s(doc, "estimator");
    s.read("per_class", sc.per_class);
    s.read("projected_dim", sc.projected_dim);
    s.read("mi_bins", sc.mi_bins);
    s.read("n_max", sc.n_max);
    s.read("emi_slack", sc.emi_slack);
    std::string projection = sc.emi_projection == EmiProjection::Pca ? "pca" : "crossfit_fisher";
    s.read("projection", projection);
    if (projection == "pca")
      sc.emi_projection = EmiProjection::Pca;
    else if (projection == "crossfit_fisher")
      sc.emi_projection = EmiProjection::CrossFitFisher;
    else
      throw std::invalid_argument("config: estimator.projection must be 'pca' or 'crossfit_fisher'");
    s.finish();
  }
  {
    Section s(doc, "classifier");
    s.read("kappa", sc.classifier.kappa);
    s.read("ridge_scale", sc.classifier.ridge_scale);
    s.read("train_per_class", sc.classifier.train_per_class);
    s.read("test_per_class", sc.classifier.test_per_class);
    s.read("n_classes", cfg.classify_n_classes);
    s.finish();
  }
  {
    Section s(doc, "scenario");
    s.read("n_train_devices", sc.n_train_devices);
    s.read("noise_scales_with_fs", sc.noise_scales_with_fs);
    s.read("keep_resolution_with_fs", sc.keep_resolution_with_fs);
    s.finish();
  }
  sc.pipeline.validate();

  if (doc.contains("sweep")) {
    Section s(doc, "sweep");
    SweepSpec spec;
    std::string axis = "snr_db";
    s.read("axis", axis);
    spec.axis = parse_axis(axis);
    s.read("values", spec.values);
    s.read("with_classifier", cfg.sweep_with_classifier);
    s.finish();
    spec.fixed = sc;
    spec.validate();
    cfg.sweep = std::move(spec);
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

namespace {

json bracket_json(const std::optional<BracketResult>& b) {
  if (!b) return nullptr;
  return {{"n_classes", b->n_classes},       {"pe_empirical", b->pe},
          {"emi_train", b->emi_train},       {"fano_lower", b->fano_lower},
          {"fano_upper_raw", b->fano_upper_raw}, {"consistent", b->consistent},
          {"kappa_eff", b->kappa_eff}};
}

}  // namespace

json to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"axis_value", r.axis_value},
                    {"seed", r.seed},
                    {"emi_bits", r.emi_bits},
                    {"emi_raw", r.emi_raw},
                    {"nc_1pct", r.nc_1pct},
                    {"nc_10pct", r.nc_10pct},
                    {"saturated", r.saturated},
                    {"below_min", r.below_min},
                    {"at_nc", bracket_json(r.at_nc)},
                    {"above_nc", bracket_json(r.above_nc)}});
  }
  json aborted = json::array();
  for (const auto& a : result.aborted) aborted.push_back({{"axis_value", a.axis_value}, {"reason", a.reason}});
  return {{"axis", std::string(axis_name(result.axis))}, {"rows", rows}, {"aborted", aborted}};
}

json to_json(const std::vector<BoundVerdict>& verdicts) {
  json out = json::array();
  for (const auto& v : verdicts)
    out.push_back({{"axis_value", v.axis_value}, {"n_classes", v.n_classes}, {"pe", v.pe},
                   {"emi_bits", v.emi_bits}, {"fano_lower", v.lower_bound},
                   {"margin", v.margin}, {"pass", v.pass}});
  return out;
}

}  // namespace rffcap
