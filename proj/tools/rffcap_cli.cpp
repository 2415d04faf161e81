// rffcap command-line front end. Run `rffcap --help` for the subcommands.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rffcap/capacity.hpp"
#include "rffcap/classifier.hpp"
#include "rffcap/common.hpp"
#include "rffcap/config.hpp"
#include "rffcap/harness.hpp"
#include "rffcap/infotheory.hpp"
#include "rffcap/io.hpp"

namespace {

using nlohmann::json;
using namespace rffcap;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  std::string format = "csv";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output path, '-' for stdout");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

AppConfig load(const Common& c) {
  AppConfig cfg = c.config.empty() ? parse_config(json::object()) : load_config(c.config);
  if (c.seed) {
    cfg.scenario.seed = *c.seed;
    if (cfg.sweep) cfg.sweep->fixed.seed = *c.seed;
  }
  return cfg;
}

// Writes to --out, or stdout for "-".
template <typename Fn>
void emit(const Common& c, Fn&& write) {
  if (c.out == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(c.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + c.out + " for writing");
  write(os);
  if (!os) throw std::runtime_error("write to " + c.out + " failed");
}

void emit_json(const Common& c, const json& j) {
  emit(c, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// A dataset file when given, otherwise the scenario's training dataset.
FingerprintDataset dataset_for(const AppConfig& cfg, const std::string& path, int threads) {
  if (!path.empty()) return io::read_dataset(path);
  return training_dataset(cfg.scenario, cfg.scenario.seed, threads);
}

json dataset_json(const FingerprintDataset& ds) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    std::vector<double> v(ds.features.row(r).begin(), ds.features.row(r).end());
    rows.push_back(std::move(v));
  }
  json meta = {{"fs_hz", ds.meta.fs_hz}, {"n_fft", ds.meta.n_fft}, {"q_bits", ds.meta.q_bits}};
  meta["snr_db"] = ds.meta.snr_db ? json(*ds.meta.snr_db) : json("noiseless");
  return {{"meta", meta}, {"labels", ds.labels}, {"features", rows}};
}

json emi_json(const EmiEstimate& e) {
  return {{"emi_bits", e.emi_bits},       {"emi_raw", e.emi_bits_raw},
          {"projected_dim", e.projected_dim}, {"bandwidths", e.bandwidths},
          {"n_samples", e.n_samples},     {"n_classes", e.n_classes}};
}

const std::vector<double> kThresholds = {0.01, 0.10};

json capacity_json(const std::vector<CapacityRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"parameter", r.parameter},
                   {"emi_bits", r.emi_bits},
                   {"nc_at_1pct", r.per_threshold[0].n_c},
                   {"nc_at_10pct", r.per_threshold[1].n_c},
                   {"saturated", r.per_threshold[0].saturated || r.per_threshold[1].saturated},
                   {"below_min", r.per_threshold[0].below_min || r.per_threshold[1].below_min}});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radio-fingerprint user-capacity toolkit"};
  app.require_subcommand(1);

  Common common;

  auto* simulate = app.add_subcommand("simulate", "Emit a fingerprint dataset or raw captures");
  add_common(simulate, common);
  bool raw_captures = false;
  simulate->add_flag("--captures", raw_captures,
                     "Write raw captures (<out>/dev<id>_<k>.rffc) instead of a dataset");

  std::string dataset_path;
  auto* mi = app.add_subcommand("mi", "Per-bin mutual information of the spectral feature");
  add_common(mi, common);
  mi->add_option("--dataset", dataset_path, "Dataset file (.rffd); simulated when omitted");

  auto* emi = app.add_subcommand("emi", "Ensemble mutual information of the feature vector");
  add_common(emi, common);
  emi->add_option("--dataset", dataset_path, "Dataset file (.rffd); simulated when omitted");

  std::vector<double> emi_values;
  auto* capacity = app.add_subcommand("capacity", "User capacity at 1% and 10% error");
  add_common(capacity, common);
  capacity->add_option("--emi", emi_values, "EMI values in bits; dataset EMI when omitted");
  capacity->add_option("--dataset", dataset_path, "Dataset file (.rffd)");

  bool shuffle = false;
  int n_classes = 0;
  auto* classify_cmd = app.add_subcommand("classify", "Fisher LDA + Mahalanobis error rate");
  add_common(classify_cmd, common);
  classify_cmd->add_option("--classes", n_classes, "Number of classes (default from config)");
  classify_cmd->add_flag("--shuffle-labels", shuffle, "Shuffle training labels (chance check)");

  bool with_classifier = false;
  std::string axis;
  std::vector<double> values;
  bool no_timestamp = false;
  auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "n_train_devices | snr_db | q_bits | n_fft | fs_hz");
  sweep->add_option("--values", values, "Axis values (strictly increasing)");
  sweep->add_flag("--with-classifier", with_classifier, "Bracket capacity with classifier runs");
  sweep->add_flag("--no-timestamp", no_timestamp, "Omit the '# generated' CSV line");

  std::string sweep_csv;
  std::optional<double> slack;
  auto* validate = app.add_subcommand("validate", "Check Fano consistency of a sweep CSV");
  add_common(validate, common);
  validate->add_option("--in", sweep_csv, "Sweep CSV produced with --with-classifier")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--slack", slack, "EMI slack in bits (default from config)");

  CLI11_PARSE(app, argc, argv);

  try {
    const AppConfig cfg = load(common);
    const bool as_json = common.format == "json";
    const int threads = common.threads;

    if (simulate->parsed()) {
      if (raw_captures) {
        if (common.out == "-") throw std::invalid_argument("--captures needs --out <directory>");
        std::filesystem::create_directories(common.out);
        const auto profiles = cfg.scenario.profiles();
        const auto n_dev = static_cast<std::size_t>(cfg.scenario.n_train_devices);
        if (n_dev > profiles.size())
          throw std::invalid_argument("n_train_devices exceeds the population");
        for (std::size_t d = 0; d < n_dev; ++d)
          for (int k = 0; k < cfg.scenario.per_class; ++k) {
            const auto& p = profiles[d];
            const auto seed = derive_seed(cfg.scenario.seed, static_cast<std::uint64_t>(p.device_id),
                                          static_cast<std::uint64_t>(k));
            const auto path = std::filesystem::path(common.out) /
                              ("dev" + std::to_string(p.device_id) + "_" + std::to_string(k) + ".rffc");
            io::write_capture(path.string(), simulate_capture(p, cfg.scenario.pipeline, seed));
          }
        return 0;
      }
      const auto ds = training_dataset(cfg.scenario, cfg.scenario.seed, threads);
      if (common.out != "-" && std::filesystem::path(common.out).extension() == ".rffd")
        io::write_dataset(common.out, ds);
      else if (as_json)
        emit_json(common, dataset_json(ds));
      else
        emit(common, [&](std::ostream& os) { io::write_dataset_csv(os, ds); });
      return 0;
    }

    if (mi->parsed()) {
      const auto ds = dataset_for(cfg, dataset_path, threads);
      const auto rep = per_feature_mi(ds, cfg.scenario.mi_bins);
      if (as_json) {
        json rows = json::array();
        for (std::size_t b = 0; b < rep.per_bin_mi.size(); ++b)
          rows.push_back({{"bin", b},
                          {"freq_hz", bin_frequency(static_cast<int>(b), ds.meta.n_fft, ds.meta.fs_hz)},
                          {"mi_bits", rep.per_bin_mi[b]},
                          {"h_x_bits", rep.h_x[b]}});
        emit_json(common, rows);
      } else {
        emit(common, [&](std::ostream& os) { io::write_mi_csv(os, rep, ds.meta.fs_hz); });
      }
      return 0;
    }

    if (emi->parsed()) {
      const auto ds = dataset_for(cfg, dataset_path, threads);
      const auto e = emi_kde(ds, cfg.scenario.projected_dim, threads, cfg.scenario.emi_projection);
      if (as_json) {
        emit_json(common, emi_json(e));
      } else {
        emit(common, [&](std::ostream& os) {
          os << "emi_bits,emi_raw,projected_dim,n_samples,n_classes\n"
             << io::format_double(e.emi_bits) << ',' << io::format_double(e.emi_bits_raw) << ','
             << e.projected_dim << ',' << e.n_samples << ',' << e.n_classes << '\n';
        });
      }
      return 0;
    }

    if (capacity->parsed()) {
      std::vector<std::pair<double, double>> series;
      if (emi_values.empty()) {
        const auto ds = dataset_for(cfg, dataset_path, threads);
        const auto e = emi_kde(ds, cfg.scenario.projected_dim, threads, cfg.scenario.emi_projection);
        series.emplace_back(static_cast<double>(e.n_classes), e.emi_bits);
      } else {
        for (std::size_t i = 0; i < emi_values.size(); ++i)
          series.emplace_back(static_cast<double>(i), emi_values[i]);
      }
      const auto rows = capacity_curve(series, kThresholds, cfg.scenario.n_max);
      if (as_json)
        emit_json(common, capacity_json(rows));
      else
        emit(common, [&](std::ostream& os) { io::write_capacity_csv(os, rows); });
      return 0;
    }

    if (classify_cmd->parsed()) {
      int c = n_classes ? n_classes : cfg.classify_n_classes;
      if (c == 0) c = cfg.scenario.n_train_devices;
      const auto out = error_rate_experiment(cfg.scenario.profiles(), c, cfg.scenario.pipeline,
                                             cfg.scenario.classifier, cfg.scenario.seed, shuffle,
                                             threads);
      const auto& rep = out.report;
      std::cerr << "classes=" << c << " kappa_eff=" << out.kappa_eff << " pe=" << rep.pe << " ("
                << rep.n_errors << "/" << rep.n_test << ")\n";
      if (as_json) {
        json samples = json::array();
        for (std::size_t i = 0; i < rep.n_test; ++i)
          samples.push_back({{"sample", i},
                             {"min_distance", rep.min_distance_scores[i]},
                             {"assigned_id", rep.assigned_ids[i]},
                             {"true_id", rep.true_ids[i]}});
        emit_json(common, {{"pe", rep.pe},
                           {"n_test", rep.n_test},
                           {"n_errors", rep.n_errors},
                           {"kappa_eff", out.kappa_eff},
                           {"class_ids", rep.class_ids},
                           {"per_class_errors", rep.per_class_errors},
                           {"confusion", rep.confusion},
                           {"samples", samples}});
      } else {
        emit(common, [&](std::ostream& os) { io::write_classification_csv(os, rep); });
      }
      return 0;
    }

    if (sweep->parsed()) {
      SweepSpec spec;
      if (cfg.sweep) spec = *cfg.sweep;
      spec.fixed = cfg.scenario;
      if (!axis.empty()) spec.axis = parse_axis(axis);
      if (!values.empty()) spec.values = values;
      if (spec.values.empty()) throw std::invalid_argument("sweep: no values (config sweep.values or --values)");
      const bool bracket = with_classifier || cfg.sweep_with_classifier;
      const auto result = run_sweep(spec, bracket, threads);
      for (const auto& a : result.aborted)
        std::cerr << "aborted " << axis_name(result.axis) << "=" << a.axis_value << ": " << a.reason << '\n';
      if (as_json)
        emit_json(common, to_json(result));
      else
        emit(common, [&](std::ostream& os) { write_sweep_csv(os, result, !no_timestamp); });
      return result.rows.empty() ? 1 : 0;
    }

    if (validate->parsed()) {
      std::ifstream is(sweep_csv);
      const auto result = read_sweep_csv(is);
      const auto verdicts = validate_bounds(result.rows, slack.value_or(cfg.scenario.emi_slack));
      if (verdicts.empty()) throw std::invalid_argument("validate: the sweep has no classifier runs");
      if (as_json)
        emit_json(common, to_json(verdicts));
      else
        emit(common, [&](std::ostream& os) { write_verdict_csv(os, verdicts); });
      const bool all_pass =
          std::all_of(verdicts.begin(), verdicts.end(), [](const BoundVerdict& v) { return v.pass; });
      return all_pass ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
