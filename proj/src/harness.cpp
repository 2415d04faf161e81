#include "rffcap/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rffcap/capacity.hpp"
#include "rffcap/common.hpp"
#include "rffcap/infotheory.hpp"
#include "rffcap/io.hpp"

namespace rffcap {

namespace {

constexpr std::string_view kAxisNames[] = {"n_train_devices", "snr_db", "q_bits", "n_fft", "fs_hz"};

int as_int(double v) { return static_cast<int>(std::lround(v)); }

int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

const char* const kSweepColumns =
    "axis,axis_value,seed,emi_bits,emi_raw,nc_1pct,nc_10pct,saturated,below_min,"
    "n_classes,pe_empirical,emi_train,fano_lower,fano_upper_raw,consistent,"
    "n_classes_hi,pe_hi,emi_train_hi,fano_lower_hi,consistent_hi";

void write_bracket(std::ostream& os, const std::optional<BracketResult>& b, bool with_upper) {
  if (!b) {
    os << (with_upper ? ",,,,,," : ",,,,,");
    return;
  }
  os << ',' << b->n_classes << ',' << io::format_double(b->pe) << ','
     << io::format_double(b->emi_train) << ',' << io::format_double(b->fano_lower);
  if (with_upper) os << ',' << io::format_double(b->fano_upper_raw);
  os << ',' << (b->consistent ? 1 : 0);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<DeviceProfile> ScenarioConfig::profiles() const {
  if (!devices.empty()) return devices;
  return draw_population(population, seed);
}

std::string_view axis_name(SweepAxis axis) { return kAxisNames[static_cast<int>(axis)]; }

SweepAxis parse_axis(std::string_view name) {
  for (int i = 0; i < 5; ++i)
    if (kAxisNames[i] == name) return static_cast<SweepAxis>(i);
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1]))
      throw std::invalid_argument("sweep values must be strictly increasing");
  for (double v : values) {
    bool ok = std::isfinite(v);
    switch (axis) {
      case SweepAxis::NTrainDevices:
        ok = ok && v >= 2 && v == std::round(v) && as_int(v) <= static_cast<int>(fixed.profiles().size());
        break;
      case SweepAxis::SnrDb:
        break;
      case SweepAxis::QBits:
        ok = ok && v >= 4 && v <= 24 && v == std::round(v);
        break;
      case SweepAxis::NFft:
        ok = ok && v >= 64 && v <= 2048 && std::has_single_bit(static_cast<unsigned>(as_int(v)));
        break;
      case SweepAxis::FsHz:
        ok = ok && v >= 2e6 && v <= 10e6;
        break;
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "sweep value " << v << " is outside the valid range of axis " << axis_name(axis);
      throw std::invalid_argument(msg.str());
    }
  }
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
  ScenarioConfig s = base;
  switch (axis) {
    case SweepAxis::NTrainDevices:
      s.n_train_devices = as_int(value);
      break;
    case SweepAxis::SnrDb:
      s.pipeline.snr_db = value;
      break;
    case SweepAxis::QBits:
      s.pipeline.q_bits = as_int(value);
      break;
    case SweepAxis::NFft:
      s.pipeline.n_fft = as_int(value);
      break;
    case SweepAxis::FsHz: {
      const double ratio = value / base.pipeline.fs_hz;
      s.pipeline.fs_hz = value;
      if (base.noise_scales_with_fs && base.pipeline.snr_db)
        s.pipeline.snr_db = *base.pipeline.snr_db - 10.0 * std::log10(ratio);
      if (base.keep_resolution_with_fs)
        s.pipeline.n_fft = std::clamp(next_pow2(as_int(base.pipeline.n_fft * ratio)), 64, 4096);
      break;
    }
  }
  return s;
}

std::uint64_t point_seed(std::uint64_t master, SweepAxis axis, double value) {
  return derive_seed(master, static_cast<std::uint64_t>(axis), std::bit_cast<std::uint64_t>(value));
}

FingerprintDataset training_dataset(const ScenarioConfig& scenario, std::uint64_t seed,
                                    int threads) {
  const auto population = scenario.profiles();
  if (scenario.n_train_devices < 2 ||
      scenario.n_train_devices > static_cast<int>(population.size()))
    throw std::invalid_argument("n_train_devices must lie in [2, population size]");
  const std::span<const DeviceProfile> train_devices(
      population.data(), static_cast<std::size_t>(scenario.n_train_devices));
  return build_dataset(train_devices, scenario.per_class, scenario.pipeline,
                       derive_seed(seed, 0x656d69ULL), threads);
}

SweepRow evaluate_point(const ScenarioConfig& scenario, double axis_value, std::uint64_t seed,
                        bool with_classifier, int threads) {
  const auto population = scenario.profiles();
  SweepRow row;
  row.axis_value = axis_value;
  row.seed = seed;

  const auto ds = training_dataset(scenario, seed, threads);
  const auto emi = emi_kde(ds, scenario.projected_dim, threads, scenario.emi_projection);
  row.emi_bits = emi.emi_bits;
  row.emi_raw = emi.emi_bits_raw;
  const auto c1 = user_capacity(emi.emi_bits, 0.01, scenario.n_max);
  const auto c10 = user_capacity(emi.emi_bits, 0.10, scenario.n_max);
  row.nc_1pct = c1.n_c;
  row.nc_10pct = c10.n_c;
  row.saturated = c1.saturated || c10.saturated;
  row.below_min = c1.below_min || c10.below_min;

  if (!with_classifier) return row;

  const int pop = static_cast<int>(population.size());
  if (pop < 3) throw std::invalid_argument("classifier bracketing needs at least 3 devices");
  auto run = [&](int n_classes) {
    const auto out = error_rate_experiment(population, n_classes, scenario.pipeline,
                                           scenario.classifier,
                                           derive_seed(seed, 0x636c73ULL, n_classes), false, threads);
    BracketResult b;
    b.n_classes = n_classes;
    b.pe = out.report.pe;
    b.kappa_eff = out.kappa_eff;
    b.emi_train = emi_kde(out.train, scenario.projected_dim, threads, scenario.emi_projection).emi_bits;
    b.fano_lower = fano_lower_bound(b.emi_train, n_classes, b.pe).value;
    b.fano_upper_raw = fano_upper_bound(b.emi_train, n_classes).raw;
    b.consistent = b.fano_lower <= b.pe;
    return b;
  };
  const int lo = std::clamp(row.nc_1pct, 3, pop);
  row.at_nc = run(lo);
  if (lo + 1 <= pop) row.above_nc = run(lo + 1);
  return row;
}

SweepResult run_sweep(const SweepSpec& spec, bool with_classifier, int threads) {
  spec.validate();
  SweepResult result;
  result.axis = spec.axis;
  for (double value : spec.values) {
    try {
      const auto scenario = apply_axis(spec.fixed, spec.axis, value);
      result.rows.push_back(evaluate_point(scenario, value,
                                           point_seed(spec.fixed.seed, spec.axis, value),
                                           with_classifier, threads));
    } catch (const std::exception& e) {
      result.aborted.push_back({value, e.what()});
    }
  }
  return result;
}

std::vector<BoundVerdict> validate_bounds(const std::vector<SweepRow>& rows, double slack) {
  std::vector<BoundVerdict> out;
  for (const auto& row : rows) {
    if (!row.at_nc) throw std::invalid_argument("validate_bounds needs rows with empirical pe");
    for (const auto* b : {&row.at_nc, &row.above_nc}) {
      if (!*b) continue;
      BoundVerdict v;
      v.axis_value = row.axis_value;
      v.n_classes = (*b)->n_classes;
      v.pe = (*b)->pe;
      v.emi_bits = (*b)->emi_train;
      v.lower_bound = fano_lower_bound(v.emi_bits + slack, v.n_classes, v.pe).value;
      v.margin = v.pe - v.lower_bound;
      v.pass = v.lower_bound <= v.pe;
      out.push_back(v);
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result, bool timestamp_line) {
  if (timestamp_line) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  }
  os << kSweepColumns << '\n';
  const auto axis = axis_name(result.axis);
  for (const auto& r : result.rows) {
    os << axis << ',' << io::format_double(r.axis_value) << ',' << r.seed << ','
       << io::format_double(r.emi_bits) << ',' << io::format_double(r.emi_raw) << ',' << r.nc_1pct
       << ',' << r.nc_10pct << ',' << (r.saturated ? 1 : 0) << ',' << (r.below_min ? 1 : 0);
    write_bracket(os, r.at_nc, true);
    write_bracket(os, r.above_nc, false);
    os << '\n';
  }
}

SweepResult read_sweep_csv(std::istream& is) {
  SweepResult result;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kSweepColumns) throw std::runtime_error("unexpected sweep CSV header");
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 20) throw std::runtime_error("malformed sweep CSV row: " + line);
    result.axis = parse_axis(cells[0]);
    SweepRow r;
    r.axis_value = std::stod(cells[1]);
    r.seed = std::stoull(cells[2]);
    r.emi_bits = std::stod(cells[3]);
    r.emi_raw = std::stod(cells[4]);
    r.nc_1pct = std::stoi(cells[5]);
    r.nc_10pct = std::stoi(cells[6]);
    r.saturated = cells[7] == "1";
    r.below_min = cells[8] == "1";
    if (!cells[9].empty()) {
      BracketResult b;
      b.n_classes = std::stoi(cells[9]);
      b.pe = std::stod(cells[10]);
      b.emi_train = std::stod(cells[11]);
      b.fano_lower = std::stod(cells[12]);
      b.fano_upper_raw = std::stod(cells[13]);
      b.consistent = cells[14] == "1";
      r.at_nc = b;
    }
    if (!cells[15].empty()) {
      BracketResult b;
      b.n_classes = std::stoi(cells[15]);
      b.pe = std::stod(cells[16]);
      b.emi_train = std::stod(cells[17]);
      b.fano_lower = std::stod(cells[18]);
      b.consistent = cells[19] == "1";
      b.fano_upper_raw = fano_upper_bound(b.emi_train, b.n_classes).raw;
      r.above_nc = b;
    }
    result.rows.push_back(r);
  }
  if (!header_seen) throw std::runtime_error("sweep CSV has no header");
  return result;
}

void write_verdict_csv(std::ostream& os, const std::vector<BoundVerdict>& verdicts) {
  os << "axis_value,n_classes,pe,emi_bits,fano_lower,margin,pass\n";
  for (const auto& v : verdicts)
    os << io::format_double(v.axis_value) << ',' << v.n_classes << ',' << io::format_double(v.pe)
       << ',' << io::format_double(v.emi_bits) << ',' << io::format_double(v.lower_bound) << ','
       << io::format_double(v.margin) << ',' << (v.pass ? "pass" : "fail") << '\n';
}

}  // namespace rffcap
