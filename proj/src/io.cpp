#include "rffcap/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rffcap::io {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::int64_t kNoId = std::numeric_limits<std::int64_t>::min();

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw std::runtime_error("unexpected end of file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

void put_f32(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
double get_f32(std::istream& is) { return std::bit_cast<float>(get_le<std::uint32_t>(is)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

void expect_magic(std::istream& is, const char* magic) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw std::runtime_error(std::string("bad magic, expected ") + magic);
  if (get_le<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported file version");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 400> buf{};
  // Plain notation where it stays short; both forms are shortest round-trip.
  const double mag = std::abs(v);
  const auto fmt = v == 0.0 || (mag >= 1e-4 && mag < 1e15) ? std::chars_format::fixed
                                                            : std::chars_format::scientific;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt);
  return {buf.data(), res.ptr};
}

void write_capture(std::ostream& os, const IqCapture& capture) {
  os.write("RFFC", 4);
  put_le(os, kVersion);
  put_f64(os, capture.fs_hz);
  put_le(os, static_cast<std::uint64_t>(capture.samples.size()));
  put_le(os, static_cast<std::uint64_t>(capture.true_id ? *capture.true_id : kNoId));
  for (const auto& s : capture.samples) {
    put_f32(os, s.real());
    put_f32(os, s.imag());
  }
}

IqCapture read_capture(std::istream& is) {
  expect_magic(is, "RFFC");
  IqCapture cap;
  cap.fs_hz = get_f64(is);
  const auto count = get_le<std::uint64_t>(is);
  const auto id = static_cast<std::int64_t>(get_le<std::uint64_t>(is));
  if (id != kNoId) cap.true_id = static_cast<int>(id);
  cap.samples.resize(count);
  for (auto& s : cap.samples) {
    const double re = get_f32(is);
    s = {re, get_f32(is)};
  }
  return cap;
}

void write_capture(const std::string& path, const IqCapture& capture) {
  auto os = open_out(path);
  write_capture(os, capture);
}

IqCapture read_capture(const std::string& path) {
  auto is = open_in(path);
  return read_capture(is);
}

void write_dataset(std::ostream& os, const FingerprintDataset& ds) {
  os.write("RFFD", 4);
  put_le(os, kVersion);
  put_le(os, static_cast<std::uint64_t>(ds.rows()));
  put_le(os, static_cast<std::uint32_t>(ds.cols()));
  put_f64(os, ds.meta.fs_hz);
  put_le(os, static_cast<std::uint32_t>(ds.meta.n_fft));
  put_le(os, static_cast<std::uint8_t>(ds.meta.snr_db.has_value()));
  put_f64(os, ds.meta.snr_db.value_or(0.0));
  put_le(os, static_cast<std::uint32_t>(ds.meta.q_bits));
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) put_f32(os, ds.features(r, c));
  for (int label : ds.labels) put_le(os, static_cast<std::uint32_t>(label));
}

FingerprintDataset read_dataset(std::istream& is) {
  expect_magic(is, "RFFD");
  FingerprintDataset ds;
  const auto rows = get_le<std::uint64_t>(is);
  const auto cols = get_le<std::uint32_t>(is);
  ds.meta.fs_hz = get_f64(is);
  ds.meta.n_fft = static_cast<int>(get_le<std::uint32_t>(is));
  const bool has_snr = get_le<std::uint8_t>(is) != 0;
  const double snr = get_f64(is);
  if (has_snr) ds.meta.snr_db = snr;
  ds.meta.q_bits = static_cast<int>(get_le<std::uint32_t>(is));
  ds.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) ds.features(r, c) = get_f32(is);
  ds.labels.resize(rows);
  for (auto& label : ds.labels) label = static_cast<int>(get_le<std::uint32_t>(is));
  return ds;
}

void write_dataset(const std::string& path, const FingerprintDataset& dataset) {
  auto os = open_out(path);
  write_dataset(os, dataset);
}

FingerprintDataset read_dataset(const std::string& path) {
  auto is = open_in(path);
  return read_dataset(is);
}

void write_dataset_csv(std::ostream& os, const FingerprintDataset& ds) {
  for (std::size_t c = 0; c < ds.cols(); ++c) os << 'f' << c << ',';
  os << "label\n";
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) os << format_double(ds.features(r, c)) << ',';
    os << ds.labels[static_cast<std::size_t>(r)] << '\n';
  }
}

void write_mi_csv(std::ostream& os, const MiReport& report, double fs_hz) {
  const int n = static_cast<int>(report.per_bin_mi.size());
  os << "bin,freq_hz,mi_bits,h_x_bits\n";
  for (int k = 0; k < n; ++k)
    os << k << ',' << format_double(bin_frequency(k, n, fs_hz)) << ','
       << format_double(report.per_bin_mi[static_cast<std::size_t>(k)]) << ','
       << format_double(report.h_x[static_cast<std::size_t>(k)]) << '\n';
}

void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows) {
  os << "parameter,emi_bits,nc_at_1pct,nc_at_10pct,saturated,below_min\n";
  for (const auto& row : rows) {
    if (row.per_threshold.size() != 2)
      throw std::invalid_argument("capacity CSV expects exactly two thresholds");
    const auto& a = row.per_threshold[0];
    const auto& b = row.per_threshold[1];
    os << format_double(row.parameter) << ',' << format_double(row.emi_bits) << ',' << a.n_c << ','
       << b.n_c << ',' << (a.saturated || b.saturated) << ',' << (a.below_min || b.below_min)
       << '\n';
  }
}

void write_classification_csv(std::ostream& os, const ClassificationReport& report) {
  os << "sample,min_distance,assigned_id,true_id\n";
  for (std::size_t i = 0; i < report.n_test; ++i)
    os << i << ',' << format_double(report.min_distance_scores[i]) << ','
       << report.assigned_ids[i] << ',' << report.true_ids[i] << '\n';
}

}  // namespace rffcap::io
