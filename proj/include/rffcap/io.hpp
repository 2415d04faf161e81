#pragma once

#include <iosfwd>
#include <string>

#include "rffcap/capacity.hpp"
#include "rffcap/classifier.hpp"
#include "rffcap/fingerprint.hpp"
#include "rffcap/infotheory.hpp"
#include "rffcap/signal_model.hpp"

namespace rffcap::io {

// Binary layouts are little-endian regardless of host.
//
// Capture (.rffc):
//   char[4] "RFFC" | u32 version=1 | f64 fs_hz | u64 count | i64 true_id
//   | count x (f32 I, f32 Q)
// true_id is INT64_MIN when absent.
//
// Dataset (.rffd):
//   char[4] "RFFD" | u32 version=1 | u64 n_rows | u32 m | f64 fs_hz | u32 n_fft
//   | u8 has_snr | f64 snr_db | u32 q_bits | n_rows x m f32 (row-major)
//   | n_rows x i32 labels

void write_capture(std::ostream& os, const IqCapture& capture);
IqCapture read_capture(std::istream& is);
void write_capture(const std::string& path, const IqCapture& capture);
IqCapture read_capture(const std::string& path);

void write_dataset(std::ostream& os, const FingerprintDataset& dataset);
FingerprintDataset read_dataset(std::istream& is);
void write_dataset(const std::string& path, const FingerprintDataset& dataset);
FingerprintDataset read_dataset(const std::string& path);

/// One row per sample, columns f0..f{M-1} then label.
void write_dataset_csv(std::ostream& os, const FingerprintDataset& dataset);

/// bin,freq_hz,mi_bits,h_x_bits
void write_mi_csv(std::ostream& os, const MiReport& report, double fs_hz);

/// parameter,emi_bits,nc_at_1pct,nc_at_10pct,saturated,below_min
/// `rows` must have been computed with thresholds {0.01, 0.10}.
void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows);

/// sample,min_distance,assigned_id,true_id
void write_classification_csv(std::ostream& os, const ClassificationReport& report);

/// Shortest round-trip decimal representation, used by every CSV writer.
std::string format_double(double v);

}  // namespace rffcap::io
