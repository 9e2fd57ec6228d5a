// On-disk recording formats.
//
// CSV: first line "fs=<Hz>", second line comma-separated channel names,
// then one row per sample (columns = channels).
//
// Binary: magic "SPDT", version byte 0x01, u32 n_channels, u64 n_samples,
// f64 sampling rate, then n*T little-endian doubles row-major (one row per
// channel).

#pragma once

#include <string>

#include "spdtan/signal.hpp"

namespace spdtan {

void save_recording_csv(const std::string& path, const Recording& rec);
Recording load_recording_csv(const std::string& path);

void save_recording_binary(const std::string& path, const Recording& rec);
Recording load_recording_binary(const std::string& path);

}  // namespace spdtan
