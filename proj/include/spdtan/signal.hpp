// Raw multichannel recordings to per-segment matrices: stationarity-driven
// segmentation (augmented Dickey-Fuller), band-pass filter bank, and
// spatial / spatiofrequential signal assembly.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "spdtan/butterworth.hpp"
#include "spdtan/spd_core.hpp"

namespace spdtan {

/// Multichannel time series. data is n_channels x n_samples.
struct Recording {
    std::vector<std::string> channels;
    double samples_per_second = 0.0;
    Matrix data;
    std::string paradigm;  // free text, e.g. "EC" or "WLT"

    int n_channels() const { return static_cast<int>(data.rows()); }
    long n_samples() const { return static_cast<long>(data.cols()); }
    double duration_seconds() const {
        return static_cast<double>(n_samples()) / samples_per_second;
    }
};

/// Throws ArgumentError unless n >= 2 channels, fs > 0 and at least one
/// 4-second segment fits.
void validate_recording(const Recording& rec);

/// One fixed-length window of a recording, channels x samples.
struct Segment {
    Matrix data;

    int n_channels() const { return static_cast<int>(data.rows()); }
    int n_samples() const { return static_cast<int>(data.cols()); }
};

/// Named frequency band; valid iff 0 < low < high < fs/2.
struct BandSpec {
    std::string name;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

/// The four-band clinical filter bank: delta 2-4, theta 4-8, alpha 8-13,
/// beta1 13-15 Hz.
std::vector<BandSpec> default_bands();

/// t-ratio of the unit-root coefficient gamma in the regression
///   dy_t = c + gamma * y_{t-1} + sum_{i=1..lag} phi_i * dy_{t-i} + e_t
/// (constant, no trend). Compare against adf_critical_value(). Throws
/// ArgumentError for series shorter than lag_order + 4 or a degenerate
/// (rank-deficient) regression such as a constant series.
double adf_statistic(std::span<const double> series, int lag_order);

/// Approximate large-sample critical values for the constant-only ADF
/// regression: -3.43 / -2.86 / -2.57 at the 1 / 5 / 10 percent levels.
double adf_critical_value(double significance_level);

/// Lag-order rule floor(12 * (n/100)^(1/4)).
int adf_default_lag(long n_samples);

/// Largest candidate segment length (seconds, candidates ascending) for
/// which at least `rejection_quota` of all channel x segment ADF tests
/// reject the unit root at the 5% level; falls back to the smallest
/// candidate when none qualifies.
double choose_segment_length(const Recording& rec, std::span<const double> candidates,
                             double rejection_quota = 0.95);

/// Non-overlapping consecutive segments of round(seconds * fs) samples;
/// the trailing partial segment is discarded. Each channel is mean-centered
/// within its segment unless center = false. Throws when no full segment
/// fits.
std::vector<Segment> segment(const Recording& rec, double seconds, bool center = true);

/// Zero-phase 4th-order Butterworth band-pass (forward-backward, odd
/// reflection padding of 3x the transfer-function order). Output length
/// equals input length.
Segment bandpass(const Segment& seg, const BandSpec& band, double fs);

/// Vertical concatenation of the band-passed copies of seg, one block per
/// band in the given order; channel order preserved within each block.
Segment stack_bands(const Segment& seg, std::span<const BandSpec> bands, double fs);

}  // namespace spdtan
