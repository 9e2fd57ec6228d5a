// Butterworth band-pass design (second-order sections) and zero-phase
// forward-backward filtering with odd reflection padding.

#pragma once

#include <span>
#include <vector>

namespace spdtan {

/// One biquad in direct form II transposed, denominator normalized (a0 = 1):
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct SosSection {
    double b0, b1, b2;
    double a1, a2;
};

/// Band-pass Butterworth from an order-`order` analog prototype (the final
/// transfer function has 2*order poles), via the band transform and the
/// bilinear transform with frequency pre-warping. Gain is exactly the
/// analytic zpk gain, so the response is 1 at the geometric center
/// frequency. Throws ArgumentError unless 0 < low_hz < high_hz < fs/2.
std::vector<SosSection> butter_bandpass(int order, double low_hz, double high_hz, double fs);

/// Single causal pass over x.
std::vector<double> sosfilt(std::span<const SosSection> sos, std::span<const double> x);

/// Zero-phase filtering: odd-reflection pad by `padlen` samples (clamped to
/// len-1), filter forward and backward with steady-state initial conditions,
/// strip the pad. With padlen < 0 the default 3 * (2 * n_sections) is used.
std::vector<double> sosfiltfilt(std::span<const SosSection> sos, std::span<const double> x,
                                int padlen = -1);

/// Mean output power of the cascade under unit-variance white noise input,
/// i.e. (1/pi) * integral of |H(e^{jw})|^2 over [0, pi]. Used to normalize
/// synthetic band-limited processes to unit variance.
double white_noise_power_gain(std::span<const SosSection> sos, int grid_points = 1 << 16);

}  // namespace spdtan
