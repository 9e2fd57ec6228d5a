#include "spdtan/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "spdtan/errors.hpp"

namespace spdtan {

namespace {

using Complex = std::complex<double>;

/// Digital band-pass poles and overall gain from the analog Butterworth
/// prototype: pre-warp the band edges, apply the low-pass to band-pass
/// transform in s, then the bilinear transform. The 2*order digital zeros
/// sit at +1 (order of them) and -1 (the rest) and are attached to the
/// sections directly.
struct BandpassPoles {
    std::vector<Complex> poles;  // 2 * order, conjugate-closed
    double gain;                 // overall zpk gain
};

BandpassPoles design_poles(int order, double low_hz, double high_hz, double fs) {
    const double fs2 = 2.0 * fs;
    const double warped_low = fs2 * std::tan(std::numbers::pi * low_hz / fs);
    const double warped_high = fs2 * std::tan(std::numbers::pi * high_hz / fs);
    const double bw = warped_high - warped_low;
    const double w0 = std::sqrt(warped_low * warped_high);

    // Analog prototype poles on the unit circle, left half-plane.
    std::vector<Complex> analog;
    analog.reserve(2 * order);
    for (int k = 1; k <= order; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
        const Complex proto(std::cos(theta), std::sin(theta));
        const Complex scaled = proto * (bw / 2.0);
        const Complex shift = std::sqrt(scaled * scaled - w0 * w0);
        analog.push_back(scaled + shift);
        analog.push_back(scaled - shift);
    }

    // Gain after the band transform: bw^order (prototype gain 1, `order`
    // zeros appear at s = 0).
    double gain = std::pow(bw, order);

    // Bilinear transform; the gain picks up fs2^order from the zeros at 0
    // divided by prod(fs2 - p).
    Complex denom(1.0, 0.0);
    std::vector<Complex> digital;
    digital.reserve(analog.size());
    for (const Complex& p : analog) {
        digital.push_back((Complex(fs2, 0.0) + p) / (Complex(fs2, 0.0) - p));
        denom *= Complex(fs2, 0.0) - p;
    }
    gain *= (std::pow(Complex(fs2, 0.0), order) / denom).real();
    return BandpassPoles{std::move(digital), gain};
}

}  // namespace

std::vector<SosSection> butter_bandpass(int order, double low_hz, double high_hz, double fs) {
    if (order < 1) throw ArgumentError("butter_bandpass: order must be >= 1");
    if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
        std::ostringstream err;
        err << "butter_bandpass: band edges must satisfy 0 < low < high < fs/2, got ["
            << low_hz << ", " << high_hz << "] Hz at fs " << fs;
        throw ArgumentError(err.str());
    }

    BandpassPoles design = design_poles(order, low_hz, high_hz, fs);

    // Keep one pole per conjugate pair (poles with negligible imaginary
    // part pair among themselves).
    std::vector<Complex> upper;
    std::vector<double> real_poles;
    for (const Complex& p : design.poles) {
        if (std::abs(p.imag()) > 1e-12 * std::max(1.0, std::abs(p.real()))) {
            if (p.imag() > 0.0) upper.push_back(p);
        } else {
            real_poles.push_back(p.real());
        }
    }
    std::sort(real_poles.begin(), real_poles.end());
    std::sort(upper.begin(), upper.end(),
              [](const Complex& a, const Complex& b) { return a.real() < b.real(); });

    std::vector<SosSection> sos;
    for (const Complex& p : upper) {
        sos.push_back(SosSection{1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
    }
    for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
        sos.push_back(SosSection{1.0, 0.0, -1.0, -(real_poles[i] + real_poles[i + 1]),
                                 real_poles[i] * real_poles[i + 1]});
    }
    // Each section's numerator (z-1)(z+1) accounts for one zero at +1 and
    // one at -1; distribute the overall gain evenly across sections.
    const double section_gain = std::pow(design.gain, 1.0 / static_cast<double>(sos.size()));
    for (auto& s : sos) {
        s.b0 *= section_gain;
        s.b1 *= section_gain;
        s.b2 *= section_gain;
    }
    return sos;
}

namespace {

/// Direct form II transposed, one section, in place. State (s1, s2) starts
/// from the given values and is left in the final state.
void run_section(const SosSection& s, std::span<double> x, double& s1, double& s2) {
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + s1;
        s1 = s.b1 * in + s2 - s.a1 * out;
        s2 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

/// Steady-state (step response) initial conditions per section, scaled by
/// the cumulative DC gain of the preceding sections; multiply by the first
/// input sample before use.
struct SectionZi {
    double s1, s2;
};

std::vector<SectionZi> steady_state_zi(std::span<const SosSection> sos) {
    std::vector<SectionZi> zi;
    zi.reserve(sos.size());
    double carry = 1.0;  // DC gain of everything before the current section
    for (const auto& s : sos) {
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double s2 = (s.b2 - s.a2 * dc) * carry;
        const double s1 = (s.b1 + s.b2 - (s.a1 + s.a2) * dc) * carry;
        zi.push_back(SectionZi{s1, s2});
        carry *= dc;
    }
    return zi;
}

void sosfilt_inplace(std::span<const SosSection> sos, std::span<double> x,
                     const std::vector<SectionZi>* zi, double zi_scale) {
    for (std::size_t k = 0; k < sos.size(); ++k) {
        double s1 = zi ? (*zi)[k].s1 * zi_scale : 0.0;
        double s2 = zi ? (*zi)[k].s2 * zi_scale : 0.0;
        run_section(sos[k], x, s1, s2);
    }
}

}  // namespace

std::vector<double> sosfilt(std::span<const SosSection> sos, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    sosfilt_inplace(sos, y, nullptr, 0.0);
    return y;
}

std::vector<double> sosfiltfilt(std::span<const SosSection> sos, std::span<const double> x,
                                int padlen) {
    if (x.empty()) return {};
    if (padlen < 0) padlen = 3 * static_cast<int>(2 * sos.size());
    padlen = std::min<int>(padlen, static_cast<int>(x.size()) - 1);

    const long n = static_cast<long>(x.size());
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (int i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (int i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const std::vector<SectionZi> zi = steady_state_zi(sos);
    sosfilt_inplace(sos, ext, &zi, ext.front());
    std::reverse(ext.begin(), ext.end());
    sosfilt_inplace(sos, ext, &zi, ext.front());
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + padlen, ext.begin() + padlen + n);
}

double white_noise_power_gain(std::span<const SosSection> sos, int grid_points) {
    // Trapezoid rule over [0, pi]; |H|^2 of a Butterworth band-pass is
    // smooth, so a dense uniform grid is plenty.
    double acc = 0.0;
    for (int i = 0; i <= grid_points; ++i) {
        const double w = std::numbers::pi * static_cast<double>(i) / grid_points;
        const Complex z = std::polar(1.0, -w);
        Complex h(1.0, 0.0);
        for (const auto& s : sos) {
            h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
        }
        const double mag2 = std::norm(h);
        acc += (i == 0 || i == grid_points) ? 0.5 * mag2 : mag2;
    }
    return acc / grid_points;
}

}  // namespace spdtan
