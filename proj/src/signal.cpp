#include "spdtan/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spdtan {

void validate_recording(const Recording& rec) {
    if (rec.n_channels() < 2) {
        throw ArgumentError("recording must have at least 2 channels, got " +
                            std::to_string(rec.n_channels()));
    }
    if (!(rec.samples_per_second > 0.0)) {
        throw ArgumentError("recording sampling rate must be positive");
    }
    if (rec.n_samples() < static_cast<long>(4.0 * rec.samples_per_second)) {
        std::ostringstream err;
        err << "recording too short: " << rec.n_samples() << " samples at "
            << rec.samples_per_second << " Hz leaves no 4-second segment";
        throw ArgumentError(err.str());
    }
    if (rec.channels.size() != static_cast<std::size_t>(rec.n_channels())) {
        throw ArgumentError("channel name count does not match data rows");
    }
}

std::vector<BandSpec> default_bands() {
    return {{"delta", 2.0, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}, {"beta1", 13.0, 15.0}};
}

double adf_statistic(std::span<const double> series, int lag_order) {
    if (lag_order < 0) throw ArgumentError("adf_statistic: lag order must be >= 0");
    const long n = static_cast<long>(series.size());
    const long n_params = lag_order + 2;  // constant, level, lagged differences
    const long n_obs = n - 1 - lag_order;
    if (n_obs < n_params + 1) {
        std::ostringstream err;
        err << "adf_statistic: series of length " << n << " too short for lag order "
            << lag_order;
        throw ArgumentError(err.str());
    }

    // dy_t = c + gamma * y_{t-1} + sum phi_i dy_{t-i}, rows t = lag+1 .. n-1.
    Matrix X(n_obs, n_params);
    Vector dy(n_obs);
    for (long r = 0; r < n_obs; ++r) {
        const long t = r + lag_order + 1;
        dy(r) = series[t] - series[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = series[t - 1];
        for (int i = 1; i <= lag_order; ++i) {
            X(r, 1 + i) = series[t - i] - series[t - i - 1];
        }
    }

    const Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < n_params) {
        throw ArgumentError("adf_statistic: degenerate regression (constant or collinear series)");
    }
    const Vector coef = qr.solve(dy);
    const Vector residuals = dy - X * coef;
    const double sigma2 = residuals.squaredNorm() / static_cast<double>(n_obs - n_params);

    // Variance of the level coefficient from (X^T X)^{-1}.
    const Matrix xtx_inv =
        (X.transpose() * X).ldlt().solve(Matrix::Identity(n_params, n_params));
    const double se = std::sqrt(sigma2 * xtx_inv(1, 1));
    return coef(1) / se;
}

double adf_critical_value(double significance_level) {
    if (significance_level == 0.01) return -3.43;
    if (significance_level == 0.05) return -2.86;
    if (significance_level == 0.10) return -2.57;
    throw ArgumentError("adf_critical_value: tabulated levels are 0.01, 0.05, 0.10");
}

int adf_default_lag(long n_samples) {
    return static_cast<int>(std::floor(12.0 * std::pow(n_samples / 100.0, 0.25)));
}

double choose_segment_length(const Recording& rec, std::span<const double> candidates,
                             double rejection_quota) {
    if (candidates.empty()) throw ArgumentError("choose_segment_length: no candidates");
    if (!std::is_sorted(candidates.begin(), candidates.end())) {
        throw ArgumentError("choose_segment_length: candidates must be ascending");
    }
    const double critical = adf_critical_value(0.05);
    double chosen = candidates.front();
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double seconds = *it;
        std::vector<Segment> segs;
        try {
            segs = segment(rec, seconds);
        } catch (const ArgumentError&) {
            continue;  // candidate longer than the recording
        }
        const int lag = adf_default_lag(segs.front().n_samples());
        long total = 0;
        long rejected = 0;
        for (const auto& seg : segs) {
            for (int ch = 0; ch < seg.n_channels(); ++ch) {
                ++total;
                std::vector<double> row(seg.data.cols());
                Eigen::Map<Vector>(row.data(), seg.data.cols()) = seg.data.row(ch);
                try {
                    if (adf_statistic(row, lag) < critical) ++rejected;
                } catch (const ArgumentError&) {
                    // degenerate channel within this segment: counts as a failure
                }
            }
        }
        if (total > 0 && static_cast<double>(rejected) >= rejection_quota * total) {
            chosen = seconds;
            break;
        }
    }
    return chosen;
}

std::vector<Segment> segment(const Recording& rec, double seconds, bool center) {
    if (!(seconds > 0.0)) throw ArgumentError("segment: length must be positive");
    const long t = std::lround(seconds * rec.samples_per_second);
    if (t < 2) throw ArgumentError("segment: segment length under 2 samples");
    const long n_segments = rec.n_samples() / t;
    if (n_segments == 0) {
        std::ostringstream err;
        err << "segment: recording of " << rec.n_samples() << " samples has no full "
            << seconds << "-second segment (" << t << " samples)";
        throw ArgumentError(err.str());
    }
    std::vector<Segment> out;
    out.reserve(n_segments);
    for (long s = 0; s < n_segments; ++s) {
        Matrix block = rec.data.middleCols(s * t, t);
        if (center) block.colwise() -= block.rowwise().mean().eval();
        out.push_back(Segment{std::move(block)});
    }
    return out;
}

Segment bandpass(const Segment& seg, const BandSpec& band, double fs) {
    const auto sos = butter_bandpass(4, band.low_hz, band.high_hz, fs);
    Matrix out(seg.data.rows(), seg.data.cols());
    std::vector<double> row(seg.data.cols());
    for (Eigen::Index ch = 0; ch < seg.data.rows(); ++ch) {
        Eigen::Map<Vector>(row.data(), seg.data.cols()) = seg.data.row(ch);
        const std::vector<double> filtered = sosfiltfilt(sos, row);
        out.row(ch) = Eigen::Map<const Vector>(filtered.data(), seg.data.cols());
    }
    return Segment{std::move(out)};
}

Segment stack_bands(const Segment& seg, std::span<const BandSpec> bands, double fs) {
    if (bands.empty()) throw ArgumentError("stack_bands: at least one band required");
    const int n = seg.n_channels();
    Matrix out(static_cast<Eigen::Index>(bands.size()) * n, seg.data.cols());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        out.middleRows(static_cast<Eigen::Index>(b) * n, n) = bandpass(seg, bands[b], fs).data;
    }
    return Segment{std::move(out)};
}

}  // namespace spdtan
