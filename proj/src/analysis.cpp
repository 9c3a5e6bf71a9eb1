#include "dce/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "dce/constants.hpp"
#include "dce/detail/linear_fit.hpp"
#include "dce/errors.hpp"

namespace dce::analysis {
namespace {

/// One-sided magnitudes with Parseval weights; bin k has frequency k * df.
Eigen::VectorXd windowed_magnitudes(const Eigen::VectorXd& x) {
    const Eigen::Index M = x.size();
    std::vector<double> in(M);
    for (Eigen::Index i = 0; i < M; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2 * kPi * (i + 0.5) / M);
        in[i] = w * x[i];
    }
    std::vector<std::complex<double>> out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    const Eigen::Index half = M / 2;
    Eigen::VectorXd mag(half + 1);
    for (Eigen::Index k = 0; k <= half; ++k) {
        const bool single = k == 0 || (M % 2 == 0 && k == half);
        mag[k] = std::abs(out[k]) * std::sqrt((single ? 1.0 : 2.0) / M);
    }
    return mag;
}

struct Slice {
    Eigen::Index first{};
    Eigen::Index count{};
};

Slice slice(const TimeSeries& s, FitWindow w) {
    const double eps = 1e-9 * s.dt;
    Eigen::Index a = static_cast<Eigen::Index>(std::ceil((w.t_begin - s.t0 - eps) / s.dt));
    Eigen::Index b = static_cast<Eigen::Index>(std::floor((w.t_end - s.t0 + eps) / s.dt));
    a = std::max<Eigen::Index>(a, 0);
    b = std::min<Eigen::Index>(b, s.size() - 1);
    return {a, std::max<Eigen::Index>(b - a + 1, 0)};
}

double r_squared_db(const Eigen::VectorXd& t, const Eigen::VectorXd& db, Eigen::Index a, Eigen::Index n) {
    return detail::fit_line(t.segment(a, n), db.segment(a, n)).r_squared;
}

}  // namespace

Spectrum spectrum_spatial(const Eigen::ArrayXd& field, double dx, double n_ref, Eigen::Index begin,
                          Eigen::Index end) {
    if (end < 0) end = field.size() - 1;
    if (begin < 0 || end >= field.size() || end - begin + 1 < 4)
        throw ValidationError("spectrum.window", "window longer than snapshot or too short");
    if (!(dx > 0) || !(n_ref > 0)) throw ValidationError("spectrum", "dx and n_ref must be > 0");
    const Eigen::Index M = end - begin + 1;
    Spectrum s;
    s.provenance = Spectrum::Provenance::spatial_snapshot;
    s.magnitude = windowed_magnitudes(field.segment(begin, M).matrix());
    const double dk = 2 * kPi / (M * dx);
    s.omega = Eigen::VectorXd::LinSpaced(s.magnitude.size(), 0.0, static_cast<double>(s.magnitude.size() - 1)) *
              (kSpeedOfLight * dk / n_ref);
    return s;
}

Spectrum spectrum_temporal(const TimeSeries& series) {
    series.validate();
    if (series.size() < 4) throw ValidationError("spectrum", "series too short");
    Spectrum s;
    s.provenance = Spectrum::Provenance::temporal_probe;
    s.magnitude = windowed_magnitudes(series.values);
    const double dw = 2 * kPi / (series.size() * series.dt);
    s.omega = Eigen::VectorXd::LinSpaced(s.magnitude.size(), 0.0, static_cast<double>(s.magnitude.size() - 1)) * dw;
    return s;
}

Peak find_peak(const Spectrum& spectrum) {
    const auto& m = spectrum.magnitude;
    if (m.size() == 0) throw ValidationError("spectrum", "empty spectrum");
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < m.size(); ++k)
        if (m[k] > m[best]) best = k;
    if (!(m[best] > 0)) throw ValidationError("spectrum", "all-zero spectrum");
    Peak p{spectrum.omega[best], m[best], best};
    if (best > 0 && best + 1 < m.size()) {
        const double a = m[best - 1], b = m[best], c = m[best + 1];
        const double denom = a - 2 * b + c;
        if (denom < 0) {
            const double d = 0.5 * (a - c) / denom;
            p.omega += d * spectrum.bin_width();
            p.magnitude = b - 0.25 * (a - c) * d;
        }
    }
    return p;
}

GainFit log_gain(const TimeSeries& series, FitWindow window) {
    series.validate();
    if (!(window.t_end > window.t_begin)) throw ValidationError("window", "degenerate fit window");
    const Slice sl = slice(series, window);
    if (sl.count < 2) throw ValidationError("window", "fewer than two samples in fit window");
    const Eigen::VectorXd v = series.values.segment(sl.first, sl.count);
    if (!(v.array() > 0).all()) throw ValidationError("series", "intensity must be > 0 in the fit window");
    const Eigen::VectorXd t_ps = series.times().segment(sl.first, sl.count) * 1e12;
    const Eigen::VectorXd db = 10.0 * (v.array() / v[0]).log10().matrix();
    const auto fit = detail::fit_line(t_ps, db);
    return {fit.slope, {series.time(sl.first), series.time(sl.first + sl.count - 1)}, fit.r_squared};
}

FitWindow auto_window(const TimeSeries& series) {
    series.validate();
    const Eigen::Index n = series.size();
    if (n < 100) throw ValidationError("series", "auto_window needs at least 100 samples");
    const FitWindow fallback{series.time(n / 2), series.t_end()};
    if (!(series.values.array() > 0).all()) return fallback;

    const Eigen::VectorXd t = series.times();
    const Eigen::VectorXd db = 10.0 * series.values.array().log10().matrix();
    const Eigen::Index min_len = std::max<Eigen::Index>(40, n / 10);
    auto straight = [&](Eigen::Index s) {
        const Eigen::Index len = n - s;
        return r_squared_db(t, db, s, len) >= kMinRSquared &&
               r_squared_db(t, db, s, std::max<Eigen::Index>(len / 4, 10)) >= kMinRSquared;
    };

    Eigen::Index hi = n - min_len;
    if (!straight(hi)) return fallback;
    Eigen::Index lo = 0;
    if (straight(lo)) return {series.t0, series.t_end()};
    // Invariant: straight(hi) && !straight(lo).
    while (hi - lo > 1) {
        const Eigen::Index mid = lo + (hi - lo) / 2;
        (straight(mid) ? hi : lo) = mid;
    }
    return {series.time(hi), series.t_end()};
}

TimeSeries cycle_average(const TimeSeries& series, double period) {
    series.validate();
    const Eigen::Index n = series.size();
    const double span = series.t_end() - series.t0;
    if (!(period > 0) || period >= span) throw ValidationError("period", "averaging period must lie in (0, span)");

    // Running integral of the linear interpolant at the samples.
    std::vector<double> F(n, 0.0);
    for (Eigen::Index k = 1; k < n; ++k) F[k] = F[k - 1] + 0.5 * series.dt * (series.values[k - 1] + series.values[k]);
    auto integral = [&](double t) {
        double u = (t - series.t0) / series.dt;
        Eigen::Index k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(u)), 0, n - 2);
        u -= static_cast<double>(k);
        const double y0 = series.values[k], y1 = series.values[k + 1];
        return F[k] + series.dt * (u * y0 + 0.5 * u * u * (y1 - y0));
    };

    const double half = period / 2;
    const Eigen::Index first = static_cast<Eigen::Index>(std::ceil(half / series.dt - 1e-9));
    const Eigen::Index last = static_cast<Eigen::Index>(std::floor((span - half) / series.dt + 1e-9));
    TimeSeries out;
    out.t0 = series.time(first);
    out.dt = series.dt;
    out.values.resize(std::max<Eigen::Index>(last - first + 1, 0));
    for (Eigen::Index k = first; k <= last; ++k) {
        const double tc = series.time(k);
        out.values[k - first] = (integral(tc + half) - integral(tc - half)) / period;
    }
    return out;
}

Beating detect_beating(const TimeSeries& series, FitWindow window) {
    series.validate();
    const Slice sl = slice(series, window);
    if (sl.count < 16) throw ValidationError("window", "too few samples for beating analysis");
    const Eigen::VectorXd v = series.values.segment(sl.first, sl.count);
    if (!(v.array() > 0).all()) throw ValidationError("series", "intensity must be > 0 in the window");
    const Eigen::VectorXd t = series.times().segment(sl.first, sl.count);
    const Eigen::VectorXd db = 10.0 * v.array().log10().matrix();
    const auto fit = detail::fit_line(t, db);
    const Eigen::VectorXd resid =
        (db.array() - fit.intercept - fit.slope * t.array()).matrix();

    const Eigen::VectorXd mag = windowed_magnitudes(resid);
    // Skip DC and the first bin, which hold window leakage of the trend residue.
    // Lines shorter than 8 samples are leftover carrier ripple, not beating.
    const Eigen::Index top = std::max<Eigen::Index>(4, std::min<Eigen::Index>(mag.size(), sl.count / 8 + 1));
    Eigen::Index best = 2;
    for (Eigen::Index k = 3; k < top; ++k)
        if (mag[k] > mag[best]) best = k;
    std::vector<double> power(mag.data() + 2, mag.data() + top);
    for (double& p : power) p *= p;
    std::nth_element(power.begin(), power.begin() + power.size() / 2, power.end());
    const double median = power[power.size() / 2];

    Beating b;
    b.amplitude_db = std::sqrt(resid.squaredNorm() / resid.size());
    b.peak_to_median = median > 0 ? mag[best] * mag[best] / median : 0.0;
    b.period = sl.count * series.dt / static_cast<double>(best);
    // A clear spectral line carrying a visible ripple.
    b.present = b.peak_to_median > 50.0 && b.amplitude_db > 0.01;
    return b;
}

}  // namespace dce::analysis
