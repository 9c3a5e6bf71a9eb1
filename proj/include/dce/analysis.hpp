#pragma once

#include <Eigen/Dense>

#include "dce/timeseries.hpp"

namespace dce::analysis {

struct Spectrum {
    enum class Provenance { spatial_snapshot, temporal_probe };
    Eigen::VectorXd omega;      // rad/s, strictly increasing
    Eigen::VectorXd magnitude;  // >= 0; sum of squares = windowed signal power
    Provenance provenance{Provenance::spatial_snapshot};

    double bin_width() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
};

struct FitWindow {
    double t_begin{};  // s
    double t_end{};    // s
};

struct GainFit {
    double G{};  // dB/ps
    FitWindow window;
    double r_squared{};
};

struct Peak {
    double omega{};
    double magnitude{};
    Eigen::Index bin{};
};

/// Hann-windowed DFT of field samples [begin, end] (node indices, end
/// inclusive; end < 0 means the last sample) spaced dx metres apart.
/// Bins map to omega = c |k| / n_ref.
Spectrum spectrum_spatial(const Eigen::ArrayXd& field, double dx, double n_ref, Eigen::Index begin = 0,
                          Eigen::Index end = -1);

/// Hann-windowed DFT of a probe time series.
Spectrum spectrum_temporal(const TimeSeries& series);

/// Largest bin with 3-point parabolic refinement. Ties go to the lowest
/// frequency.
Peak find_peak(const Spectrum& spectrum);

/// Least-squares slope of 10 log10(I/I(t0)) over the window, in dB/ps.
GainFit log_gain(const TimeSeries& series, FitWindow window);

/// Earliest start such that both the trailing window and its leading
/// quarter are straight in dB (R^2 >= 0.995); trailing half otherwise.
FitWindow auto_window(const TimeSeries& series);

/// Moving average over exactly `period` seconds of the piecewise-linear
/// interpolant, sampled on the input grid. The result is shorter by about
/// one period.
TimeSeries cycle_average(const TimeSeries& series, double period);

struct Beating {
    bool present{};
    double period{};          // s
    double amplitude_db{};    // rms of the detrended log-intensity
    double peak_to_median{};  // periodogram contrast of the strongest line
};

/// Removes the linear trend of 10 log10 I over the window and looks for a
/// dominant periodic line in what is left.
Beating detect_beating(const TimeSeries& series, FitWindow window);

inline constexpr double kMinRSquared = 0.995;

}  // namespace dce::analysis
