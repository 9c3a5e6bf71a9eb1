#pragma once

#include <numbers>

namespace dce {

// CODATA 2018 exact / recommended values.
template <typename Scalar = double>
struct Constants {
    static constexpr Scalar c = Scalar(299792458);                  // m/s
    static constexpr Scalar hbar = Scalar(1.054571817e-34L);        // J s
    static constexpr Scalar hbar_cgs = Scalar(1.054571817e-27L);    // erg s
    static constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    static constexpr Scalar sqrt_pi = Scalar(1.772453850905516027298167483341145182L);
};

inline constexpr double kSpeedOfLight = Constants<double>::c;
inline constexpr double kPi = std::numbers::pi;

/// Length of one micrometre divided by c, i.e. the FDTD time unit, in seconds.
inline constexpr double kMicronTime = 1e-6 / kSpeedOfLight;

/// Angular frequency (rad/s) of light with the given vacuum wavelength (m).
constexpr double angular_frequency_from_wavelength(double wavelength_m) {
    return 2.0 * kPi * kSpeedOfLight / wavelength_m;
}

constexpr double wavelength_from_angular_frequency(double omega) {
    return 2.0 * kPi * kSpeedOfLight / omega;
}

}  // namespace dce
