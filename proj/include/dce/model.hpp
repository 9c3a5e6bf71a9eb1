#pragma once

// Closed-form single-mode model of a cavity whose refractive index is
// modulated by a periodic train of Kerr pump pulses.
//
// Everything is SI (rad/s, s, m) except single_photon_amplitude(), which is
// Gaussian-CGS. The peak coupling is carried divided by hbar so Planck's
// constant never enters a computed observable. All functions are templated
// on the scalar type; instantiating with long double gives a cheap
// high-precision reference.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "dce/constants.hpp"
#include "dce/errors.hpp"

namespace dce {

template <typename Scalar = double>
struct CavityMode {
    Scalar omega_c{};  // rad/s
    Scalar gamma_c{};  // total decay rate, 1/s
    Scalar L_c{};      // m
    Scalar sigma_c{};  // transverse waist, m (0 allowed as a limit)
    Scalar n0{};
    Scalar eps_c{};    // always n0^2

    static CavityMode make(Scalar omega_c, Scalar gamma_c, Scalar L_c, Scalar sigma_c, Scalar n0) {
        CavityMode m{omega_c, gamma_c, L_c, sigma_c, n0, n0 * n0};
        m.validate();
        return m;
    }

    void validate() const {
        if (!(omega_c > 0)) throw ValidationError("cavity.omega_c", "must be > 0");
        if (!(gamma_c > 0)) throw ValidationError("cavity.gamma_c", "must be > 0");
        if (!(L_c > 0)) throw ValidationError("cavity.L_c", "must be > 0");
        if (!(sigma_c >= 0)) throw ValidationError("cavity.sigma_c", "must be >= 0");
        if (!(n0 > 0)) throw ValidationError("cavity.n0", "must be > 0");
        if (eps_c != n0 * n0) throw ValidationError("cavity.eps_c", "must equal n0^2");
    }

    /// The single-mode model presumes gamma_c < omega_c; callers surface
    /// this as a warning rather than an error.
    bool good_cavity() const { return gamma_c < omega_c; }
};

template <typename Scalar = double>
struct PumpPulseTrain {
    Scalar T{};        // period, s
    Scalar tau{};      // duration, s (0 allowed as a limit)
    Scalar v_p{};      // m/s
    Scalar sigma_p{};  // transverse waist, m
    Scalar I_peak{};   // W/m^2
    Scalar n2{};       // m^2/W
    Scalar omega_p{};  // carrier, informational
    Scalar k_p{};      // carrier, informational

    void validate() const {
        if (!(T > 0)) throw ValidationError("pump.T", "must be > 0");
        if (!(tau >= 0)) throw ValidationError("pump.tau", "must be >= 0");
        if (!(tau < T)) throw ValidationError("pump.tau", "pulses must be separated: tau < T");
        if (!(v_p > 0) || v_p > Constants<Scalar>::c)
            throw ValidationError("pump.v_p", "must satisfy 0 < v_p <= c");
        if (!(sigma_p > 0)) throw ValidationError("pump.sigma_p", "must be > 0");
        if (!(I_peak >= 0)) throw ValidationError("pump.I_peak", "must be >= 0");
        if (!std::isfinite(static_cast<double>(n2))) throw ValidationError("pump.n2", "must be finite");
    }

    /// Spatial pulse length inside the medium.
    Scalar sigma() const { return v_p * tau; }
    Scalar repetition_rate() const { return 2 * Constants<Scalar>::pi / T; }
};

template <typename Scalar = double>
struct EffectiveCoupling {
    Scalar A0_over_hbar{};  // rad/s, negative for n2 > 0
    Scalar tau_bar{};       // s
    Scalar B{};             // rad/s, signed
    Scalar Omega_bar{};     // rad/s
    int j{1};
};

template <typename Scalar = double>
struct SeedDrive {
    std::complex<Scalar> E_s{1};
    Scalar omega_s{};
    Scalar kappa_c{};  // sqrt(1/s)

    /// Symmetric two-sided cavity: kappa_c^2 = gamma_c / 2 per mirror.
    static SeedDrive symmetric(const CavityMode<Scalar>& cavity, std::complex<Scalar> E_s,
                               Scalar omega_s) {
        SeedDrive d{E_s, omega_s, std::sqrt(cavity.gamma_c / 2)};
        d.validate();
        return d;
    }

    void validate() const {
        if (!(omega_s > 0)) throw ValidationError("seed.omega_s", "must be > 0");
        if (!(kappa_c > 0)) throw ValidationError("seed.kappa_c", "must be > 0");
    }
};

template <typename Scalar = double>
struct SeedResponse {
    std::complex<Scalar> E_t;   // at omega_s
    std::complex<Scalar> E_pc;  // at Omega_bar - omega_s
    bool steady_state_guaranteed{true};
};

// -- coupling pipeline -------------------------------------------------------

/// Vacuum field amplitude of one photon in the mode, Gaussian-CGS (statV/cm).
/// Informational only.
template <typename Scalar>
Scalar single_photon_amplitude(const CavityMode<Scalar>& cavity) {
    const Scalar L_cm = cavity.L_c * 100;
    const Scalar sigma_cm = cavity.sigma_c * 100;
    return std::sqrt(4 * Constants<Scalar>::hbar_cgs * cavity.omega_c /
                     (L_cm * sigma_cm * sigma_cm * cavity.eps_c));
}

template <typename Scalar>
Scalar effective_duration(const PumpPulseTrain<Scalar>& pump, const CavityMode<Scalar>& cavity) {
    const Scalar sigma = pump.sigma();
    return std::sqrt(cavity.sigma_c * cavity.sigma_c + sigma * sigma) / pump.v_p;
}

template <typename Scalar>
Scalar peak_index_shift(const PumpPulseTrain<Scalar>& pump) {
    return pump.n2 * pump.I_peak;
}

/// Height of each peak of the pulse-train coupling, divided by hbar (rad/s).
template <typename Scalar>
Scalar coupling_peak(const CavityMode<Scalar>& cavity, const PumpPulseTrain<Scalar>& pump) {
    const Scalar tau_bar = effective_duration(pump, cavity);
    const Scalar overlap = pump.sigma() / (pump.v_p * tau_bar);
    return -(Constants<Scalar>::sqrt_pi / 2) * (peak_index_shift(pump) / cavity.n0) * cavity.omega_c *
           (pump.sigma_p / cavity.L_c) * overlap;
}

/// Weight of the delta peak at omega = 2 pi j / T in the spectrum of the
/// coupling, in the Fourier-series normalisation A(t) = sum_j w_j e^{-i omega_j t}.
/// Real and even in j.
template <typename Scalar>
Scalar comb_weight(const EffectiveCoupling<Scalar>& coupling, Scalar T, int j) {
    const Scalar omega = 2 * Constants<Scalar>::pi * Scalar(j) / T;
    const Scalar x = omega * coupling.tau_bar;
    return Constants<Scalar>::sqrt_pi * coupling.tau_bar * coupling.A0_over_hbar / T *
           std::exp(-x * x / 4);
}

/// Resonant two-photon coupling B from the j-th comb component.
template <typename Scalar>
EffectiveCoupling<Scalar> coupling_B(const CavityMode<Scalar>& cavity, const PumpPulseTrain<Scalar>& pump,
                                     int j) {
    if (j < 1) throw ValidationError("harmonic", "j must be >= 1");
    EffectiveCoupling<Scalar> c;
    c.A0_over_hbar = coupling_peak(cavity, pump);
    c.tau_bar = effective_duration(pump, cavity);
    c.j = j;
    c.Omega_bar = Scalar(j) * pump.repetition_rate();
    c.B = comb_weight(c, pump.T, j);
    return c;
}

// -- observables -------------------------------------------------------------

/// Exponential growth rate of the photon number in the lossless cavity.
/// nullopt below the parametric tongue (2|B| < |Omega_bar/2 - omega_c|);
/// exactly zero on its edge.
template <typename Scalar>
std::optional<Scalar> growth_rate(Scalar B, Scalar omega_c, Scalar Omega_bar) {
    const Scalar detuning = Omega_bar / 2 - omega_c;
    const Scalar disc = 4 * B * B - detuning * detuning;
    if (disc < 0) return std::nullopt;
    return 2 * std::sqrt(disc);
}

template <typename Scalar>
Scalar threshold_B(const CavityMode<Scalar>& cavity, Scalar Omega_bar) {
    const Scalar detuning = cavity.omega_c - Omega_bar / 2;
    return std::sqrt(cavity.gamma_c * cavity.gamma_c / 4 + detuning * detuning) / 2;
}

/// Total steady-state emission rate (both ports), photons/s.
/// Throws RegimeError at or above the parametric threshold.
template <typename Scalar>
Scalar photon_flux(const CavityMode<Scalar>& cavity, Scalar B, Scalar Omega_bar) {
    const Scalar g = cavity.gamma_c;
    const Scalar detuning = cavity.omega_c - Omega_bar / 2;
    const Scalar denom = g * g / 4 - 4 * B * B + detuning * detuning;
    if (!(denom > 0))
        throw RegimeError("photon_flux: B at or above parametric threshold; emission rate diverges");
    return 2 * g * B * B / denom;
}

/// Transmitted and phase-conjugated output amplitudes for a coherent seed.
/// Above threshold the expressions are still evaluated but no stable steady
/// state exists, which is reported through steady_state_guaranteed.
template <typename Scalar>
SeedResponse<Scalar> seed_response(const CavityMode<Scalar>& cavity, Scalar B, Scalar Omega_bar,
                                   const SeedDrive<Scalar>& seed) {
    using C = std::complex<Scalar>;
    const Scalar g = cavity.gamma_c;
    const C signal = C(seed.omega_s - cavity.omega_c, g / 2);
    const C idler = C(seed.omega_s + cavity.omega_c - Omega_bar, g / 2);
    const Scalar four_b2 = 4 * B * B;

    SeedResponse<Scalar> r;
    r.E_t = (g / 2) / (signal + four_b2 / idler) * seed.E_s;
    r.E_pc = (-B * g) / (signal * idler + four_b2) * std::conj(seed.E_s);
    r.steady_state_guaranteed = std::abs(B) < threshold_B(cavity, Omega_bar);
    return r;
}

/// Complex seed frequencies at which the response denominators vanish.
/// Ordered by decreasing imaginary part (the narrow pole first), ties by
/// increasing real part.
template <typename Scalar>
std::array<std::complex<Scalar>, 2> response_poles(const CavityMode<Scalar>& cavity, Scalar B,
                                                    Scalar Omega_bar) {
    using C = std::complex<Scalar>;
    const Scalar detuning = cavity.omega_c - Omega_bar / 2;
    const C split = std::sqrt(C(detuning * detuning - 4 * B * B, 0));
    const C centre(Omega_bar / 2, -cavity.gamma_c / 2);
    C a = centre + split;
    C b = centre - split;
    if (b.imag() > a.imag() || (b.imag() == a.imag() && b.real() < a.real())) std::swap(a, b);
    return {a, b};
}

}  // namespace dce
