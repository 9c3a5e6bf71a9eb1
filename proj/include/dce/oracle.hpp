#pragma once

// Brute-force c-number integration of the modulated single-mode cavity.
// Used to confirm the closed forms in model.hpp independently:
//
//   d alpha/dt = -(i omega_c + gamma_c/2) alpha - 2 i B e^{-i Omega t} alpha*
//                - i kappa_c E_inc(t) + sqrt(gamma_c/2) xi(t)
//
// with xi complex white noise of unit intensity (Wigner vacuum input). The
// deterministic part is advanced with classical RK4; the noise enters as two
// half-step Euler-Maruyama kicks around each RK4 step.

#include <complex>
#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "dce/model.hpp"

namespace dce {

enum class Frame { lab, rotating };

struct ModeOdeParams {
    double omega_c{};
    double gamma_c{};
    double B{};
    double Omega_bar{};
    /// rotating = frame turning at Omega_bar/2; trajectories are always
    /// reported in the lab frame.
    Frame frame{Frame::rotating};
};

struct NoiseSpec {
    bool enabled{false};
    std::uint64_t rng_seed{0};
    /// Sample alpha(0) from the vacuum Wigner distribution (<|alpha|^2> = 1/2)
    /// on top of the supplied initial amplitude.
    bool half_quantum{true};
};

struct Trajectory {
    Eigen::VectorXd times;
    Eigen::VectorXcd alpha;

    Eigen::VectorXd photon_number() const { return alpha.cwiseAbs2(); }
};

Trajectory integrate_mode(const ModeOdeParams& params, const std::optional<SeedDrive<double>>& drive,
                          const NoiseSpec& noise, double duration, double dt,
                          std::complex<double> alpha0 = {});

struct FluxEstimate {
    double flux{};            // photons/s
    double standard_error{};  // photons/s
    double occupation{};      // <|alpha|^2> - 1/2
    int ensemble_size{};
};

/// Ensemble estimate of gamma_c (<|alpha|^2> - 1/2) in the noise-driven steady
/// state, averaged over the second half of each trajectory. Members are
/// independent; the reduction runs in member order, so `threads` never
/// changes the result.
FluxEstimate steady_state_flux(const ModeOdeParams& params, int ensemble_size, double duration, double dt,
                               std::uint64_t seed, int threads = 0);

/// Noiseless driven steady state, demodulated at omega_s and Omega_bar -
/// omega_s and mapped to output amplitudes with kappa_c. E_pc is reported
/// in the same phase convention as seed_response().
SeedResponse<double> steady_state_response(const ModeOdeParams& params, const SeedDrive<double>& seed,
                                           double duration, double dt);

struct ParametricGrowth {
    std::optional<double> rate;  // intensity e-folding rate, 1/s; nullopt = no growth
    double r_squared{};
    Eigen::VectorXd times;       // cycle centres
    Eigen::VectorXd energy;      // cycle-averaged u^2 + (u'/omega_c)^2
};

/// Integrates u'' + omega(t)^2 u = 0 with omega(t) = omega_c n0 / (n0 + delta_n sin(Omega t)),
/// the single-mode picture of a uniformly index-modulated cavity.
ParametricGrowth parametric_growth(double n0, double delta_n, double Omega, double omega_c, double duration,
                                   double dt);

}  // namespace dce
