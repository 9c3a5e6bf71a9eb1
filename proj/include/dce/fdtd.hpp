#pragma once

// 1D Yee scheme with a time-dependent permittivity.
//
// Public quantities are SI (m, s, rad/s). Internally c = 1, lengths are in um
// and times in um/c. Fields live on E nodes i = 0..N and H half nodes
// i + 1/2, i = 0..N-1. Update per step:
//
//   H^{n+1/2} = H^{n-1/2} + r (E^n_{i+1} - E^n_i)
//   D^{n+1}   = D^n       + r (H^{n+1/2}_i - H^{n+1/2}_{i-1})
//   E^{n+1}   = D^{n+1} / eps(x, t^{n+1})
//
// with r = dt/dx.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dce/timeseries.hpp"

namespace dce::fdtd {

struct Grid1D {
    double dx{};  // m
    int N{};      // interior cells; E nodes 0..N

    double x(int i) const { return i * dx; }
    double length() const { return N * dx; }
};

struct BraggSpec {
    double n_lo{1.45};
    double n_hi{1.55};
    int layers{30};              // per mirror; two layers (high, low) per period
    double period{2e-6 / 3.0};   // m; lambda/(2 nbar) at 2 um
    double cavity_length{170e-6};
    double cavity_index{1.5};
    double margin{5e-6};         // vacuum on each side
};

/// Static index n_s at every E node plus the cavity interior [cavity_begin,
/// cavity_end] (node indices) over which intensity is summed.
struct MediumProfile {
    enum class Kind { uniform, bragg };
    Kind kind{Kind::uniform};
    Eigen::ArrayXd n;
    int cavity_begin{};
    int cavity_end{};
    double n0{};                       // cavity index
    std::optional<BraggSpec> bragg;

    double n_min() const { return n.minCoeff(); }
    double n_max() const { return n.maxCoeff(); }
};

/// Uniform cavity of length L filling the whole grid.
MediumProfile uniform_medium(const Grid1D& grid, double n0);

/// Bragg cavity laid out as margin | mirror | cavity | mirror | margin with
/// sinusoidal mirrors. `cavity_length` is used as given; see
/// tune_bragg_cavity() to pick a resonant length first.
std::pair<Grid1D, MediumProfile> bragg_medium(const BraggSpec& spec, double dx);

/// Scans the cavity length over +-one grating period in steps of dx and
/// returns the length maximising transmission at `wavelength`, evaluated by
/// a transfer matrix on the discretised profile with the scheme's numerical
/// wavenumber at time step dt.
double tune_bragg_cavity(const BraggSpec& spec, double dx, double dt, double wavelength);

/// Transmission |t|^2 of the discretised profile at vacuum wavelength
/// `wavelength` (vacuum on both sides).
double profile_transmission(const MediumProfile& medium, double dx, double dt, double wavelength);

struct ModulationWaveform {
    enum class Kind { none, sinusoid, pulse_train };
    Kind kind{Kind::none};
    double delta_n{};  // amplitude (sinusoid) or peak (pulse_train)
    double Omega{};    // rad/s, sinusoid
    double phase{};    // rad, sinusoid
    double T{};        // s, pulse_train
    double tau_bar{};  // s, pulse_train
    /// m(x) in [0, 1] at E nodes; empty means no modulated cells.
    Eigen::ArrayXd mask;

    /// w(t); n(x, t) = n_s(x) + m(x) w(t).
    double value(double t) const;
    /// Lower bound of w over all t.
    double min_value() const;

    static ModulationWaveform sinusoid(double delta_n, double Omega, double phase, Eigen::ArrayXd mask);
};

/// Mask equal to 1 on nodes [begin, end] and 0 elsewhere.
Eigen::ArrayXd mask_range(const Grid1D& grid, int begin, int end);

struct SourceSpec {
    enum class Kind { none, seed_pulse, white_noise };
    Kind kind{Kind::none};
    // seed_pulse
    double wavelength{2e-6};  // vacuum carrier wavelength, m
    double width{};           // Gaussian 1/e half width, m; 0 = no envelope
    double center{};          // m
    bool standing_wave{true};
    // white_noise
    double amplitude{1e-6};
    std::uint64_t rng_seed{0};
};

struct BoundarySpec {
    enum class Kind { pec, mur1 };
    Kind left{Kind::pec};
    Kind right{Kind::pec};
};

struct RecorderConfig {
    int snapshot_stride{1 << 30};
    int intensity_stride{1};
    int probe_stride{1};
    std::vector<int> probes;
};

struct FieldState {
    Eigen::ArrayXd E;       // N + 1, time t^n
    Eigen::ArrayXd H;       // N, time t^{n-1/2}
    Eigen::ArrayXd D;       // N + 1, time t^n
    Eigen::ArrayXd E_prev;  // N + 1, time t^{n-1}
};

struct Snapshot {
    double t{};
    Eigen::ArrayXd E;
    Eigen::ArrayXd H;
    Eigen::ArrayXd n;
};

struct RecorderOutput {
    std::vector<Snapshot> snapshots;
    TimeSeries intensity;  // sum over cavity nodes of E^2 dx (normalised units)
    TimeSeries energy;     // total_energy()
    std::vector<TimeSeries> probes;
};

class Simulation {
public:
    const Grid1D& grid() const { return grid_; }
    const MediumProfile& medium() const { return medium_; }
    const ModulationWaveform& modulation() const { return modulation_; }
    const FieldState& state() const { return state_; }
    const RecorderConfig& recorder() const { return recorder_; }

    double dt() const { return dt_ * kUnitTime; }  // s
    double time() const { return steps_ * dt(); }  // s
    std::int64_t steps() const { return steps_; }

    void step();
    RecorderOutput run(double t_end);

    /// Time-centred discrete energy 1/2 sum (D^n E^{n-1} + H^{n-1/2} H^{n-1/2}) dx,
    /// exactly conserved by the scheme in a static lossless medium.
    double total_energy() const;
    /// Sum of E^2 dx over the cavity interior.
    double cavity_intensity() const;
    /// n(x, t) at the current step.
    Eigen::ArrayXd index_now() const;

    static constexpr double kUnitTime = 1e-6 / 299792458.0;

private:
    friend Simulation build_simulation(const Grid1D&, const MediumProfile&, const ModulationWaveform&,
                                       const BoundarySpec&, const SourceSpec&, const RecorderConfig&);
    void update_e(double t_next);

    Grid1D grid_;
    MediumProfile medium_;
    ModulationWaveform modulation_;
    BoundarySpec boundary_;
    RecorderConfig recorder_;
    FieldState state_;

    double dx_{};  // um
    double dt_{};  // um/c
    std::int64_t steps_{0};
    Eigen::ArrayXd inv_eps_s_;
    int mod_begin_{0}, mod_end_{0};  // [begin, end) of nodes with m > 0
    double mur_left_{}, mur_right_{};
};

/// dt = 0.5 dx n_min / c. Rejects grids with fewer than 40 cells per shortest
/// in-medium wavelength (source carrier and the resonant wavelength 4 pi c / Omega),
/// and modulations that drive n below zero.
Simulation build_simulation(const Grid1D& grid, const MediumProfile& medium, const ModulationWaveform& modulation,
                            const BoundarySpec& boundary, const SourceSpec& source, const RecorderConfig& recorder);

/// Free-function form of Simulation::total_energy.
inline double total_energy(const Simulation& sim) { return sim.total_energy(); }

inline constexpr double kCfl = 0.5;
inline constexpr double kCellsPerWavelength = 40.0;
inline constexpr double kBlowUp = 1e30;

}  // namespace dce::fdtd
