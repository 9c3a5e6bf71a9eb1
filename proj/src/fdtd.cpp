#include "dce/fdtd.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dce/constants.hpp"
#include "dce/errors.hpp"

namespace dce::fdtd {
namespace {

constexpr double kUm = 1e6;  // m -> um

double max_abs(const Eigen::ArrayXd& a) { return a.size() ? a.abs().maxCoeff() : 0.0; }

}  // namespace

MediumProfile uniform_medium(const Grid1D& grid, double n0) {
    if (!(n0 > 0)) throw ValidationError("medium.n0", "index must be > 0");
    if (grid.N < 2) throw ValidationError("grid.N", "need at least two cells");
    MediumProfile m;
    m.kind = MediumProfile::Kind::uniform;
    m.n = Eigen::ArrayXd::Constant(grid.N + 1, n0);
    m.cavity_begin = 0;
    m.cavity_end = grid.N;
    m.n0 = n0;
    return m;
}

double ModulationWaveform::value(double t) const {
    switch (kind) {
        case Kind::none:
            return 0.0;
        case Kind::sinusoid:
            return delta_n * std::sin(Omega * t + phase);
        case Kind::pulse_train: {
            // Only the few nearest pulses matter for tau_bar << T.
            const double k0 = std::round(t / T);
            double w = 0;
            for (int k = -3; k <= 3; ++k) {
                const double u = (t - (k0 + k) * T) / tau_bar;
                w += std::exp(-u * u);
            }
            return delta_n * w;
        }
    }
    return 0.0;
}

double ModulationWaveform::min_value() const {
    switch (kind) {
        case Kind::none:
            return 0.0;
        case Kind::sinusoid:
            return -std::abs(delta_n);
        case Kind::pulse_train:
        {
            double peak = 1;
            for (int k = 1; k <= 3; ++k) peak += 2 * std::exp(-(k * T) * (k * T) / (tau_bar * tau_bar));
            return std::min(0.0, delta_n * peak);
        }
    }
    return 0.0;
}

ModulationWaveform ModulationWaveform::sinusoid(double delta_n, double Omega, double phase, Eigen::ArrayXd mask) {
    ModulationWaveform w;
    w.kind = Kind::sinusoid;
    w.delta_n = delta_n;
    w.Omega = Omega;
    w.phase = phase;
    w.mask = std::move(mask);
    return w;
}

Eigen::ArrayXd mask_range(const Grid1D& grid, int begin, int end) {
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(grid.N + 1);
    begin = std::max(begin, 0);
    end = std::min(end, grid.N);
    if (end >= begin) m.segment(begin, end - begin + 1) = 1.0;
    return m;
}

Simulation build_simulation(const Grid1D& grid, const MediumProfile& medium, const ModulationWaveform& modulation,
                            const BoundarySpec& boundary, const SourceSpec& source, const RecorderConfig& recorder) {
    if (!(grid.dx > 0)) throw ValidationError("grid.dx", "must be > 0");
    if (grid.N < 2) throw ValidationError("grid.N", "need at least two cells");
    if (medium.n.size() != grid.N + 1) throw ValidationError("medium", "profile size does not match grid");
    if (!(medium.n_min() > 0)) throw ValidationError("medium.n", "static index must be > 0 everywhere");
    if (medium.cavity_begin < 0 || medium.cavity_end > grid.N || medium.cavity_begin >= medium.cavity_end)
        throw ValidationError("medium.cavity", "cavity range outside grid");
    if (recorder.snapshot_stride < 1 || recorder.intensity_stride < 1 || recorder.probe_stride < 1)
        throw ValidationError("recorder", "strides must be >= 1");
    for (int p : recorder.probes)
        if (p < 0 || p > grid.N) throw ValidationError("recorder.probes", "probe index outside grid");

    Simulation sim;
    sim.grid_ = grid;
    sim.medium_ = medium;
    sim.modulation_ = modulation;
    sim.boundary_ = boundary;
    sim.recorder_ = recorder;
    sim.dx_ = grid.dx * kUm;
    sim.dt_ = kCfl * sim.dx_ * medium.n_min();

    const double n_max = medium.n_max() + std::abs(modulation.kind == ModulationWaveform::Kind::none ? 0.0
                                                                                                  : modulation.delta_n);
    auto check_resolution = [&](double vacuum_wavelength, const char* field) {
        const double cells = vacuum_wavelength / n_max / grid.dx;
        if (cells < kCellsPerWavelength)
            throw ValidationError(field, "grid under-resolves the in-medium wavelength (" + std::to_string(cells) +
                                             " cells, need " + std::to_string(kCellsPerWavelength) + ")");
    };

    using MK = ModulationWaveform::Kind;
    if (modulation.kind != MK::none) {
        if (modulation.mask.size() != grid.N + 1) throw ValidationError("modulation.mask", "size does not match grid");
        if ((modulation.mask < 0).any() || (modulation.mask > 1).any())
            throw ValidationError("modulation.mask", "values must lie in [0, 1]");
        if (modulation.kind == MK::sinusoid) {
            if (!(modulation.Omega > 0)) throw ValidationError("modulation.Omega", "must be > 0");
            check_resolution(4 * kPi * kSpeedOfLight / modulation.Omega, "grid.dx");
        } else {
            if (!(modulation.T > 0) || !(modulation.tau_bar > 0) || modulation.tau_bar >= modulation.T)
                throw ValidationError("modulation.pulse_train", "need 0 < tau_bar < T");
            check_resolution(2 * kSpeedOfLight * modulation.T, "grid.dx");
        }
        const Eigen::ArrayXd n_low = medium.n + modulation.mask * modulation.min_value();
        if (!(n_low.minCoeff() > 0))
            throw ValidationError("modulation.delta_n", "modulation drives the refractive index to <= 0");
        int b = 0;
        while (b <= grid.N && modulation.mask[b] == 0) ++b;
        int e = grid.N + 1;
        while (e > b && modulation.mask[e - 1] == 0) --e;
        sim.mod_begin_ = b;
        sim.mod_end_ = e;
    }
    if (source.kind == SourceSpec::Kind::seed_pulse) {
        if (!(source.wavelength > 0)) throw ValidationError("source.wavelength", "must be > 0");
        if (!(source.width >= 0)) throw ValidationError("source.width", "must be >= 0");
        check_resolution(source.wavelength, "grid.dx");
    }

    sim.inv_eps_s_ = medium.n.square().inverse();

    auto mur = [&](double n) { return (sim.dt_ / n - sim.dx_) / (sim.dt_ / n + sim.dx_); };
    sim.mur_left_ = mur(medium.n[0]);
    sim.mur_right_ = mur(medium.n[grid.N]);

    // Initial field.
    FieldState& s = sim.state_;
    s.E = Eigen::ArrayXd::Zero(grid.N + 1);
    s.H = Eigen::ArrayXd::Zero(grid.N);
    if (source.kind == SourceSpec::Kind::seed_pulse) {
        const double k = 2 * kPi / (source.wavelength * kUm);  // vacuum wavenumber, 1/um
        const double xc = source.center * kUm, w = source.width * kUm;
        auto envelope = [&](double x) { return w > 0 ? std::exp(-((x - xc) * (x - xc)) / (w * w)) : 1.0; };
        for (int i = 0; i <= grid.N; ++i) {
            const double x = i * sim.dx_;
            s.E[i] = std::sin(k * medium.n[i] * x) * envelope(x);
        }
        if (!source.standing_wave) {
            // Right-moving: H = -n E.
            for (int i = 0; i < grid.N; ++i) {
                const double x = (i + 0.5) * sim.dx_;
                const double n = 0.5 * (medium.n[i] + medium.n[i + 1]);
                s.H[i] = -n * std::sin(k * n * x) * envelope(x);
            }
        }
    } else if (source.kind == SourceSpec::Kind::white_noise) {
        std::mt19937_64 rng(source.rng_seed);
        std::normal_distribution<double> g(0.0, source.amplitude);
        for (int i = 0; i <= grid.N; ++i) s.E[i] = g(rng);
    }
    if (boundary.left == BoundarySpec::Kind::pec) s.E[0] = 0;
    if (boundary.right == BoundarySpec::Kind::pec) s.E[grid.N] = 0;

    // eps at t = 0 for D.
    Eigen::ArrayXd n0 = sim.index_now();
    s.D = s.E * n0.square();
    s.E_prev = s.E;
    return sim;
}

Eigen::ArrayXd Simulation::index_now() const {
    if (modulation_.kind == ModulationWaveform::Kind::none) return medium_.n;
    return medium_.n + modulation_.mask * modulation_.value(time());
}

void Simulation::update_e(double t_next) {
    FieldState& s = state_;
    const int N = grid_.N;
    const double E0_old = s.E[0], E1_old = s.E[1];
    const double EN_old = s.E[N], EN1_old = s.E[N - 1];

    s.E_prev.swap(s.E);
    s.E = s.D * inv_eps_s_;
    if (mod_end_ > mod_begin_) {
        const double w = modulation_.value(t_next);
        const int len = mod_end_ - mod_begin_;
        s.E.segment(mod_begin_, len) =
            s.D.segment(mod_begin_, len) /
            (medium_.n.segment(mod_begin_, len) + w * modulation_.mask.segment(mod_begin_, len)).square();
    }

    if (boundary_.left == BoundarySpec::Kind::pec) {
        s.E[0] = 0;
    } else {
        s.E[0] = E1_old + mur_left_ * (s.E[1] - E0_old);
    }
    if (boundary_.right == BoundarySpec::Kind::pec) {
        s.E[N] = 0;
    } else {
        s.E[N] = EN1_old + mur_right_ * (s.E[N - 1] - EN_old);
    }
    // Keep D consistent with the boundary E.
    s.D[0] = s.E[0] / inv_eps_s_[0];
    s.D[N] = s.E[N] / inv_eps_s_[N];
}

void Simulation::step() {
    FieldState& s = state_;
    const int N = grid_.N;
    const double r = dt_ / dx_;
    s.H += r * (s.E.tail(N) - s.E.head(N));
    s.D.segment(1, N - 1) += r * (s.H.tail(N - 1) - s.H.head(N - 1));
    ++steps_;
    update_e(time());
}

double Simulation::total_energy() const {
    const FieldState& s = state_;
    return 0.5 * ((s.D * s.E_prev).sum() + s.H.square().sum()) * dx_;
}

double Simulation::cavity_intensity() const {
    const int b = medium_.cavity_begin, e = medium_.cavity_end;
    return state_.E.segment(b, e - b + 1).square().sum() * dx_;
}

RecorderOutput Simulation::run(double t_end) {
    if (!(t_end > 0)) throw ValidationError("t_end", "must be > 0");
    const std::int64_t n_steps = static_cast<std::int64_t>(std::ceil(t_end / dt() - 1e-9));
    const auto& rc = recorder_;

    RecorderOutput out;
    std::vector<double> intensity, energy;
    std::vector<std::vector<double>> probes(rc.probes.size());
    const double t_start = time();

    auto record = [&](std::int64_t k) {
        if (k % rc.intensity_stride == 0) {
            intensity.push_back(cavity_intensity());
            energy.push_back(total_energy());
            if (!(max_abs(state_.E) < kBlowUp))
                throw RegimeError("above-threshold blow-up: field exceeded 1e30 at t = " + std::to_string(time()) +
                                  " s");
        }
        if (k % rc.probe_stride == 0)
            for (size_t p = 0; p < rc.probes.size(); ++p) probes[p].push_back(state_.E[rc.probes[p]]);
        if (k % rc.snapshot_stride == 0) out.snapshots.push_back({time(), state_.E, state_.H, index_now()});
    };

    record(0);
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        step();
        record(k);
        if ((k & 1023) == 0 && !(max_abs(state_.E) < kBlowUp))
            throw RegimeError("above-threshold blow-up: field exceeded 1e30 at t = " + std::to_string(time()) + " s");
    }

    auto to_series = [&](std::vector<double>& v, int stride) {
        TimeSeries ts;
        ts.t0 = t_start;
        ts.dt = stride * dt();
        ts.values = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        return ts;
    };
    out.intensity = to_series(intensity, rc.intensity_stride);
    out.energy = to_series(energy, rc.intensity_stride);
    for (auto& p : probes) out.probes.push_back(to_series(p, rc.probe_stride));
    return out;
}

}  // namespace dce::fdtd
