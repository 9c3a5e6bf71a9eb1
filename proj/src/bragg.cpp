#include <cmath>
#include <complex>

#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/fdtd.hpp"

namespace dce::fdtd {
namespace {

void validate(const BraggSpec& s, double dx) {
    if (!(dx > 0)) throw ValidationError("grid.dx", "must be > 0");
    if (!(s.n_lo > 0) || !(s.n_hi >= s.n_lo)) throw ValidationError("bragg.n_lo", "need 0 < n_lo <= n_hi");
    if (s.layers < 1) throw ValidationError("bragg.layers", "must be >= 1");
    if (!(s.period > 0)) throw ValidationError("bragg.period", "must be > 0");
    if (!(s.cavity_length > 0)) throw ValidationError("bragg.cavity_length", "must be > 0");
    if (!(s.cavity_index > 0)) throw ValidationError("bragg.cavity_index", "must be > 0");
    if (!(s.margin >= 0)) throw ValidationError("bragg.margin", "must be >= 0");
}

int cells(double length, double dx) { return static_cast<int>(std::lround(length / dx)); }

}  // namespace

std::pair<Grid1D, MediumProfile> bragg_medium(const BraggSpec& spec, double dx) {
    validate(spec, dx);
    const int margin = cells(spec.margin, dx);
    const int mirror = cells(0.5 * spec.layers * spec.period, dx);
    const int cavity = cells(spec.cavity_length, dx);

    Grid1D grid{dx, 2 * margin + 2 * mirror + cavity};
    MediumProfile m;
    m.kind = MediumProfile::Kind::bragg;
    m.n0 = spec.cavity_index;
    m.bragg = spec;
    m.n = Eigen::ArrayXd::Ones(grid.N + 1);

    const double nbar = 0.5 * (spec.n_lo + spec.n_hi), amp = 0.5 * (spec.n_hi - spec.n_lo);
    const int left_mirror = margin, cav_begin = margin + mirror, cav_end = cav_begin + cavity;
    const int right_mirror_end = cav_end + mirror;
    for (int i = left_mirror; i < cav_begin; ++i)
        m.n[i] = nbar + amp * std::sin(2 * kPi * (i - left_mirror) * dx / spec.period);
    for (int i = cav_begin; i <= cav_end; ++i) m.n[i] = spec.cavity_index;
    for (int i = cav_end + 1; i < right_mirror_end; ++i)
        m.n[i] = nbar + amp * std::sin(2 * kPi * (i - cav_end) * dx / spec.period);
    m.cavity_begin = cav_begin;
    m.cavity_end = cav_end;
    return {grid, m};
}

double profile_transmission(const MediumProfile& medium, double dx, double dt, double wavelength) {
    using C = std::complex<double>;
    // Normalised units: c = 1, lengths in um.
    const double h = dx * 1e6, tau = dt / Simulation::kUnitTime;
    const double omega = 2 * kPi / (wavelength * 1e6);
    const double s = std::sin(omega * tau / 2) / tau;
    C m11{1}, m12{0}, m21{0}, m22{1};
    for (Eigen::Index i = 0; i < medium.n.size(); ++i) {
        const double n = medium.n[i];
        // Yee numerical wavenumber in this layer.
        const double arg = n * h * s;
        const double k = arg < 1 ? 2 / h * std::asin(arg) : omega * n;
        const double c = std::cos(k * h), sn = std::sin(k * h);
        const C a11{c, 0}, a12{0, -sn / n}, a21{0, -n * sn}, a22{c, 0};
        const C b11 = m11 * a11 + m12 * a21, b12 = m11 * a12 + m12 * a22;
        const C b21 = m21 * a11 + m22 * a21, b22 = m21 * a12 + m22 * a22;
        m11 = b11, m12 = b12, m21 = b21, m22 = b22;
    }
    const C t = 2.0 / (m11 + m12 + m21 + m22);
    return std::norm(t);
}

double tune_bragg_cavity(const BraggSpec& spec, double dx, double dt, double wavelength) {
    validate(spec, dx);
    const int span = cells(spec.period, dx);
    double best_length = spec.cavity_length, best_t = -1;
    for (int k = -span; k <= span; ++k) {
        BraggSpec trial = spec;
        trial.cavity_length = spec.cavity_length + k * dx;
        if (!(trial.cavity_length > 0)) continue;
        const auto [grid, medium] = bragg_medium(trial, dx);
        const double t = profile_transmission(medium, dx, dt, wavelength);
        if (t > best_t) {
            best_t = t;
            best_length = trial.cavity_length;
        }
    }
    return best_length;
}

}  // namespace dce::fdtd
