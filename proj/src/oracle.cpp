#include "dce/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "dce/detail/linear_fit.hpp"
#include "dce/errors.hpp"

namespace dce {
namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream per (seed, member).
std::mt19937_64 member_rng(std::uint64_t seed, std::uint64_t member) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(member + 1)));
}

class ModeStepper {
public:
    ModeStepper(const ModeOdeParams& p, const std::optional<SeedDrive<double>>& drive)
        : p_(p), detuning_(p.omega_c - p.Omega_bar / 2) {
        if (drive) {
            drive_ = drive->kappa_c * drive->E_s;
            omega_s_ = drive->omega_s;
        }
    }

    cplx rhs(double t, cplx a) const {
        const double half_g = p_.gamma_c / 2;
        if (p_.frame == Frame::lab) {
            return -(I * p_.omega_c + half_g) * a - 2.0 * I * p_.B * std::polar(1.0, -p_.Omega_bar * t) * std::conj(a) -
                   I * drive_ * std::polar(1.0, -omega_s_ * t);
        }
        return -(I * detuning_ + half_g) * a - 2.0 * I * p_.B * std::conj(a) -
               I * drive_ * std::polar(1.0, -(omega_s_ - p_.Omega_bar / 2) * t);
    }

    cplx rk4(double t, cplx a, double h) const {
        const cplx k1 = rhs(t, a);
        const cplx k2 = rhs(t + h / 2, a + (h / 2) * k1);
        const cplx k3 = rhs(t + h / 2, a + (h / 2) * k2);
        const cplx k4 = rhs(t + h, a + h * k3);
        return a + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    cplx to_lab(double t, cplx a) const {
        return p_.frame == Frame::lab ? a : a * std::polar(1.0, -p_.Omega_bar * t / 2);
    }

private:
    ModeOdeParams p_;
    double detuning_;
    cplx drive_{0.0, 0.0};
    double omega_s_{0.0};
};

void check_params(const ModeOdeParams& p) {
    if (!(p.omega_c > 0)) throw ValidationError("omega_c", "must be > 0");
    if (!(p.gamma_c >= 0)) throw ValidationError("gamma_c", "must be >= 0");
    if (!std::isfinite(p.B)) throw ValidationError("B", "must be finite");
    if (!(p.Omega_bar >= 0)) throw ValidationError("Omega_bar", "must be >= 0");
}

/// dt must give 20 steps per period of the fastest frequency in the frame.
void check_resolution(const ModeOdeParams& p, const std::optional<SeedDrive<double>>& drive, double dt) {
    double f = std::max(p.gamma_c, 2 * std::abs(p.B));
    if (p.frame == Frame::lab) {
        f = std::max({f, p.omega_c, p.Omega_bar});
        if (drive) f = std::max(f, drive->omega_s);
    } else {
        f = std::max(f, std::abs(p.omega_c - p.Omega_bar / 2));
        if (drive) f = std::max(f, std::abs(drive->omega_s - p.Omega_bar / 2));
    }
    if (!(dt > 0)) throw ValidationError("dt", "must be > 0");
    if (f > 0 && dt > 2 * kPi / (20 * f))
        throw ValidationError("dt", "step does not resolve the fastest frequency (need dt <= 2 pi / (20 f_max))");
}

long step_count(double duration, double dt) {
    if (!(duration > 0)) throw ValidationError("duration", "must be > 0");
    const double ratio = duration / dt;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio))
        throw ValidationError("duration", "must be an integer multiple of dt");
    return n;
}

/// Drives one trajectory and hands every lab-frame sample (including t = 0)
/// to `visit(k, t, alpha)`.
template <typename Visitor>
void simulate(const ModeStepper& stepper, const ModeOdeParams& p, const NoiseSpec& noise, std::mt19937_64* rng,
              long steps, double dt, cplx alpha0, Visitor&& visit) {
    std::normal_distribution<double> normal;
    cplx a = alpha0;
    if (noise.enabled && noise.half_quantum) a += 0.5 * cplx(normal(*rng), normal(*rng));
    const double kick = std::sqrt(p.gamma_c * dt / 8);
    visit(0L, 0.0, stepper.to_lab(0.0, a));
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (noise.enabled) a += kick * cplx(normal(*rng), normal(*rng));
        a = stepper.rk4(t, a, dt);
        if (noise.enabled) a += kick * cplx(normal(*rng), normal(*rng));
        const double t1 = static_cast<double>(k + 1) * dt;
        visit(k + 1, t1, stepper.to_lab(t1, a));
    }
}

}  // namespace

Trajectory integrate_mode(const ModeOdeParams& params, const std::optional<SeedDrive<double>>& drive,
                          const NoiseSpec& noise, double duration, double dt, cplx alpha0) {
    check_params(params);
    check_resolution(params, drive, dt);
    if (drive) drive->validate();
    const long steps = step_count(duration, dt);

    Trajectory tr;
    tr.times.resize(steps + 1);
    tr.alpha.resize(steps + 1);
    ModeStepper stepper(params, drive);
    auto rng = member_rng(noise.rng_seed, 0);
    simulate(stepper, params, noise, &rng, steps, dt, alpha0, [&](long k, double t, cplx a) {
        tr.times[k] = t;
        tr.alpha[k] = a;
    });
    return tr;
}

FluxEstimate steady_state_flux(const ModeOdeParams& params, int ensemble_size, double duration, double dt,
                               std::uint64_t seed, int threads) {
    check_params(params);
    check_resolution(params, std::nullopt, dt);
    if (ensemble_size < 1000) throw ValidationError("ensemble_size", "must be >= 1000");
    if (!(params.gamma_c > 0)) throw ValidationError("gamma_c", "flux needs a lossy cavity");
    if (duration < 10 / params.gamma_c) throw ValidationError("duration", "must be >= 10/gamma_c");
    const long steps = step_count(duration, dt);
    const long q2 = steps / 2, q3 = (3 * steps) / 4;

    struct Member {
        double window_mean, third_quarter, last_quarter;
    };
    std::vector<Member> members(ensemble_size);
    ModeStepper stepper(params, std::nullopt);
    NoiseSpec noise{true, seed, true};

    auto run_member = [&](int m) {
        auto rng = member_rng(seed, static_cast<std::uint64_t>(m));
        double sum = 0, s3 = 0, s4 = 0;
        long n = 0, n3 = 0, n4 = 0;
        simulate(stepper, params, noise, &rng, steps, dt, cplx{}, [&](long k, double, cplx a) {
            if (k <= q2) return;
            const double occ = std::norm(a);
            sum += occ;
            ++n;
            if (k <= q3) {
                s3 += occ;
                ++n3;
            } else {
                s4 += occ;
                ++n4;
            }
        });
        members[m] = {sum / n, s3 / std::max(n3, 1L), s4 / std::max(n4, 1L)};
    };

    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int nthreads = std::clamp(threads > 0 ? threads : hw, 1, ensemble_size);
    if (nthreads == 1) {
        for (int m = 0; m < ensemble_size; ++m) run_member(m);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&] {
                for (int m = next++; m < ensemble_size; m = next++) run_member(m);
            });
        for (auto& th : pool) th.join();
    }

    Eigen::ArrayXd means(ensemble_size);
    double third = 0, last = 0;
    for (int m = 0; m < ensemble_size; ++m) {
        means[m] = members[m].window_mean;
        third += members[m].third_quarter;
        last += members[m].last_quarter;
    }
    third /= ensemble_size;
    last /= ensemble_size;
    if (!means.allFinite() || !std::isfinite(last) || last > 1e8 || last > 1.5 * third)
        throw RegimeError("steady_state_flux: ensemble occupation grows without bound (above threshold)");

    const double mean = means.mean();
    const double var = (means - mean).square().sum() / (ensemble_size - 1);
    FluxEstimate est;
    est.occupation = mean - 0.5;
    est.flux = params.gamma_c * est.occupation;
    est.standard_error = params.gamma_c * std::sqrt(var / ensemble_size);
    est.ensemble_size = ensemble_size;
    return est;
}

SeedResponse<double> steady_state_response(const ModeOdeParams& params, const SeedDrive<double>& seed,
                                           double duration, double dt) {
    check_params(params);
    seed.validate();
    check_resolution(params, seed, dt);
    const long steps = step_count(duration, dt);
    auto cavity = CavityMode<double>::make(params.omega_c, params.gamma_c, 1.0, 1.0, 1.0);
    if (!(std::abs(params.B) < threshold_B(cavity, params.Omega_bar)))
        throw RegimeError("steady_state_response: B at or above threshold, no steady state");

    SeedResponse<double> out;
    if (seed.E_s == cplx{}) return out;

    // The steady state is R-linear in the seed: alpha = u E + v E*. Running
    // with E and iE separates the signal (u E) and idler (v E*) parts exactly.
    const long first = steps / 2;
    const long window = steps - first + 1;
    Eigen::VectorXcd a1(window), a2(window);
    Eigen::VectorXd tw(window);
    for (int pass = 0; pass < 2; ++pass) {
        SeedDrive<double> d = seed;
        if (pass == 1) d.E_s *= I;
        ModeStepper stepper(params, d);
        Eigen::VectorXcd& dst = pass == 0 ? a1 : a2;
        simulate(stepper, params, NoiseSpec{}, nullptr, steps, dt, cplx{}, [&](long k, double t, cplx a) {
            if (k < first) return;
            dst[k - first] = a;
            tw[k - first] = t;
        });
    }

    const double idler_freq = params.Omega_bar - seed.omega_s;
    Eigen::VectorXcd signal(window), idler(window);
    for (long k = 0; k < window; ++k) {
        signal[k] = 0.5 * (a1[k] - I * a2[k]) * std::polar(1.0, seed.omega_s * tw[k]);
        idler[k] = 0.5 * (a1[k] + I * a2[k]) * std::polar(1.0, idler_freq * tw[k]);
    }
    const cplx a = signal.mean();
    const cplx b = idler.mean();

    const double scale = std::abs(a) + std::abs(b);
    const double residual = std::max((signal.array() - a).abs().maxCoeff(), (idler.array() - b).abs().maxCoeff());
    if (!(residual <= 1e-6 * scale))
        throw RegimeError("steady_state_response: demodulated amplitudes still time dependent (not converged)");

    out.E_t = seed.kappa_c * a;
    const double phase = std::arg(seed.E_s);
    out.E_pc = std::conj(seed.kappa_c * b) * std::polar(1.0, -2 * phase);
    out.steady_state_guaranteed = true;
    return out;
}

ParametricGrowth parametric_growth(double n0, double delta_n, double Omega, double omega_c, double duration,
                                   double dt) {
    if (!(n0 > 0)) throw ValidationError("n0", "must be > 0");
    if (!(std::abs(delta_n) <= 0.1 * n0)) throw ValidationError("delta_n", "must be small compared to n0");
    if (!(omega_c > 0)) throw ValidationError("omega_c", "must be > 0");
    if (!(Omega >= 0)) throw ValidationError("Omega", "must be >= 0");
    if (!(dt > 0) || dt > 2 * kPi / (20 * std::max(omega_c, Omega)))
        throw ValidationError("dt", "step does not resolve the optical period");

    // Snap the step so one optical period is an integer number of samples.
    const double period = 2 * kPi / omega_c;
    const long per_cycle = static_cast<long>(std::ceil(period / dt - 1e-9));
    const double h = period / static_cast<double>(per_cycle);
    const long cycles = static_cast<long>(std::floor(duration / period + 1e-9));
    if (cycles < 4) throw ValidationError("duration", "must cover at least four optical periods");

    auto accel = [&](double t, double u) {
        const double w = omega_c * n0 / (n0 + delta_n * std::sin(Omega * t));
        return -w * w * u;
    };
    auto proxy = [&](double u, double v) { return u * u + (v / omega_c) * (v / omega_c); };

    ParametricGrowth out;
    out.times.resize(cycles);
    out.energy.resize(cycles);
    double u = 1.0, v = 0.0;
    long k = 0;
    for (long c = 0; c < cycles; ++c) {
        double acc = 0;
        for (long s = 0; s < per_cycle; ++s, ++k) {
            const double t = static_cast<double>(k) * h;
            acc += proxy(u, v);
            const double k1u = v, k1v = accel(t, u);
            const double k2u = v + h / 2 * k1v, k2v = accel(t + h / 2, u + h / 2 * k1u);
            const double k3u = v + h / 2 * k2v, k3v = accel(t + h / 2, u + h / 2 * k2u);
            const double k4u = v + h * k3v, k4v = accel(t + h, u + h * k3u);
            u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
            v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        }
        out.times[c] = (static_cast<double>(c) + 0.5) * period;
        out.energy[c] = acc / static_cast<double>(per_cycle);
    }
    if (!out.energy.allFinite()) throw RegimeError("parametric_growth: oscillator blew up");

    const long start = cycles / 2;
    const long n = cycles - start;
    const auto fit = detail::fit_line(out.times.tail(n), out.energy.tail(n).array().log().matrix());
    out.r_squared = fit.r_squared;
    const double span = out.times[cycles - 1] - out.times[start];
    if (fit.slope > 0 && fit.slope * span >= 1.0 && fit.r_squared >= 0.9) out.rate = fit.slope;
    return out;
}

}  // namespace dce
