#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dce/model.hpp"

using namespace dce;
using C = std::complex<double>;

namespace {

constexpr double kC = Constants<double>::c;

// Realistic parameter set: 2 um mode, 1 um pump period, 1 fs pulses.
CavityMode<double> realistic_cavity() {
    return CavityMode<double>::make(2 * kPi * 0.15e15, 6e11, 2e-6, 0.5e-6, 1.5);
}

PumpPulseTrain<double> realistic_pump(double v_p = kC) {
    PumpPulseTrain<double> p;
    p.T = 1.0 / 0.3e15;
    p.tau = 1e-15;
    p.v_p = v_p;
    p.sigma_p = 0.5 * 2e-6;
    p.n2 = 3e-20;     // 3e-16 cm^2/W
    p.I_peak = 1e17;  // 1e13 W/cm^2
    p.validate();
    return p;
}

// Normalised cavity: gamma = 1, omega_c = 100.
CavityMode<double> unit_cavity() { return CavityMode<double>::make(100.0, 1.0, 1.0, 1.0, 1.5); }

// Trapezoidal Fourier-series coefficient of the sampled Gaussian train over
// one period. Periodic and smooth, so the rule converges exponentially.
double dense_fourier_coefficient(double A0, double tau_bar, double T, int j) {
    const int samples = 8192;
    long double acc = 0;
    for (int k = 0; k < samples; ++k) {
        const long double t = -T / 2 + (static_cast<long double>(k) / samples) * T;
        long double a = 0;
        for (int n = -40; n <= 40; ++n) {
            const long double u = (t - n * static_cast<long double>(T)) / tau_bar;
            a += std::exp(-u * u);
        }
        acc += A0 * a * std::cos(2 * std::numbers::pi_v<long double> * j * t / T);
    }
    return static_cast<double>(acc / samples);
}

double transmission(const CavityMode<double>& cav, double B, double Omega, double omega_s) {
    auto seed = SeedDrive<double>::symmetric(cav, 1.0, omega_s);
    return std::norm(seed_response(cav, B, Omega, seed).E_t);
}

}  // namespace

TEST_CASE("cavity and pump invariants") {
    CHECK_THROWS_AS(CavityMode<double>::make(-1, 1, 1, 1, 1.5), ValidationError);
    CHECK_THROWS_AS(CavityMode<double>::make(1, 0, 1, 1, 1.5), ValidationError);
    CHECK_NOTHROW(CavityMode<double>::make(1, 0.1, 1, 0, 1.5));  // sigma_c = 0 limit
    auto cav = CavityMode<double>::make(1, 0.1, 1, 1, 1.5);
    CHECK(cav.eps_c == 2.25);
    CHECK(cav.good_cavity());
    CHECK_FALSE(CavityMode<double>::make(1, 2, 1, 1, 1.5).good_cavity());

    auto p = realistic_pump();
    p.tau = p.T;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = realistic_pump();
    p.v_p = 1.01 * kC;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = realistic_pump();
    p.tau = 0;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("single_photon_amplitude") {
    auto cav = CavityMode<double>::make(2 * kPi * 0.15e15, 1e11, 2e-6, 0.5e-6, 1.5);
    // 50-digit evaluation of the closed form.
    CHECK(single_photon_amplitude(cav) == doctest::Approx(1.8798681011801624).epsilon(1e-14));

    auto longer = CavityMode<double>::make(cav.omega_c, cav.gamma_c, 2 * cav.L_c, cav.sigma_c, cav.n0);
    CHECK(single_photon_amplitude(longer) == doctest::Approx(single_photon_amplitude(cav) / std::sqrt(2.0)));
    auto wider = CavityMode<double>::make(cav.omega_c, cav.gamma_c, cav.L_c, 2 * cav.sigma_c, cav.n0);
    CHECK(single_photon_amplitude(wider) == doctest::Approx(single_photon_amplitude(cav) / 2));
}

TEST_CASE("effective_duration") {
    auto pump = realistic_pump();
    auto cav = realistic_cavity();
    CHECK(effective_duration(pump, cav) == doctest::Approx(1.9446401055552789e-15).epsilon(1e-14));

    auto point = CavityMode<double>::make(cav.omega_c, cav.gamma_c, cav.L_c, 0.0, cav.n0);
    CHECK(effective_duration(pump, point) == doctest::Approx(pump.tau).epsilon(1e-15));

    pump.tau = 0;
    CHECK(effective_duration(pump, cav) == doctest::Approx(cav.sigma_c / pump.v_p).epsilon(1e-15));

    auto slow = realistic_pump(kC / 1.5);
    CHECK(effective_duration(slow, cav) >= cav.sigma_c / slow.v_p);
    CHECK(effective_duration(slow, cav) >= slow.tau);
}

TEST_CASE("peak_index_shift") {
    auto pump = realistic_pump();
    CHECK(peak_index_shift(pump) == doctest::Approx(0.003).epsilon(1e-12));
    pump.I_peak *= 2;
    CHECK(peak_index_shift(pump) == doctest::Approx(0.006).epsilon(1e-12));
    pump.I_peak = 0;
    CHECK(peak_index_shift(pump) == 0.0);
}

TEST_CASE("coupling_peak") {
    auto cav = realistic_cavity();
    auto pump = realistic_pump();
    CHECK(coupling_peak(cav, pump) == doctest::Approx(-4.2951351108037361e11).epsilon(1e-13));

    auto dark = pump;
    dark.I_peak = 0;
    CHECK(coupling_peak(cav, dark) == 0.0);

    // sigma -> 0 at fixed tau_bar ~ sigma_c / v_p: vanishing overlap.
    auto shortp = pump;
    shortp.tau = 1e-21;
    CHECK(std::abs(coupling_peak(cav, shortp)) < 1e-5 * std::abs(coupling_peak(cav, pump)));
}

TEST_CASE("comb_weight") {
    EffectiveCoupling<double> k;
    k.A0_over_hbar = -2.5;
    k.tau_bar = 0.1;
    const double T = 1.0;

    CHECK(comb_weight(k, T, 0) == doctest::Approx(Constants<double>::sqrt_pi * k.tau_bar * k.A0_over_hbar / T));
    for (int j = 1; j <= 7; ++j) CHECK(comb_weight(k, T, j) == comb_weight(k, T, -j));

    for (int j = 0; j <= 5; ++j) {
        const double dense = dense_fourier_coefficient(k.A0_over_hbar, k.tau_bar, T, j);
        CHECK(comb_weight(k, T, j) == doctest::Approx(dense).epsilon(1e-6));
    }

    // Same check on the physical parameter set.
    auto c = coupling_B(realistic_cavity(), realistic_pump(), 1);
    const double Tp = realistic_pump().T;
    for (int j = 1; j <= 3; ++j)
        CHECK(comb_weight(c, Tp, j) ==
              doctest::Approx(dense_fourier_coefficient(c.A0_over_hbar, c.tau_bar, Tp, j)).epsilon(1e-6));
}

TEST_CASE("coupling_B") {
    auto cav = realistic_cavity();
    auto pump = realistic_pump();
    auto c = coupling_B(cav, pump, 1);
    CHECK(c.Omega_bar == 2 * kPi / pump.T);
    CHECK(coupling_B(cav, pump, 3).Omega_bar == 3 * (2 * kPi / pump.T));
    CHECK(c.B == doctest::Approx(-1.5441200437216843e10).epsilon(1e-12));
    CHECK_THROWS_AS(coupling_B(cav, pump, 0), ValidationError);

    auto dark = pump;
    dark.I_peak = 0;
    CHECK(coupling_B(cav, dark, 1).B == 0.0);

    // Adiabatic limit: longer effective duration kills the resonant component.
    double previous = std::abs(c.B);
    for (double waist : {1e-6, 2e-6, 4e-6}) {
        auto fat = CavityMode<double>::make(cav.omega_c, cav.gamma_c, cav.L_c, waist, cav.n0);
        const double b = std::abs(coupling_B(fat, pump, 1).B);
        CHECK(b < previous);
        previous = b;
    }
    CHECK(previous < 1e-20 * std::abs(c.B));
}

TEST_CASE("flux estimate for the realistic parameter set") {
    auto cav = realistic_cavity();
    auto c = coupling_B(cav, realistic_pump(), 1);
    const double phi = photon_flux(cav, c.B, c.Omega_bar);
    CHECK(phi == doctest::Approx(3.2131248352435642e9).epsilon(1e-10));
    CHECK(phi > 3e9);
    CHECK(phi < 3e10);
    CHECK(std::abs(c.B) < threshold_B(cav, c.Omega_bar));

    // Slower pump (v_p = c/n0) falls well short of the estimate.
    auto slow = coupling_B(cav, realistic_pump(kC / 1.5), 1);
    CHECK(photon_flux(cav, slow.B, slow.Omega_bar) == doctest::Approx(6.6016611896096524e6).epsilon(1e-10));
}

TEST_CASE("growth_rate") {
    CHECK(*growth_rate(0.25, 10.0, 20.0) == doctest::Approx(1.0));
    CHECK(*growth_rate(-0.25, 10.0, 20.0) == doctest::Approx(1.0));
    CHECK_FALSE(growth_rate(0.2, 10.0, 21.0).has_value());  // 2|B| = 0.4 < 0.5
    CHECK(*growth_rate(0.5, 10.0, 21.2) == doctest::Approx(1.6));
    // Edge of the tongue: exactly zero growth.
    auto edge = growth_rate(0.25, 10.0, 21.0);
    REQUIRE(edge.has_value());
    CHECK(*edge == 0.0);
}

TEST_CASE("threshold_B") {
    auto cav = unit_cavity();
    CHECK(threshold_B(cav, 200.0) == doctest::Approx(0.25));
    CHECK(threshold_B(cav, 2 * (100.0 - 1.0)) == doctest::Approx(0.5590169943749474));
    double last = 0;
    for (double d = 0; d < 5; d += 0.25) {
        const double b = threshold_B(cav, 2 * (100.0 + d));
        CHECK(b > last);
        last = b;
    }
}

TEST_CASE("photon_flux") {
    auto cav = unit_cavity();
    CHECK(photon_flux(cav, 0.0, 200.0) == 0.0);
    CHECK(photon_flux(cav, 0.1, 200.0) == doctest::Approx(2 * 0.01 / 0.21));
    CHECK_THROWS_AS(photon_flux(cav, 0.25, 200.0), RegimeError);
    CHECK_THROWS_AS(photon_flux(cav, 0.3, 200.0), RegimeError);

    // Monotone divergence towards threshold.
    double last = 0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
        const double phi = photon_flux(cav, 0.25 - eps, 200.0);
        CHECK(phi > last);
        last = phi;
    }
    CHECK(last > 1e4);
}

TEST_CASE("photon_flux properties (random)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto cav = unit_cavity();
    for (int trial = 0; trial < 500; ++trial) {
        const double d = 4 * (u01(rng) - 0.5);
        const double Omega = 2 * (cav.omega_c + d);
        const double bthr = threshold_B(cav, Omega);
        const double b1 = 0.98 * bthr * u01(rng);
        const double b2 = b1 + (0.98 * bthr - b1) * u01(rng);
        if (b2 > b1) CHECK(photon_flux(cav, b2, Omega) > photon_flux(cav, b1, Omega));
        CHECK(photon_flux(cav, -b1, Omega) == photon_flux(cav, b1, Omega));
        const double mirrored = 2 * (cav.omega_c - d);
        CHECK(photon_flux(cav, b1, mirrored) == doctest::Approx(photon_flux(cav, b1, Omega)).epsilon(1e-12));
    }
}

TEST_CASE("seed_response") {
    auto cav = unit_cavity();
    auto on = SeedDrive<double>::symmetric(cav, C(0.3, -0.4), cav.omega_c);
    auto r = seed_response(cav, 0.0, 200.0, on);
    CHECK(std::abs(r.E_t / on.E_s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.E_pc == C(0, 0));
    CHECK(r.steady_state_guaranteed);

    for (double ws : {95.0, 99.5, 100.7, 104.0}) {
        auto seed = SeedDrive<double>::symmetric(cav, 1.0, ws);
        CHECK(seed_response(cav, 0.0, 203.0, seed).E_pc == C(0, 0));
    }

    // Stimulated amplification at B/gamma = 0.15, resonant.
    double peak = 0;
    for (double ws = 97; ws <= 103; ws += 0.01) peak = std::max(peak, transmission(cav, 0.15, 200.0, ws));
    CHECK(peak > 1.0);
    CHECK(transmission(cav, 0.15, 200.0, 100.0) == doctest::Approx(peak));

    auto above = seed_response(cav, 0.3, 200.0, on);
    CHECK_FALSE(above.steady_state_guaranteed);
    CHECK(std::isfinite(std::abs(above.E_t)));
}

TEST_CASE("unmodulated transmission is a Lorentzian of width gamma") {
    auto cav = CavityMode<double>::make(50.0, 0.8, 1.0, 1.0, 1.5);
    auto half = [&](double ws) { return transmission(cav, 0.0, 100.0, ws) - 0.5; };
    auto bisect = [&](double lo, double hi) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((half(lo) < 0) == (half(mid) < 0) ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double right = bisect(cav.omega_c, cav.omega_c + 5);
    const double left = bisect(cav.omega_c - 5, cav.omega_c);
    CHECK(right - left == doctest::Approx(cav.gamma_c).epsilon(0.01));
}

TEST_CASE("response_poles") {
    auto cav = unit_cavity();
    for (double b : {0.05, 0.15, 0.24}) {
        auto p = response_poles(cav, b, 200.0);
        CHECK(p[0].real() == doctest::Approx(100.0));
        CHECK(std::abs(p[0].imag() - (-(0.5 - 2 * b))) < 1e-12);
        CHECK(std::abs(p[1].imag() - (-(0.5 + 2 * b))) < 1e-12);
    }
    double last = -1;
    for (double eps : {1e-1, 1e-2, 1e-4}) {
        const double im = response_poles(cav, 0.25 - eps, 200.0)[0].imag();
        CHECK(im > last);
        last = im;
    }
    CHECK(std::abs(last) < 1e-3);

    // Detuned: substituting the roots back into the quadratic denominator.
    for (double b : {0.05, 0.3, 0.9}) {
        for (double Omega : {202.0, 197.0}) {
            for (const C& w : response_poles(cav, b, Omega)) {
                const C val = (w - cav.omega_c + C(0, 0.5)) * (w + cav.omega_c - Omega + C(0, 0.5)) + 4 * b * b;
                CHECK(std::abs(val) < 1e-9 * cav.gamma_c * cav.gamma_c);
            }
        }
    }
}

TEST_CASE("response denominators vanish at the poles") {
    auto cav = unit_cavity();
    const double b = 0.3, Omega = 202.0;
    for (const C& w : response_poles(cav, b, Omega)) {
        const C signal = w - cav.omega_c + C(0, 0.5);
        const C idler = w + cav.omega_c - Omega + C(0, 0.5);
        // E_t denominator is signal + 4B^2/idler = (E_pc denominator)/idler.
        CHECK(std::abs(signal + 4 * b * b / idler) < 1e-12);
        CHECK(std::abs(signal * idler + 4 * b * b) < 1e-12);
    }
}

TEST_CASE("detuned response: split poles, phase-conjugate doublet") {
    auto cav = unit_cavity();
    const double Omega = 2 * cav.omega_c + 2 * cav.gamma_c, b = 0.3;
    auto poles = response_poles(cav, b, Omega);
    CHECK(std::abs(poles[0].real() - poles[1].real()) == doctest::Approx(1.6));
    std::vector<double> t, pc;
    for (double ws = 97; ws <= 104; ws += 0.005) {
        auto r = seed_response(cav, b, Omega, SeedDrive<double>::symmetric(cav, 1.0, ws));
        t.push_back(std::norm(r.E_t));
        pc.push_back(std::norm(r.E_pc));
    }
    auto maxima = [](const std::vector<double>& y) {
        int n = 0;
        for (size_t i = 1; i + 1 < y.size(); ++i)
            if (y[i] > y[i - 1] && y[i] > y[i + 1]) ++n;
        return n;
    };
    CHECK(maxima(pc) == 2);
    // The numerator zero of E_t near Omega - omega_c suppresses the second
    // transmitted peak.
    CHECK(maxima(t) == 1);
}

TEST_CASE("long double and double paths agree") {
    auto cav = realistic_cavity();
    auto pump = realistic_pump();
    auto cavl = CavityMode<long double>::make(cav.omega_c, cav.gamma_c, cav.L_c, cav.sigma_c, cav.n0);
    PumpPulseTrain<long double> pl{pump.T, pump.tau, pump.v_p, pump.sigma_p, pump.I_peak, pump.n2, 0, 0};
    auto cl = coupling_B(cavl, pl, 1);
    auto cd = coupling_B(cav, pump, 1);
    CHECK(cd.B == doctest::Approx(static_cast<double>(cl.B)).epsilon(1e-13));
}
