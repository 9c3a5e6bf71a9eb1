#include <doctest.h>

#include <cmath>
#include <complex>

#include "dce/detail/linear_fit.hpp"
#include "dce/model.hpp"
#include "dce/oracle.hpp"

using namespace dce;
using C = std::complex<double>;

namespace {

ModeOdeParams rotating(double B, double Omega, double omega_c = 100.0, double gamma = 1.0) {
    return {omega_c, gamma, B, Omega, Frame::rotating};
}

double relative(C a, C b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("pure decay") {
    auto tr = integrate_mode(rotating(0.0, 200.0), std::nullopt, NoiseSpec{}, 5.0, 0.01, 1.0);
    REQUIRE(tr.times.size() == 501);
    CHECK(tr.times[500] == doctest::Approx(5.0));
    CHECK(tr.photon_number()[500] == doctest::Approx(std::exp(-5.0)).epsilon(1e-6));
    // Lab-frame phase is carried through the frame map.
    CHECK(relative(tr.alpha[500], std::exp(C(-2.5, -500.0))) < 1e-6);
}

TEST_CASE("step-size rejection") {
    ModeOdeParams lab{100.0, 1.0, 0.0, 200.0, Frame::lab};
    CHECK_THROWS_AS(integrate_mode(lab, std::nullopt, NoiseSpec{}, 1.0, 0.01), ValidationError);
    CHECK_NOTHROW(integrate_mode(lab, std::nullopt, NoiseSpec{}, 0.1, 0.001));
    CHECK_THROWS_AS(integrate_mode(rotating(0, 200), std::nullopt, NoiseSpec{}, 1.0, 0.3), ValidationError);
    CHECK_THROWS_AS(integrate_mode(rotating(0, 200), std::nullopt, NoiseSpec{}, 1.005, 0.01), ValidationError);
}

TEST_CASE("lab and rotating frames agree") {
    const double omega_c = 20.0, Omega = 40.3;
    auto cav = CavityMode<double>::make(omega_c, 1.0, 1, 1, 1);
    auto drive = SeedDrive<double>::symmetric(cav, C(0.7, 0.2), 20.2);
    ModeOdeParams lab{omega_c, 1.0, 0.15, Omega, Frame::lab};
    ModeOdeParams rot = lab;
    rot.frame = Frame::rotating;
    auto a = integrate_mode(lab, drive, NoiseSpec{}, 10.0, 0.002, 1.0);
    auto b = integrate_mode(rot, drive, NoiseSpec{}, 10.0, 0.002, 1.0);
    double worst = 0;
    for (Eigen::Index k = 0; k < a.alpha.size(); ++k)
        worst = std::max(worst, std::abs(std::abs(a.alpha[k]) - std::abs(b.alpha[k])) / std::abs(b.alpha[k]));
    CHECK(worst < 1e-5);
}

TEST_CASE("deterministic part is fourth-order convergent") {
    ModeOdeParams lab{10.0, 1.0, 0.0, 20.0, Frame::lab};
    const double duration = 2.0;
    const C exact = std::exp(C(-0.5, -10.0) * duration);
    Eigen::VectorXd logdt(4), logerr(4);
    int i = 0;
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        auto tr = integrate_mode(lab, std::nullopt, NoiseSpec{}, duration, dt, 1.0);
        logdt[i] = std::log(dt);
        logerr[i] = std::log(std::abs(tr.alpha[tr.alpha.size() - 1] - exact));
        ++i;
    }
    CHECK(detail::fit_line(logdt, logerr).slope == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("lossless growth follows the parametric rate") {
    const double B = 0.3;
    ModeOdeParams p{100.0, 0.0, B, 200.0, Frame::rotating};
    auto tr = integrate_mode(p, std::nullopt, NoiseSpec{}, 20.0, 0.005, 1.0);
    const Eigen::Index half = tr.times.size() / 2;
    const auto fit = detail::fit_line(tr.times.tail(half), tr.photon_number().tail(half).array().log().matrix());
    CHECK(fit.slope == doctest::Approx(*growth_rate(B, 100.0, 200.0)).epsilon(0.02));

    // Outside the tongue the photon number stays bounded.
    ModeOdeParams off{100.0, 0.0, B, 2 * (100.0 + 1.0), Frame::rotating};
    auto bounded = integrate_mode(off, std::nullopt, NoiseSpec{}, 60.0, 0.005, 1.0);
    CHECK_FALSE(growth_rate(B, 100.0, off.Omega_bar).has_value());
    CHECK(bounded.photon_number().maxCoeff() < 5.0);
}

TEST_CASE("noise trajectories are reproducible from the seed") {
    NoiseSpec noise{true, 1234, true};
    auto a = integrate_mode(rotating(0.1, 200), std::nullopt, noise, 5.0, 0.01);
    auto b = integrate_mode(rotating(0.1, 200), std::nullopt, noise, 5.0, 0.01);
    CHECK((a.alpha.array() == b.alpha.array()).all());
    noise.rng_seed = 1235;
    auto c = integrate_mode(rotating(0.1, 200), std::nullopt, noise, 5.0, 0.01);
    CHECK_FALSE((a.alpha.array() == c.alpha.array()).all());
}

TEST_CASE("vacuum equilibrium and zero flux without modulation") {
    auto est = steady_state_flux(rotating(0.0, 200), 2000, 30.0, 0.02, 99, 1);
    CHECK(std::abs(est.flux) < 3 * est.standard_error);
    CHECK(std::abs(est.occupation) < 3 * est.standard_error / 1.0);
}

TEST_CASE("flux ensemble reproduces the closed form (small ensemble)") {
    auto cav = CavityMode<double>::make(100.0, 1.0, 1, 1, 1);
    auto est = steady_state_flux(rotating(0.1, 200), 2000, 40.0, 0.02, 5, 1);
    const double expected = photon_flux(cav, 0.1, 200.0);
    CHECK(expected == doctest::Approx(0.0952380952).epsilon(1e-9));
    CHECK(std::abs(est.flux - expected) < 3 * est.standard_error);
}

TEST_CASE("flux ensemble is independent of thread count") {
    auto a = steady_state_flux(rotating(0.1, 200), 1000, 10.0, 0.05, 17, 1);
    auto b = steady_state_flux(rotating(0.1, 200), 1000, 10.0, 0.05, 17, 3);
    CHECK(a.flux == b.flux);
    CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("flux scales as B^2 for weak modulation") {
    // Common random numbers with +B/-B pairs cancel the first-order noise
    // term; flux is even in B, so the pair average is an unbiased estimate.
    const std::uint64_t seed = 2024;
    const int members = 1000;
    const double duration = 40.0, dt = 0.02;
    const double control = steady_state_flux(rotating(0.0, 200), members, duration, dt, seed, 1).flux;
    Eigen::VectorXd logb(3), logf(3);
    int i = 0;
    for (double b : {0.007, 0.022, 0.07}) {
        const double plus = steady_state_flux(rotating(b, 200), members, duration, dt, seed, 1).flux;
        const double minus = steady_state_flux(rotating(-b, 200), members, duration, dt, seed, 1).flux;
        logb[i] = std::log(b);
        logf[i] = std::log(0.5 * (plus + minus) - control);
        ++i;
    }
    CHECK(detail::fit_line(logb, logf).slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("divergence above threshold is detected") {
    CHECK_THROWS_AS(steady_state_flux(rotating(0.4, 200), 1000, 20.0, 0.02, 3, 1), RegimeError);
    CHECK_THROWS_AS(steady_state_flux(rotating(0.1, 200), 10, 20.0, 0.02, 3, 1), ValidationError);
}

TEST_CASE("steady_state_response") {
    auto cav = CavityMode<double>::make(100.0, 1.0, 1, 1, 1);

    SUBCASE("no modulation") {
        auto seed = SeedDrive<double>::symmetric(cav, C(1.0, 0.5), 100.0);
        auto r = steady_state_response(rotating(0.0, 200), seed, 100.0, 0.01);
        CHECK(std::abs(r.E_t / seed.E_s) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(r.E_pc) < 1e-8 * std::abs(seed.E_s));
    }
    SUBCASE("resonant modulation, degenerate seed") {
        auto seed = SeedDrive<double>::symmetric(cav, C(0.8, -0.3), 100.0);
        auto r = steady_state_response(rotating(0.15, 200), seed, 200.0, 0.01);
        auto model = seed_response(cav, 0.15, 200.0, seed);
        CHECK(relative(r.E_t, model.E_t) < 1e-4);
        CHECK(relative(r.E_pc, model.E_pc) < 1e-4);
    }
    SUBCASE("detuned seed") {
        auto seed = SeedDrive<double>::symmetric(cav, C(0.0, 1.0), 100.6);
        auto r = steady_state_response(rotating(0.2, 201.0), seed, 200.0, 0.01);
        auto model = seed_response(cav, 0.2, 201.0, seed);
        CHECK(relative(r.E_t, model.E_t) < 1e-4);
        CHECK(relative(r.E_pc, model.E_pc) < 1e-4);
    }
    SUBCASE("unconverged run is rejected") {
        auto seed = SeedDrive<double>::symmetric(cav, 1.0, 100.0);
        CHECK_THROWS_AS(steady_state_response(rotating(0.24, 200), seed, 10.0, 0.01), RegimeError);
        CHECK_THROWS_AS(steady_state_response(rotating(0.3, 200), seed, 10.0, 0.01), RegimeError);
    }
}

TEST_CASE("detuned oracle response reproduces the closed-form line shapes") {
    auto cav = CavityMode<double>::make(100.0, 1.0, 1, 1, 1);
    const double Omega = 2 * 100.0 + 2.0, B = 0.3;
    std::vector<double> t, pc;
    for (double ws = 98.0; ws <= 103.0; ws += 0.1) {
        auto seed = SeedDrive<double>::symmetric(cav, 1.0, ws);
        auto r = steady_state_response(rotating(B, Omega), seed, 80.0, 0.01);
        auto model = seed_response(cav, B, Omega, seed);
        CHECK(std::norm(r.E_t) == doctest::Approx(std::norm(model.E_t)).epsilon(1e-6));
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
    CHECK(maxima(t) == 1);
}

TEST_CASE("parametric_growth") {
    const double omega_c = 1.0, n0 = 1.5;

    SUBCASE("no modulation: no growth, energy conserved") {
        auto g = parametric_growth(n0, 0.0, 2.0, omega_c, 200.0, 0.01);
        CHECK_FALSE(g.rate.has_value());
        const double e0 = g.energy[0];
        CHECK(((g.energy.array() / e0) - 1.0).abs().maxCoeff() < 1e-8);
    }
    SUBCASE("resonant: first-order rate") {
        const double dn = 0.003;
        auto g = parametric_growth(n0, dn, 2 * omega_c, omega_c, 6000.0, 2 * kPi / 50);
        REQUIRE(g.rate.has_value());
        CHECK(*g.rate == doctest::Approx(omega_c * dn / n0).epsilon(0.05));
    }
    SUBCASE("outside the tongue: bounded") {
        const double dn = 0.003;
        const double B = omega_c * dn / (4 * n0);
        const double Omega = 2 * (omega_c + 8 * B);
        CHECK_FALSE(growth_rate(B, omega_c, Omega).has_value());
        auto g = parametric_growth(n0, dn, Omega, omega_c, 6000.0, 2 * kPi / 50);
        CHECK_FALSE(g.rate.has_value());
        CHECK(g.energy.maxCoeff() < 10 * g.energy[0]);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(parametric_growth(n0, 0.5, 2, 1, 100, 0.01), ValidationError);
        CHECK_THROWS_AS(parametric_growth(n0, 0.003, 2, 1, 100, 0.2), ValidationError);
    }
}
