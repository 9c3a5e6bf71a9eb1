#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "dce/analysis.hpp"
#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/fdtd.hpp"
#include "dce/harness.hpp"
#include "dce/model.hpp"
#include "dce/oracle.hpp"

namespace fs = std::filesystem;

namespace dce::harness {
namespace {

const double kDbPerNeper = 10 * std::log10(std::exp(1.0));

// -- config access -------------------------------------------------------

const json& at(const json& c, const std::string& path) {
    const json* node = &c;
    size_t pos = 0;
    while (pos <= path.size()) {
        const size_t dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!node->is_object() || !node->contains(key)) throw ValidationError(path, "missing");
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return *node;
}

double num(const json& c, const std::string& path) {
    const json& v = at(c, path);
    if (!v.is_number()) throw ValidationError(path, "expected number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
    return d;
}

std::optional<double> opt_num(const json& c, const std::string& path) {
    if (at(c, path).is_null()) return std::nullopt;
    return num(c, path);
}

int integer(const json& c, const std::string& path) {
    const double d = num(c, path);
    if (d != std::round(d) || std::abs(d) > 1e9) throw ValidationError(path, "expected integer");
    return static_cast<int>(d);
}

std::string str(const json& c, const std::string& path) {
    const json& v = at(c, path);
    if (!v.is_string()) throw ValidationError(path, "expected string");
    return v.get<std::string>();
}

std::string one_of(const json& c, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::string s = str(c, path);
    std::string list;
    for (const char* a : allowed) {
        if (s == a) return s;
        list += (list.empty() ? "" : ", ") + std::string(a);
    }
    throw ValidationError(path, "'" + s + "' is not one of " + list);
}

std::optional<std::pair<double, double>> opt_window(const json& c, const std::string& path) {
    const json& v = at(c, path);
    if (v.is_null()) return std::nullopt;
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ValidationError(path, "expected [begin, end]");
    const double a = v[0].get<double>(), b = v[1].get<double>();
    if (!(b > a)) throw ValidationError(path, "end must exceed begin");
    return std::pair{a, b};
}

std::vector<double> numbers(const json& c, const std::string& path) {
    const json& v = at(c, path);
    if (!v.is_array()) throw ValidationError(path, "expected array");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ValidationError(path + "[" + std::to_string(i) + "]", "expected number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

// Library invariants report their own field names; map them to config keys.
template <typename F>
auto translating(F&& f) {
    static const std::map<std::string, std::string> names{
        {"grid.dx", "numerics.dx_nm"},
        {"grid.N", "cavity.length_um"},
        {"medium.n0", "cavity.n0"},
        {"medium.n", "cavity.n0"},
        {"source.wavelength", "source.wavelength_um"},
        {"source.width", "source.width_um"},
        {"t_end", "numerics.t_end_ps"},
        {"modulation.Omega", "modulation.wavelength_um"},
        {"modulation.pulse_train", "modulation.duration_fs"},
        {"recorder", "recorder.intensity_stride"},
        {"recorder.probes", "recorder.probes_um"},
        {"bragg.period", "bragg.period_um"},
        {"bragg.cavity_length", "cavity.length_um"},
        {"bragg.cavity_index", "cavity.n0"},
        {"bragg.margin", "bragg.margin_um"},
        {"cavity.omega_c", "cavity.wavelength_um"},
        {"cavity.gamma_c", "cavity.gamma_per_s"},
        {"cavity.L_c", "cavity.length_um"},
        {"cavity.sigma_c", "cavity.waist_um"},
        {"pump.T", "pump.modulation_wavelength_um"},
        {"pump.tau", "pump.duration_fs"},
        {"pump.v_p", "pump.speed_conventions"},
        {"pump.sigma_p", "pump.waist_over_length"},
        {"pump.I_peak", "pump.intensity_w_per_cm2"},
        {"pump.n2", "pump.n2_cm2_per_w"},
        {"harmonic", "pump.harmonic"},
    };
    try {
        return f();
    } catch (const ValidationError& e) {
        auto it = names.find(e.field());
        if (it == names.end()) throw;
        std::string msg = e.what();
        if (msg.rfind(e.field() + ": ", 0) == 0) msg = msg.substr(e.field().size() + 2);
        throw ValidationError(it->second, msg);
    }
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

int count_maxima(const std::vector<double>& v) {
    int n = 0;
    for (size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) ++n;
    return n;
}

// Full width at half maximum around the global maximum, by linear
// interpolation of the crossings. nullopt if a crossing is off the grid.
std::optional<double> fwhm(const std::vector<double>& x, const std::vector<double>& y) {
    size_t k = 0;
    for (size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[k]) k = i;
    const double half = y[k] / 2;
    auto cross = [&](size_t i, size_t j) { return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]); };
    size_t lo = k, hi = k;
    while (lo > 0 && y[lo] > half) --lo;
    while (hi + 1 < y.size() && y[hi] > half) ++hi;
    if (y[lo] > half || y[hi] > half) return std::nullopt;
    return cross(hi - 1, hi) - cross(lo, lo + 1);
}

// -- flux --------------------------------------------------------------------

RunResult run_flux(const json& c, const fs::path& out, int threads) {
    RunResult r;
    const auto cavity = translating([&] {
        return CavityMode<double>::make(angular_frequency_from_wavelength(num(c, "cavity.wavelength_um") * 1e-6),
                                        num(c, "cavity.gamma_per_s"), num(c, "cavity.length_um") * 1e-6,
                                        num(c, "cavity.waist_um") * 1e-6, num(c, "cavity.n0"));
    });
    const double Lambda = num(c, "pump.modulation_wavelength_um") * 1e-6;
    if (!(Lambda > 0)) throw ValidationError("pump.modulation_wavelength_um", "must be > 0");
    const int j = integer(c, "pump.harmonic");
    const double carrier = num(c, "pump.carrier_wavelength_um") * 1e-6;
    if (!(carrier > 0)) throw ValidationError("pump.carrier_wavelength_um", "must be > 0");

    PumpPulseTrain<double> pump;
    pump.T = Lambda / kSpeedOfLight;
    pump.tau = num(c, "pump.duration_fs") * 1e-15;
    pump.sigma_p = num(c, "pump.waist_over_length") * cavity.L_c;
    pump.I_peak = num(c, "pump.intensity_w_per_cm2") * 1e4;
    pump.n2 = num(c, "pump.n2_cm2_per_w") * 1e-4;
    pump.omega_p = angular_frequency_from_wavelength(carrier);
    pump.k_p = pump.omega_p / kSpeedOfLight;

    const double Omega_bar = j * 2 * kPi / pump.T;
    r.derived = {{"omega_c_rad_per_s", cavity.omega_c},
                 {"Omega_bar_rad_per_s", Omega_bar},
                 {"modulation_detuning_rad_per_s", Omega_bar - 2 * cavity.omega_c},
                 {"delta_n_peak", pump.n2 * pump.I_peak},
                 {"pump_period_fs", pump.T * 1e15},
                 {"single_photon_amplitude_statv_per_cm", single_photon_amplitude(cavity)},
                 {"B_thr_rad_per_s", threshold_B(cavity, Omega_bar)},
                 {"good_cavity", cavity.good_cavity()}};

    const json& conventions = at(c, "pump.speed_conventions");
    if (!conventions.is_array() || conventions.empty())
        throw ValidationError("pump.speed_conventions", "expected a non-empty array");
    std::vector<double> col_vp, col_tau, col_a0, col_b, col_thr, col_gamma, col_flux;
    r.results["conventions"] = json::array();
    const int ensemble = integer(c, "oracle.ensemble");
    if (ensemble < 0) throw ValidationError("oracle.ensemble", "must be >= 0");

    for (size_t i = 0; i < conventions.size(); ++i) {
        const std::string field = "pump.speed_conventions[" + std::to_string(i) + "]";
        if (!conventions[i].is_string()) throw ValidationError(field, "expected string");
        const std::string name = conventions[i].get<std::string>();
        if (name == "c")
            pump.v_p = kSpeedOfLight;
        else if (name == "c/n0")
            pump.v_p = kSpeedOfLight / cavity.n0;
        else
            throw ValidationError(field, "'" + name + "' is not one of c, c/n0");

        const auto coupling = translating([&] {
            pump.validate();
            return coupling_B(cavity, pump, j);
        });
        const double B = coupling.B, B_thr = threshold_B(cavity, coupling.Omega_bar);
        double flux;
        try {
            flux = photon_flux(cavity, B, coupling.Omega_bar);
        } catch (const RegimeError& e) {
            throw RegimeError(std::string(e.what()) + " (v_p = " + name + ", B/B_thr = " +
                              fmt("%.4g", std::abs(B) / B_thr) + ")");
        }
        const auto gamma = growth_rate(B, cavity.omega_c, coupling.Omega_bar);

        json row = {{"v_p", name},
                    {"v_p_m_per_s", pump.v_p},
                    {"tau_bar_fs", coupling.tau_bar * 1e15},
                    {"A0_over_hbar_rad_per_s", coupling.A0_over_hbar},
                    {"B_rad_per_s", B},
                    {"B_thr_rad_per_s", B_thr},
                    {"B_over_B_thr", std::abs(B) / B_thr},
                    {"below_threshold", std::abs(B) < B_thr},
                    {"Gamma_lossless_per_s", gamma ? json(*gamma) : json(nullptr)},
                    {"flux_per_s", flux}};

        if (ensemble > 0) {
            // Oracle in units of 1/gamma_c.
            const double g = cavity.gamma_c;
            ModeOdeParams p{cavity.omega_c / g, 1.0, B / g, coupling.Omega_bar / g, Frame::rotating};
            const auto est = steady_state_flux(p, ensemble, num(c, "oracle.duration_over_gamma_inv"),
                                               num(c, "oracle.dt_over_gamma_inv"),
                                               static_cast<std::uint64_t>(num(c, "seed")), threads);
            row["oracle_flux_per_s"] = est.flux * g;
            row["oracle_standard_error_per_s"] = est.standard_error * g;
        }
        r.results["conventions"].push_back(row);
        r.summary["flux_" + name] = flux;
        r.summary["B_over_B_thr_" + name] = std::abs(B) / B_thr;

        col_vp.push_back(pump.v_p);
        col_tau.push_back(coupling.tau_bar * 1e15);
        col_a0.push_back(coupling.A0_over_hbar);
        col_b.push_back(B);
        col_thr.push_back(B_thr);
        col_gamma.push_back(gamma ? *gamma : std::nan(""));
        col_flux.push_back(flux);
    }
    write_csv(out / "flux.csv",
              {"v_p_m_per_s", "tau_bar_fs", "A0_over_hbar_rad_per_s", "B_rad_per_s", "B_thr_rad_per_s",
               "Gamma_lossless_per_s", "flux_per_s"},
              {col_vp, col_tau, col_a0, col_b, col_thr, col_gamma, col_flux});
    r.files.push_back("flux.csv");
    return r;
}

// -- response ----------------------------------------------------------------

RunResult run_response(const json& c, const fs::path& out) {
    RunResult r;
    const double wc = num(c, "omega_c_over_gamma");
    if (!(wc > 0)) throw ValidationError("omega_c_over_gamma", "must be > 0");
    const auto range = numbers(c, "seed_range_over_gamma");
    if (range.size() != 2 || !(range[1] > range[0]))
        throw ValidationError("seed_range_over_gamma", "expected [low, high] with high > low");
    const int points = integer(c, "points");
    if (points < 3) throw ValidationError("points", "must be >= 3");
    const json& curves = at(c, "curves");
    if (!curves.is_array()) throw ValidationError("curves", "expected array");

    const auto cavity = CavityMode<double>::make(wc, 1.0, 1.0, 0.0, 1.0);
    std::vector<double> col_curve, col_b, col_det, col_x, col_t, col_pc;
    r.results["curves"] = json::array();
    for (size_t k = 0; k < curves.size(); ++k) {
        const std::string base = "curves[" + std::to_string(k) + "]";
        const json& cv = curves[k];
        if (!cv.is_object()) throw ValidationError(base, "expected object");
        for (auto it = cv.begin(); it != cv.end(); ++it)
            if (it.key() != "b_over_gamma" && it.key() != "modulation_detuning_over_gamma")
                throw ValidationError(base + "." + it.key(), "unknown key");
        auto field = [&](const char* key) {
            if (!cv.contains(key) || !cv[key].is_number()) throw ValidationError(base + "." + key, "expected number");
            return cv[key].get<double>();
        };
        const double b = field("b_over_gamma"), det = field("modulation_detuning_over_gamma");
        const double Omega_bar = 2 * wc + det;

        std::vector<double> x(points), t(points), pc(points);
        for (int i = 0; i < points; ++i) {
            x[i] = range[0] + (range[1] - range[0]) * i / (points - 1);
            const auto resp = seed_response(cavity, b, Omega_bar, SeedDrive<double>::symmetric(cavity, 1.0, wc + x[i]));
            t[i] = std::norm(resp.E_t);
            pc[i] = std::norm(resp.E_pc);
            col_curve.push_back(static_cast<double>(k));
            col_b.push_back(b);
            col_det.push_back(det);
        }
        col_x.insert(col_x.end(), x.begin(), x.end());
        col_t.insert(col_t.end(), t.begin(), t.end());
        col_pc.insert(col_pc.end(), pc.begin(), pc.end());

        const auto poles = response_poles(cavity, b, Omega_bar);
        const auto at_centre =
            seed_response(cavity, b, Omega_bar, SeedDrive<double>::symmetric(cavity, 1.0, Omega_bar / 2));
        const auto width = fwhm(x, t);
        r.results["curves"].push_back({
            {"b_over_gamma", b},
            {"modulation_detuning_over_gamma", det},
            {"B_thr_over_gamma", threshold_B(cavity, Omega_bar)},
            {"steady_state", at_centre.steady_state_guaranteed},
            {"poles_seed_detuning_over_gamma",
             {{poles[0].real() - wc, poles[0].imag()}, {poles[1].real() - wc, poles[1].imag()}}},
            {"narrow_pole_im_over_gamma", poles[0].imag()},
            {"transmitted_at_half_modulation", std::norm(at_centre.E_t)},
            {"phase_conjugate_at_half_modulation", std::norm(at_centre.E_pc)},
            {"transmitted_maxima", count_maxima(t)},
            {"phase_conjugate_maxima", count_maxima(pc)},
            {"transmitted_fwhm_over_gamma", width ? json(*width) : json(nullptr)},
        });
        r.summary["transmitted_maxima_" + std::to_string(k)] = count_maxima(t);
    }
    r.derived = {{"seed_step_over_gamma", (range[1] - range[0]) / (points - 1)}, {"curves", curves.size()}};
    write_csv(out / "response.csv",
              {"curve", "b_over_gamma", "modulation_detuning_over_gamma", "seed_detuning_over_gamma", "transmitted",
               "phase_conjugate"},
              {col_curve, col_b, col_det, col_x, col_t, col_pc});
    r.files.push_back("response.csv");
    return r;
}

// -- fdtd --------------------------------------------------------------------

struct FdtdSetup {
    fdtd::Grid1D grid;
    fdtd::MediumProfile medium;
    fdtd::ModulationWaveform modulation;
    fdtd::BoundarySpec boundary;
    fdtd::SourceSpec source;
    fdtd::RecorderConfig recorder;
    json derived;
};

fdtd::BoundarySpec::Kind boundary_kind(const json& c, const std::string& path) {
    return one_of(c, path, {"pec", "mur1"}) == "pec" ? fdtd::BoundarySpec::Kind::pec : fdtd::BoundarySpec::Kind::mur1;
}

FdtdSetup fdtd_setup(const json& c) {
    using namespace fdtd;
    FdtdSetup s;
    const double dx = num(c, "numerics.dx_nm") * 1e-9;
    if (!(dx > 0)) throw ValidationError("numerics.dx_nm", "must be > 0");
    const double n0 = num(c, "cavity.n0");
    const double length = num(c, "cavity.length_um") * 1e-6;
    if (!(length > 0)) throw ValidationError("cavity.length_um", "must be > 0");

    if (one_of(c, "cavity.kind", {"uniform", "bragg"}) == "uniform") {
        s.grid = Grid1D{dx, static_cast<int>(std::lround(length / dx))};
        s.medium = translating([&] { return uniform_medium(s.grid, n0); });
    } else {
        BraggSpec b;
        b.n_lo = num(c, "bragg.n_lo");
        b.n_hi = num(c, "bragg.n_hi");
        b.layers = integer(c, "bragg.layers");
        b.period = num(c, "bragg.period_um") * 1e-6;
        b.margin = num(c, "bragg.margin_um") * 1e-6;
        b.cavity_length = length;
        b.cavity_index = n0;
        const bool tune = at(c, "bragg.tune").get<bool>();
        const double design = num(c, "bragg.design_wavelength_um") * 1e-6;
        if (!(design > 0)) throw ValidationError("bragg.design_wavelength_um", "must be > 0");
        translating([&] {
            const auto [g0, m0] = bragg_medium(b, dx);
            const double dt = kCfl * dx * m0.n_min() / kSpeedOfLight;
            if (tune) b.cavity_length = tune_bragg_cavity(b, dx, dt, design);
            std::tie(s.grid, s.medium) = bragg_medium(b, dx);
            s.derived["bragg_transmission_at_design"] = profile_transmission(s.medium, dx, dt, design);
            return 0;
        });
        s.derived["mirror_length_um"] = 0.5 * b.layers * b.period * 1e6;
    }
    const int cb = s.medium.cavity_begin, ce = s.medium.cavity_end;
    s.derived["N"] = s.grid.N;
    s.derived["dx_m"] = dx;
    s.derived["cavity_begin_um"] = cb * dx * 1e6;
    s.derived["cavity_end_um"] = ce * dx * 1e6;
    s.derived["cavity_length_um"] = (ce - cb) * dx * 1e6;

    // modulation
    const std::string kind = one_of(c, "modulation.kind", {"none", "sinusoid", "pulse_train"});
    const Eigen::ArrayXd mask = one_of(c, "modulation.region", {"cavity", "all"}) == "cavity"
                                    ? mask_range(s.grid, cb, ce)
                                    : mask_range(s.grid, 0, s.grid.N);
    const double delta_n = num(c, "modulation.delta_n");
    if (kind == "sinusoid") {
        const double Lambda = num(c, "modulation.wavelength_um") * 1e-6;
        if (!(Lambda > 0)) throw ValidationError("modulation.wavelength_um", "must be > 0");
        const double Omega = angular_frequency_from_wavelength(Lambda);
        s.modulation = ModulationWaveform::sinusoid(delta_n, Omega, num(c, "modulation.phase_rad"), mask);
        // Single-mode bridge: n(t) = n0 + dn sin(Omega t) couples the mode at
        // Omega/2 with B = omega_c dn / (4 n0).
        const double wc = Omega / 2, B = wc * delta_n / (4 * n0);
        const auto gamma = growth_rate(B, wc, Omega);
        s.derived["Omega_rad_per_s"] = Omega;
        s.derived["omega_c_rad_per_s"] = wc;
        s.derived["B_rad_per_s"] = B;
        s.derived["Gamma_per_s"] = gamma ? json(*gamma) : json(nullptr);
        s.derived["bridge_gain_db_per_ps"] = wc * std::abs(delta_n) / n0 * 1e-12 * kDbPerNeper;
    } else if (kind == "pulse_train") {
        const auto T = opt_num(c, "modulation.period_fs"), tau = opt_num(c, "modulation.duration_fs");
        if (!T) throw ValidationError("modulation.period_fs", "required for pulse_train");
        if (!tau) throw ValidationError("modulation.duration_fs", "required for pulse_train");
        s.modulation.kind = ModulationWaveform::Kind::pulse_train;
        s.modulation.delta_n = delta_n;
        s.modulation.T = *T * 1e-15;
        s.modulation.tau_bar = *tau * 1e-15;
        s.modulation.mask = mask;
        s.derived["Omega_rad_per_s"] = 2 * kPi / s.modulation.T;
    }

    // source
    const std::string src = one_of(c, "source.kind", {"none", "seed_pulse", "white_noise"});
    s.source.kind = src == "none"          ? SourceSpec::Kind::none
                    : src == "seed_pulse" ? SourceSpec::Kind::seed_pulse
                                          : SourceSpec::Kind::white_noise;
    s.source.wavelength = num(c, "source.wavelength_um") * 1e-6;
    s.source.width = num(c, "source.width_um") * 1e-6;
    const auto centre = opt_num(c, "source.center_um");
    s.source.center = centre ? *centre * 1e-6 : 0.5 * (cb + ce) * dx;
    s.source.standing_wave = at(c, "source.standing_wave").get<bool>();
    s.source.amplitude = num(c, "source.amplitude");
    s.source.rng_seed = at(c, "seed").get<std::uint64_t>();

    s.boundary.left = boundary_kind(c, "boundary.left");
    s.boundary.right = boundary_kind(c, "boundary.right");

    s.recorder.intensity_stride = integer(c, "recorder.intensity_stride");
    s.recorder.probe_stride = integer(c, "recorder.probe_stride");
    const auto probes = numbers(c, "recorder.probes_um");
    for (size_t i = 0; i < probes.size(); ++i) s.recorder.probes.push_back(static_cast<int>(std::lround(probes[i] * 1e-6 / dx)));
    return s;
}

// H lives on half nodes; average onto E nodes for output.
Eigen::ArrayXd h_on_nodes(const Eigen::ArrayXd& H) {
    const Eigen::Index n = H.size();
    Eigen::ArrayXd out(n + 1);
    out[0] = H[0];
    out[n] = H[n - 1];
    if (n > 1) out.segment(1, n - 1) = 0.5 * (H.head(n - 1) + H.tail(n - 1));
    return out;
}

std::vector<double> scaled_times(const TimeSeries& s, double scale) {
    std::vector<double> t(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) t[k] = s.time(k) * scale;
    return t;
}

RunResult run_fdtd(const json& c, const fs::path& out) {
    using namespace fdtd;
    RunResult r;
    FdtdSetup s = fdtd_setup(c);
    const double t_end = num(c, "numerics.t_end_ps") * 1e-12;
    if (!(t_end > 0)) throw ValidationError("numerics.t_end_ps", "must be > 0");
    const auto snap_interval = opt_num(c, "recorder.snapshot_interval_ps");
    if (snap_interval && !(*snap_interval > 0)) throw ValidationError("recorder.snapshot_interval_ps", "must be > 0");

    auto build = [&] {
        return translating(
            [&] { return build_simulation(s.grid, s.medium, s.modulation, s.boundary, s.source, s.recorder); });
    };
    double dt = build().dt();
    if (snap_interval) {
        const double stride = std::round(*snap_interval * 1e-12 / dt);
        s.recorder.snapshot_stride = static_cast<int>(std::clamp(stride, 1.0, 1e9));
    }
    Simulation sim = build();
    dt = sim.dt();
    r.derived = s.derived;
    r.derived["dt_s"] = dt;
    r.derived["dt_fs"] = dt * 1e15;
    r.derived["steps"] = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
    r.derived["n_min"] = s.medium.n_min();
    r.derived["n_max"] = s.medium.n_max();
    r.derived["snapshot_stride"] = s.recorder.snapshot_stride;

    const RecorderOutput rec = sim.run(t_end);

    write_csv(out / "intensity.csv", {"t_fs", "intensity", "energy"},
              {scaled_times(rec.intensity, 1e15), to_vector(rec.intensity.values), to_vector(rec.energy.values)});
    r.files.push_back("intensity.csv");

    // cycle average over one period of the intensity ripple
    std::optional<double> period;
    if (const auto p = opt_num(c, "analysis.cycle_period_fs")) {
        if (!(*p > 0)) throw ValidationError("analysis.cycle_period_fs", "must be > 0");
        period = *p * 1e-15;
    } else if (s.modulation.kind == ModulationWaveform::Kind::sinusoid) {
        period = 4 * kPi / s.modulation.Omega;
    } else if (s.modulation.kind == ModulationWaveform::Kind::pulse_train) {
        period = 2 * s.modulation.T;
    } else if (s.source.kind == SourceSpec::Kind::seed_pulse) {
        period = s.source.wavelength / kSpeedOfLight;
    }
    TimeSeries avg = rec.intensity;
    if (period) {
        if (*period > 0.5 * t_end) throw ValidationError("analysis.cycle_period_fs", "longer than half the run");
        avg = analysis::cycle_average(rec.intensity, *period);
        r.derived["cycle_period_fs"] = *period * 1e15;
    }
    write_csv(out / "intensity_avg.csv", {"t_fs", "intensity"}, {scaled_times(avg, 1e15), to_vector(avg.values)});
    r.files.push_back("intensity_avg.csv");

    // gain
    analysis::FitWindow window;
    if (const auto w = opt_window(c, "analysis.fit_window_ps"))
        window = {w->first * 1e-12, w->second * 1e-12};
    else
        window = analysis::auto_window(avg);
    analysis::GainFit fit;
    try {
        fit = analysis::log_gain(avg, window);
    } catch (const ValidationError& e) {
        throw ValidationError("analysis.fit_window_ps", e.what());
    }
    r.results["gain"] = {{"G_db_per_ps", fit.G},
                         {"r_squared", fit.r_squared},
                         {"window_ps", {window.t_begin * 1e12, window.t_end * 1e12}},
                         {"auto_window", at(c, "analysis.fit_window_ps").is_null()}};
    r.summary["G_db_per_ps"] = fit.G;
    r.summary["r_squared"] = fit.r_squared;
    r.summary["fit_begin_ps"] = window.t_begin * 1e12;
    if (r.derived.contains("bridge_gain_db_per_ps")) {
        const double bridge = r.derived["bridge_gain_db_per_ps"].get<double>();
        r.results["gain"]["ratio_to_bridge"] = fit.G / bridge;
        r.summary["ratio_to_bridge"] = fit.G / bridge;
    }
    if (r.derived.contains("Omega_rad_per_s")) r.summary["Omega_rad_per_s"] = r.derived["Omega_rad_per_s"];
    r.summary["cavity_length_um"] = r.derived["cavity_length_um"];

    if (const auto w = opt_window(c, "analysis.beating_window_ps")) {
        analysis::Beating b;
        try {
            b = analysis::detect_beating(avg, {w->first * 1e-12, w->second * 1e-12});
        } catch (const ValidationError& e) {
            throw ValidationError("analysis.beating_window_ps", e.what());
        }
        r.results["beating"] = {{"present", b.present},
                                {"period_ps", b.period * 1e12},
                                {"amplitude_db", b.amplitude_db},
                                {"peak_to_median", b.peak_to_median},
                                {"window_ps", {w->first, w->second}}};
        r.summary["beating"] = b.present ? 1 : 0;
    }

    // snapshots
    for (size_t k = 0; k < rec.snapshots.size(); ++k) {
        const Snapshot& sn = rec.snapshots[k];
        std::vector<double> x(sn.E.size());
        for (size_t i = 0; i < x.size(); ++i) x[i] = i * s.grid.dx * 1e6;
        const Eigen::ArrayXd h = h_on_nodes(sn.H);
        const std::string name = fmt("snapshot_%04.0f.csv", static_cast<double>(k));
        write_csv(out / name, {"x_um", "E", "H", "n"},
                  {x, {sn.E.data(), sn.E.data() + sn.E.size()}, {h.data(), h.data() + h.size()},
                   {sn.n.data(), sn.n.data() + sn.n.size()}});
        r.files.push_back(name);
    }
    r.results["snapshot_times_ps"] = json::array();
    for (const auto& sn : rec.snapshots) r.results["snapshot_times_ps"].push_back(sn.t * 1e12);

    // spatial spectra of the cavity field
    const auto times = numbers(c, "analysis.spectrum_times_ps");
    r.results["spectra"] = json::array();
    for (size_t k = 0; k < times.size(); ++k) {
        const std::string field = "analysis.spectrum_times_ps[" + std::to_string(k) + "]";
        if (rec.snapshots.empty()) throw ValidationError(field, "needs recorder.snapshot_interval_ps");
        const double target = times[k] * 1e-12;
        size_t best = 0;
        for (size_t i = 1; i < rec.snapshots.size(); ++i)
            if (std::abs(rec.snapshots[i].t - target) < std::abs(rec.snapshots[best].t - target)) best = i;
        if (std::abs(rec.snapshots[best].t - target) > 0.5 * s.recorder.snapshot_stride * dt + 1e-18)
            throw ValidationError(field, "no snapshot near that time");
        const auto sp = analysis::spectrum_spatial(rec.snapshots[best].E, s.grid.dx, s.medium.n0,
                                                   s.medium.cavity_begin, s.medium.cavity_end);
        const auto peak = analysis::find_peak(sp);
        const std::string name = "spectrum_t" + fmt("%g", times[k]) + "ps.csv";
        write_csv(out / name, {"omega_rad_per_s", "magnitude"}, {to_vector(sp.omega), to_vector(sp.magnitude)});
        r.files.push_back(name);
        json row = {{"t_ps", rec.snapshots[best].t * 1e12},
                    {"peak_omega_rad_per_s", peak.omega},
                    {"peak_magnitude", peak.magnitude},
                    {"bin_width_rad_per_s", sp.bin_width()},
                    {"file", name}};
        if (s.modulation.kind == ModulationWaveform::Kind::sinusoid)
            row["offset_from_half_modulation_bins"] = (peak.omega - s.modulation.Omega / 2) / sp.bin_width();
        r.results["spectra"].push_back(row);
    }

    if (!rec.probes.empty()) {
        std::vector<std::string> header{"t_fs"};
        std::vector<std::vector<double>> cols{scaled_times(rec.probes[0], 1e15)};
        for (size_t i = 0; i < rec.probes.size(); ++i) {
            header.push_back("E_x" + fmt("%g", s.recorder.probes[i] * s.grid.dx * 1e6) + "um");
            cols.push_back(to_vector(rec.probes[i].values));
        }
        write_csv(out / "probes.csv", header, cols);
        r.files.push_back("probes.csv");
    }
    return r;
}

}  // namespace

RunResult run_pipeline(const json& resolved, const fs::path& out_dir, int threads) {
    fs::create_directories(out_dir);
    const std::string pipeline = str(resolved, "pipeline");
    if (pipeline == "flux") return run_flux(resolved, out_dir, threads);
    if (pipeline == "response") return run_response(resolved, out_dir);
    if (pipeline == "fdtd") return run_fdtd(resolved, out_dir);
    throw ValidationError("pipeline", "unknown pipeline '" + pipeline + "'");
}

json run_config(const json& user, const RunOptions& options) {
    json cfg = user;
    if (cfg.is_object() && cfg.contains("schema_version") && cfg.contains("config")) cfg = cfg["config"];
    if (options.seed && cfg.is_object()) cfg["seed"] = *options.seed;
    const json resolved = resolve_config(cfg);

    const auto start = std::chrono::steady_clock::now();
    RunResult r = run_pipeline(resolved, options.out_dir, options.threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest = {{"schema_version", kSchemaVersion},
                     {"tool_version", kToolVersion},
                     {"config", resolved},
                     {"seed", resolved["seed"]},
                     {"derived", r.derived},
                     {"results", r.results},
                     {"summary", r.summary},
                     {"files", r.files},
                     {"timing", {{"wall_s", wall}}}};
    std::ofstream f(options.out_dir / "manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (options.out_dir / "manifest.json").string());
    f << manifest.dump(2) << '\n';
    return manifest;
}

}  // namespace dce::harness
