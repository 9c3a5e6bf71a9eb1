#include <fstream>
#include <sstream>

#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/harness.hpp"

namespace dce::harness {
namespace {

json flux_defaults() {
    return json::parse(R"({
        "pipeline": "flux",
        "seed": 1,
        "cavity": {"wavelength_um": 2.0, "gamma_per_s": 6e11, "length_um": 2.0, "waist_um": 0.5, "n0": 1.5},
        "pump": {
            "modulation_wavelength_um": 1.0,
            "duration_fs": 1.0,
            "waist_over_length": 0.5,
            "intensity_w_per_cm2": 1e13,
            "n2_cm2_per_w": 3e-16,
            "harmonic": 1,
            "speed_conventions": ["c", "c/n0"],
            "carrier_wavelength_um": 1.064
        },
        "oracle": {"ensemble": 0, "duration_over_gamma_inv": 40.0, "dt_over_gamma_inv": 0.02}
    })");
}

json response_defaults() {
    return json::parse(R"({
        "pipeline": "response",
        "seed": 1,
        "omega_c_over_gamma": 100.0,
        "seed_range_over_gamma": [-4.0, 6.0],
        "points": 2001,
        "curves": [
            {"b_over_gamma": 0.05, "modulation_detuning_over_gamma": 0.0},
            {"b_over_gamma": 0.15, "modulation_detuning_over_gamma": 0.0},
            {"b_over_gamma": 0.3, "modulation_detuning_over_gamma": 2.0}
        ]
    })");
}

json fdtd_defaults() {
    json j = json::parse(R"({
        "pipeline": "fdtd",
        "seed": 1,
        "cavity": {"kind": "uniform", "length_um": 2.0, "n0": 1.5},
        "bragg": {
            "n_lo": 1.45, "n_hi": 1.55, "layers": 30, "period_um": 0.6666666666666666,
            "margin_um": 5.0, "tune": true, "design_wavelength_um": 2.0
        },
        "modulation": {
            "kind": "sinusoid", "delta_n": 0.003, "wavelength_um": 1.0, "phase_rad": 0.0,
            "region": "cavity", "period_fs": null, "duration_fs": null
        },
        "source": {
            "kind": "seed_pulse", "wavelength_um": 2.0, "width_um": 0.0, "center_um": null,
            "standing_wave": true, "amplitude": 1e-6
        },
        "boundary": {"left": "pec", "right": "pec"},
        "numerics": {"dx_nm": 10.0, "t_end_ps": 5.0},
        "recorder": {"intensity_stride": 20, "snapshot_interval_ps": null, "probe_stride": 4, "probes_um": []},
        "analysis": {"fit_window_ps": null, "spectrum_times_ps": [], "beating_window_ps": null, "cycle_period_fs": null}
    })");
    j["modulation"]["phase_rad"] = kPi;
    return j;
}

std::string type_name(const json& v) {
    if (v.is_null()) return "null";
    if (v.is_boolean()) return "boolean";
    if (v.is_number()) return "number";
    if (v.is_string()) return "string";
    if (v.is_array()) return "array";
    return "object";
}

bool same_kind(const json& def, const json& v) {
    if (def.is_null()) return v.is_null() || v.is_number();
    if (def.is_number()) {
        if (!v.is_number()) return false;
        if (def.is_number_integer() && !v.is_number_integer()) {
            const double d = v.get<double>();
            return d == static_cast<double>(static_cast<long long>(d));
        }
        return true;
    }
    return type_name(def) == type_name(v);
}

void merge_into(json& base, const json& user, const std::string& path) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ValidationError(key, "unknown key");
        json& def = base[it.key()];
        const json& v = it.value();
        if (!same_kind(def, v))
            throw ValidationError(key, "expected " + type_name(def) + (def.is_null() ? " or number" : "") +
                                           ", got " + type_name(v));
        if (def.is_object()) {
            merge_into(def, v, key);
            continue;
        }
        if (def.is_array() && !def.empty() && def[0].is_primitive()) {
            for (size_t i = 0; i < v.size(); ++i)
                if (!same_kind(def[0], v[i]))
                    throw ValidationError(key + "[" + std::to_string(i) + "]", "expected " + type_name(def[0]));
        }
        // integral numbers keep the integer representation of the default
        if (def.is_number_integer() && v.is_number_float())
            def = static_cast<long long>(v.get<double>());
        else
            def = v;
    }
}

}  // namespace

json pipeline_defaults(const std::string& pipeline) {
    if (pipeline == "flux") return flux_defaults();
    if (pipeline == "response") return response_defaults();
    if (pipeline == "fdtd") return fdtd_defaults();
    throw ValidationError("pipeline", "unknown pipeline '" + pipeline + "' (flux, response, fdtd)");
}

json resolve_config(const json& user_in) {
    if (!user_in.is_object()) throw ValidationError("config", "must be a JSON object");
    json user = user_in;
    if (user.contains("schema_version") && user.contains("config")) user = user["config"];
    if (!user.is_object()) throw ValidationError("config", "must be a JSON object");

    json base;
    if (user.contains("preset")) {
        if (!user["preset"].is_string()) throw ValidationError("preset", "expected string");
        base = preset_config(user["preset"].get<std::string>());
        if (is_sweep(base))
            throw ValidationError("preset", "'" + user["preset"].get<std::string>() + "' is a sweep preset");
    } else if (user.contains("pipeline")) {
        if (!user["pipeline"].is_string()) throw ValidationError("pipeline", "expected string");
        base = pipeline_defaults(user["pipeline"].get<std::string>());
    } else {
        throw ValidationError("pipeline", "missing; give \"pipeline\" or \"preset\"");
    }

    json rest = user;
    rest.erase("preset");
    if (rest.contains("pipeline") && rest["pipeline"] != base["pipeline"])
        throw ValidationError("pipeline", "does not match the preset's pipeline");
    merge_into(base, rest, "");
    if (base["seed"].get<double>() < 0) throw ValidationError("seed", "must be >= 0");
    return base;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config", "cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ValidationError("config", path.string() + ": " + e.what());
    }
}

}  // namespace dce::harness
