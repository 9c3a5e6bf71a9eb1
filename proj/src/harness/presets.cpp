#include "dce/errors.hpp"
#include "dce/harness.hpp"

namespace dce::harness {
namespace {

json with(json base, const json& patch) {
    base.merge_patch(patch);
    return base;
}

json fig3_resonant() {
    return with(pipeline_defaults("fdtd"), json::parse(R"({
        "cavity": {"length_um": 2.0},
        "numerics": {"t_end_ps": 5.0},
        "recorder": {"snapshot_interval_ps": 0.5, "probes_um": [0.5]},
        "analysis": {"spectrum_times_ps": [0.0, 5.0]}
    })"));
}

// Cavity modes of a 1.5-index PEC cavity: lambda = 2 n L / m. Every listed
// wavelength is a mode of the length it is paired with, and the pump runs at
// twice the mode frequency (Lambda = lambda / 2).
json fig3_gain_sweep() {
    json base = with(pipeline_defaults("fdtd"), json::parse(R"({
        "cavity": {"length_um": 8.0},
        "numerics": {"t_end_ps": 5.0}
    })"));
    json points = json::array();
    auto point = [&](double length, double lambda) {
        // a localised seed (quarter-cavity envelope) rather than the bare mode
        points.push_back({{"cavity", {{"length_um", length}}},
                          {"source", {{"wavelength_um", lambda}, {"width_um", length / 4}}},
                          {"modulation", {{"wavelength_um", lambda / 2}}}});
    };
    for (double L : {8.0, 10.0, 16.0}) point(L, 2.0);
    for (double lambda : {4.0, 3.0, 2.4, 1.5, 4.0 / 3.0}) point(8.0, lambda);
    return {{"preset", "fig3-gain-sweep"}, {"base", base}, {"points", points}, {"report", "gain_table"}};
}

json fig4_noise() {
    return with(pipeline_defaults("fdtd"), json::parse(R"({
        "cavity": {"length_um": 80.0},
        "source": {"kind": "white_noise", "amplitude": 1e-6},
        "numerics": {"t_end_ps": 20.0},
        "recorder": {"snapshot_interval_ps": 1.0},
        "analysis": {"spectrum_times_ps": [0.0, 4.0, 10.0, 13.0]}
    })"));
}

json fig5_bragg() {
    return with(pipeline_defaults("fdtd"), json::parse(R"({
        "cavity": {"kind": "bragg", "length_um": 170.0},
        "source": {"width_um": 20.0, "standing_wave": false},
        "boundary": {"left": "mur1", "right": "mur1"},
        "numerics": {"dx_nm": 20.0, "t_end_ps": 30.0},
        "recorder": {"snapshot_interval_ps": 5.0},
        "analysis": {"fit_window_ps": [15.0, 30.0], "beating_window_ps": [10.0, 30.0]}
    })"));
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"flux-estimate", "fig2-response", "fig3-resonant", "fig3-gain-sweep", "fig4-noise", "fig5-bragg"};
}

json preset_config(const std::string& name) {
    json c;
    if (name == "flux-estimate")
        c = pipeline_defaults("flux");
    else if (name == "fig2-response")
        c = pipeline_defaults("response");
    else if (name == "fig3-resonant")
        c = fig3_resonant();
    else if (name == "fig3-gain-sweep")
        return fig3_gain_sweep();
    else if (name == "fig4-noise")
        c = fig4_noise();
    else if (name == "fig5-bragg")
        c = fig5_bragg();
    else
        throw ValidationError("preset", "unknown preset '" + name + "'");
    c["preset"] = name;
    return c;
}

bool is_sweep(const json& config) {
    return config.is_object() && config.contains("base") && (config.contains("points") || config.contains("values"));
}

json run_preset(const std::string& name, const RunOptions& options) {
    const json c = preset_config(name);
    return is_sweep(c) ? run_sweep(c, options) : run_config(c, options);
}

}  // namespace dce::harness
