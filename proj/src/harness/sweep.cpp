#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include <Eigen/Dense>

#include "dce/constants.hpp"
#include "dce/errors.hpp"
#include "dce/harness.hpp"

namespace fs = std::filesystem;

namespace dce::harness {
namespace {

// "a.b.c" -> {"a": {"b": {"c": value}}}
json nested(const std::string& path, const json& value) {
    json out = value;
    size_t end = path.size();
    while (true) {
        const size_t dot = path.rfind('.', end - 1);
        const size_t begin = dot == std::string::npos ? 0 : dot + 1;
        out = json{{path.substr(begin, end - begin), out}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    return out;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else {
        out.emplace_back(prefix, j);
    }
}

std::string cell(const json& v) {
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

struct PointOutcome {
    bool ok{false};
    std::string error;
    std::string error_kind;
    json summary = json::object();
};

// Straight-line fit y = a + b x; returns {slope, intercept, R^2}. x is
// centred first so that columns of very different scale stay well posed.
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const Eigen::VectorXd X = Eigen::VectorXd::Map(x.data(), x.size());
    const Eigen::VectorXd Y = Eigen::VectorXd::Map(y.data(), y.size());
    const Eigen::VectorXd dx = X.array() - X.mean();
    const double slope = dx.dot(Y) / dx.squaredNorm();
    const double intercept = Y.mean() - slope * X.mean();
    const double ss_res = (Y.array() - intercept - slope * X.array()).square().sum();
    const double ss_tot = (Y.array() - Y.mean()).square().sum();
    return {slope, intercept, ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0};
}

// Gain table: spread over cavity lengths at the base pump wavelength and
// linearity of G in Omega at the base cavity length.
json gain_table(const json& base, const json& points, const std::vector<PointOutcome>& outcomes) {
    const json resolved = resolve_config(base);
    const double L0 = resolved["cavity"]["length_um"].get<double>();
    const double Lambda0 = resolved["modulation"]["wavelength_um"].get<double>();
    std::vector<double> lengths, g_length, omegas, g_omega;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok || !outcomes[i].summary.contains("G_db_per_ps")) continue;
        json cfg = base;
        cfg.merge_patch(points[i]);
        const json p = resolve_config(cfg);
        const double L = p["cavity"]["length_um"].get<double>();
        const double Lambda = p["modulation"]["wavelength_um"].get<double>();
        const double G = outcomes[i].summary["G_db_per_ps"].get<double>();
        if (Lambda == Lambda0) {
            lengths.push_back(L);
            g_length.push_back(G);
        }
        if (L == L0) {
            omegas.push_back(angular_frequency_from_wavelength(Lambda * 1e-6));
            g_omega.push_back(G);
        }
    }
    json t;
    t["lengths_um"] = lengths;
    t["gain_vs_length_db_per_ps"] = g_length;
    if (!g_length.empty()) {
        const auto [lo, hi] = std::minmax_element(g_length.begin(), g_length.end());
        double mean = 0;
        for (double g : g_length) mean += g / g_length.size();
        t["length_spread"] = (*hi - *lo) / mean;
    }
    t["omega_rad_per_s"] = omegas;
    t["gain_vs_omega_db_per_ps"] = g_omega;
    if (g_omega.size() >= 3) {
        const auto [slope, intercept, r2] = linear_fit(omegas, g_omega);
        t["omega_fit"] = {{"slope_db_per_ps_per_rad_per_s", slope}, {"intercept_db_per_ps", intercept}, {"r_squared", r2}};
    }
    return t;
}

}  // namespace

json run_sweep(const json& spec, const RunOptions& options) {
    if (!is_sweep(spec)) throw ValidationError("sweep", "expected {\"base\": ..., \"points\": [...]} or parameter/values");
    const json& base = spec["base"];
    if (!base.is_object()) throw ValidationError("sweep.base", "expected object");
    for (auto it = spec.begin(); it != spec.end(); ++it)
        if (it.key() != "base" && it.key() != "points" && it.key() != "parameter" && it.key() != "values" &&
            it.key() != "report" && it.key() != "preset")
            throw ValidationError("sweep." + it.key(), "unknown key");

    if (spec.contains("report") && spec["report"] != "gain_table")
        throw ValidationError("sweep.report", "unknown report (gain_table)");

    json points = json::array();
    if (spec.contains("points")) {
        if (!spec["points"].is_array()) throw ValidationError("sweep.points", "expected array");
        for (const auto& p : spec["points"]) {
            if (!p.is_object()) throw ValidationError("sweep.points", "each point must be an object");
            points.push_back(p);
        }
    }
    if (spec.contains("values")) {
        if (!spec.contains("parameter") || !spec["parameter"].is_string() || spec["parameter"].get<std::string>().empty())
            throw ValidationError("sweep.parameter", "required with values");
        if (!spec["values"].is_array()) throw ValidationError("sweep.values", "expected array");
        for (const auto& v : spec["values"]) points.push_back(nested(spec["parameter"].get<std::string>(), v));
    }
    if (options.seed) {
        // the flag wins over every point
        for (auto& p : points) p["seed"] = *options.seed;
    }

    fs::create_directories(options.out_dir);
    const size_t n = points.size();
    std::vector<PointOutcome> outcomes(n);
    std::vector<std::string> dirs(n);
    for (size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "point_%03zu", i);
        dirs[i] = buf;
    }

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < n; i = next++) {
            PointOutcome& o = outcomes[i];
            try {
                json cfg = base;
                cfg.merge_patch(points[i]);
                RunOptions opt;
                opt.out_dir = options.out_dir / dirs[i];
                opt.threads = 1;
                const json m = run_config(cfg, opt);
                o.summary = m["summary"];
                o.ok = true;
            } catch (const ValidationError& e) {
                o.error = e.what();
                o.error_kind = "validation";
            } catch (const RegimeError& e) {
                o.error = e.what();
                o.error_kind = "regime";
            } catch (const std::exception& e) {
                o.error = e.what();
                o.error_kind = "other";
            }
        }
    };
    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, static_cast<int>(std::max<size_t>(n, 1)));
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    // Columns: point index, every override leaf (first-seen order), ok, then
    // the union of summary keys (sorted).
    std::vector<std::string> param_cols;
    std::vector<std::vector<std::pair<std::string, json>>> leaves(n);
    for (size_t i = 0; i < n; ++i) {
        flatten(points[i], "", leaves[i]);
        for (const auto& [k, v] : leaves[i])
            if (std::find(param_cols.begin(), param_cols.end(), k) == param_cols.end()) param_cols.push_back(k);
    }
    std::set<std::string> summary_cols;
    for (const auto& o : outcomes)
        for (auto it = o.summary.begin(); it != o.summary.end(); ++it) summary_cols.insert(it.key());

    std::ofstream f(options.out_dir / "sweep.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (options.out_dir / "sweep.csv").string());
    f << "point";
    for (const auto& k : param_cols) f << ',' << k;
    f << ",ok";
    for (const auto& k : summary_cols) f << ',' << k;
    f << '\n';
    json rows = json::array();
    for (size_t i = 0; i < n; ++i) {
        f << i;
        for (const auto& k : param_cols) {
            auto it = std::find_if(leaves[i].begin(), leaves[i].end(), [&](const auto& kv) { return kv.first == k; });
            f << ',' << (it == leaves[i].end() ? "" : cell(it->second));
        }
        f << ',' << (outcomes[i].ok ? 1 : 0);
        for (const auto& k : summary_cols)
            f << ',' << (outcomes[i].summary.contains(k) ? cell(outcomes[i].summary[k]) : "");
        f << '\n';

        json row = {{"point", i}, {"override", points[i]}, {"dir", dirs[i]}, {"ok", outcomes[i].ok},
                    {"summary", outcomes[i].summary}};
        if (!outcomes[i].ok) {
            row["error"] = outcomes[i].error;
            row["error_kind"] = outcomes[i].error_kind;
        }
        rows.push_back(row);
    }
    f.close();

    json manifest = {{"schema_version", kSchemaVersion},
                     {"tool_version", kToolVersion},
                     {"sweep", spec},
                     {"points", rows},
                     {"files", {"sweep.csv"}}};
    if (spec.contains("report")) {
        manifest["report"] = gain_table(base, points, outcomes);
    }
    std::ofstream m(options.out_dir / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << '\n';
    return manifest;
}

}  // namespace dce::harness
