#pragma once

// Config ingestion, presets, run pipelines and sweeps.
//
// A run is described by one JSON object with unit-suffixed keys. Every
// pipeline has a complete default block; a user config is merged over the
// defaults of its preset (or pipeline) and must not introduce keys the
// defaults do not have. The merged block is what the manifest records, so a
// manifest can be fed back to `run --config` and reproduces the data files
// byte for byte.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dce::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

struct RunOptions {
    std::filesystem::path out_dir{"."};
    std::optional<std::uint64_t> seed;  // overrides config "seed"
    int threads{0};                     // 0 = hardware concurrency
};

std::vector<std::string> preset_names();

/// Full config of a named preset; throws ValidationError for unknown names.
/// Sweep presets return a sweep spec (see run_sweep).
json preset_config(const std::string& name);
bool is_sweep(const json& config);

/// Defaults of the named pipeline ("flux", "response", "fdtd").
json pipeline_defaults(const std::string& pipeline);

/// Merges `user` over the defaults selected by its "preset" or "pipeline"
/// key and validates keys and value types. Accepts a run manifest too (its
/// "config" block is used).
json resolve_config(const json& user);

struct RunResult {
    json derived;   // quantities computed from the config before running
    json results;   // analysis outputs
    json summary;   // flat name -> number map used for sweep tables
    std::vector<std::string> files;
};

/// Executes an already resolved config, writing data files into `out_dir`.
RunResult run_pipeline(const json& resolved, const std::filesystem::path& out_dir, int threads);

/// resolve_config + run_pipeline + manifest.json. Returns the manifest.
json run_config(const json& user, const RunOptions& options);

/// Sweep spec: {"base": config, "points": [override, ...]} or the shorthand
/// {"base": config, "parameter": "a.b", "values": [...]}. Points run
/// independently (in parallel up to options.threads), each in its own
/// subdirectory; failures are recorded per point. Writes sweep.csv and
/// manifest.json; returns the manifest.
json run_sweep(const json& spec, const RunOptions& options);

/// Runs a preset by name (plain run or sweep).
json run_preset(const std::string& name, const RunOptions& options);

/// Loads a JSON file; parse errors become ValidationError.
json load_json(const std::filesystem::path& path);

// CSV helpers shared by the pipelines.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
std::string format_number(double v);

}  // namespace dce::harness
