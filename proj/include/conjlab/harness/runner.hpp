#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace conjlab::harness {

inline constexpr const char* kSeedEnvVar = "CONJLAB_SEED";
inline constexpr std::uint64_t kDefaultSeed = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRefused = 2, kExitInternal = 3 };

const std::vector<std::string>& commands();

struct RunRequest {
    std::string command;
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "results";
    unsigned jobs = 0;
    std::string format = "both";  ///< json, csv or both
};

/// Runs one command end to end and returns the process exit code. Result
/// files depend only on (config, seed); the worker count and wall time are
/// recorded in manifest.json alone.
int run(const RunRequest& request, std::ostream& log);

/// Writes the plot-data files derivable from the result files in `dir` and
/// returns their names. Throws ConfigError when `dir` holds no results.
std::vector<std::string> emit_plot_data(const std::filesystem::path& dir);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

} // namespace conjlab::harness
