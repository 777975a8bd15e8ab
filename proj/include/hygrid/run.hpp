#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace hygrid {

enum class Command { Pf, Sc, Validate };
enum class OutputFormat { Csv, Json };

struct RunConfig {
    Command command = Command::Pf;
    std::filesystem::path grid_path;
    std::filesystem::path output_path;  // empty: stdout only
    OutputFormat format = OutputFormat::Csv;
    double tolerance = 1e-8;
    int max_iterations = 50;
    double delta_p = 0.005;  // perturbation sizes for `validate`
    double delta_v = 0.005;
    bool central = false;
    bool parallel = false;
};

// Exit codes, stable for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFileError = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitSingular = 3;
inline constexpr int kExitBadConfig = 4;

/// Executes one command; writes outputs atomically (write-then-rename, no partial
/// files on failure) and prints a one-line machine-parsable error category on stderr
/// when returning nonzero.
int run(const RunConfig& config);

}  // namespace hygrid
