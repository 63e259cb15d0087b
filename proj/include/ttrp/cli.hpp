#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ttrp/tensor_shape.hpp"

namespace ttrp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

inline constexpr const char* kToolVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// Locale-independent shortest form that round-trips to the same double.
[[nodiscard]] std::string format_number(double v);

/// Command-line values that take precedence over the config document.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<Index> reps;
    std::optional<unsigned> threads;
};

/// Materializes every default so the result alone reproduces the run.
/// Throws ConfigError on unknown commands or malformed fields.
[[nodiscard]] Json resolve_config(const std::string& command, const Json& raw, const Overrides& overrides);

enum class SummaryFormat { Csv, Json };

/// Runs a resolved config and writes its outputs plus manifest.json into out_dir.
/// Returns the files written, manifest last.
std::vector<std::filesystem::path> execute(const std::string& command, const Json& resolved,
                                           const std::filesystem::path& out_dir, SummaryFormat format,
                                           std::ostream& log);

/// Entry point; returns a process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Evaluates a mode entry: an integer, "M", or "M/k" / "M*k" for the given M.
[[nodiscard]] Index eval_mode(const Json& entry, Index M);

} // namespace ttrp::cli
