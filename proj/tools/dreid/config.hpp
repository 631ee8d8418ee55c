#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dreid::cli {

using nlohmann::json;

/// Raised for malformed configs and flags; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every recognised key with its default value.
json default_config();

/// Merges a JSON file over the defaults. Unknown keys are rejected.
json load_config(const std::filesystem::path& path);

/// Applies `key=value` with a dotted key, e.g. "transfer.eta=0.2". The value
/// is read as JSON when it parses, otherwise kept as a string.
void apply_override(json& config, std::string_view assignment);

/// Checks enum values and ranges.
void validate_config(const json& config);

/// Resolves `path` against the directory of the file that referenced it.
std::filesystem::path resolve(const std::filesystem::path& base_file, const std::string& path);

}  // namespace dreid::cli
