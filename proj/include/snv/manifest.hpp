#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace snv {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

/// Provenance record written beside every CLI output.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_digest;                                // sha256 of the canonical config JSON
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs; // path, sha256
  std::optional<std::uint64_t> seed;
  std::string tool_version;
  std::string timestamp; // UTC ISO 8601; SOURCE_DATE_EPOCH overrides the clock

  void add_input(const std::string& path);
  void add_output(const std::string& path);
};

/// Fills version and timestamp, digests the config.
RunManifest make_manifest(std::string command, std::vector<std::string> arguments, const nlohmann::json& config);

void to_json(nlohmann::json& j, const RunManifest& m);

} // namespace snv
