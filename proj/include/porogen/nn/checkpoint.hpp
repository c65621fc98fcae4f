#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

namespace porogen::nn {

/// Single-file checkpoint: magic line, versioned JSON header, then an opaque
/// parameter blob (length-prefixed).
void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                      const std::string& blob);

/// Returns the header; fills blob with the parameter bytes.
nlohmann::json read_checkpoint(const std::filesystem::path& path, std::string& blob);

}  // namespace porogen::nn
