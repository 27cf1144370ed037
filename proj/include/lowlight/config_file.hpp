#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "lowlight/pipeline.hpp"

namespace lowlight {

/// Flat "key = value" pairs; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies one setting, e.g. "ice.lambda3" or "red.max_steps". Throws
/// InvalidInput on unknown keys or malformed values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);
void apply_settings(PipelineConfig& config, const KeyValues& values);

/// Every recognised key with its current value, in file syntax.
std::string dump_settings(const PipelineConfig& config);

}  // namespace lowlight
