#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lagdyn::io {

inline constexpr const char* kVersion = "lagdyn 0.1.0";

/// Ordered key=value records; the manifest is written before any training
/// output so a run directory is always attributable.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

void write_key_values(const std::string& path, const KeyValues& kv);

std::string timestamp_utc();

/// Default output root: $LAGDYN_OUT when set, otherwise "runs".
std::string output_root();

void ensure_directory(const std::string& path);

} // namespace lagdyn::io
