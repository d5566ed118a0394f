#pragma once

// JSON helpers shared by the library sources; not part of the public API.

#include <filesystem>
#include <json.hpp>
#include <string>

#include "clustab/metrics.hpp"

namespace clustab::detail {

using Json = nlohmann::ordered_json;

Json ami_json(const metrics::AmiReport& r);
Json stability_json(const metrics::StabilityBreakdown& s);
metrics::AmiReport ami_from_json(const Json& j);
metrics::StabilityBreakdown stability_from_json(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

}  // namespace clustab::detail
