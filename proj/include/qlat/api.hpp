#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace qlat::api {

using json = nlohmann::ordered_json;

/// Runs one job document and returns the report document. Throws qlat::Error
/// with code "MalformedInput"/"MalformedTower"/... (exit 2 territory) or
/// "Unsupported" (exit 3).
json run_job(const json& job, bool check_fast_path = false);

/// Renders a report as human-readable text.
std::string render_text(const json& report);

}  // namespace qlat::api
