#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "phasetrack/analysis.hpp"
#include "phasetrack/filter_spec.hpp"
#include "phasetrack/mc_harness.hpp"

namespace phasetrack::io {

using json = nlohmann::json;

/// Malformed or schema-violating input documents.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] spec::FilterSpec filter_spec_from_json(const json& j);
[[nodiscard]] json to_json(const spec::FilterSpec& spec);

struct DesignedFilter {
    spec::FilterSpec spec;
    analysis::AnyFilter filter;
};

/// Designed filter with coefficients, noise gains for K̃0 = 0..3 and diagnostics.
[[nodiscard]] json designed_to_json(const DesignedFilter& designed);
[[nodiscard]] DesignedFilter designed_from_json(const json& j);

[[nodiscard]] json report_summary(const analysis::ResponseReport& report);

/// Reads a JSON file; SchemaError on parse failure, std::runtime_error when unreadable.
[[nodiscard]] json read_json(const std::filesystem::path& path);

/// A filter document is either a FilterSpecFile or a designed-filter file.
[[nodiscard]] DesignedFilter load_filter(const std::filesystem::path& path);

/// ScenarioFile; filter references are resolved relative to the file's directory.
[[nodiscard]] mc::Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir);
[[nodiscard]] mc::Scenario load_scenario(const std::filesystem::path& path);

[[nodiscard]] std::string noise_mode_name(signal::NoiseMode mode);

} // namespace phasetrack::io
