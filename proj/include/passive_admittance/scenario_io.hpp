#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "passive_admittance/sim_harness.hpp"

namespace passive_admittance {

/// Parses a YAML scenario document. Omitted fields take the defaults of
/// Scenario::defaults; unknown keys are rejected. Throws ParseError for
/// malformed documents and ValidationError for invalid values.
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario(const std::filesystem::path& path);

/// Emits every field, with doubles in shortest round-trip form.
std::string write_scenario_yaml(const Scenario& sc);

struct BundledScenario {
  std::string name;
  std::string text;
};

const std::vector<BundledScenario>& bundled_scenarios();

/// A bundled scenario name, a scenario file, or an unambiguous bundled
/// prefix such as "fig2".
Scenario resolve_scenario(const std::string& name_or_path);

/// Column names of the trace CSV for n DOFs.
std::vector<std::string> trace_columns(std::size_t n);

/// Header then one row per record; numbers in plain decimal notation with
/// nine significant digits; flags as 0/1.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

/// Reads a CSV written by write_trace_csv. The DOF count is taken from the
/// header and dt from the first two rows.
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

/// Nine significant digits, never exponent notation.
std::string format_decimal(double value);

}  // namespace passive_admittance
