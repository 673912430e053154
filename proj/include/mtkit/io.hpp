#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "mtkit/core.hpp"
#include "mtkit/simulation.hpp"

namespace mtkit::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);  // "NA" when empty

/// CSV with a header naming at least `id` and `p`; optional `truth`
/// (1 = null true), `sign` (-1/0/1) and `z`. Lines starting with '#' and
/// blank lines are skipped, unknown columns ignored. Throws InputError.
PVector read_pvector(std::istream& in);
PVector read_pvector(const std::filesystem::path& path);

/// Flat `key = value` file; '#' starts a comment. Throws InputError for
/// unknown keys, duplicates or unparsable values.
sim::SimConfig read_sim_config(std::istream& in);
sim::SimConfig read_sim_config(const std::filesystem::path& path);

/// Config echo in the same `key = value` grammar.
std::string write_sim_config(const sim::SimConfig& config);

std::string manifest_json(const sim::RunManifest& manifest);
std::string metrics_csv(const sim::RunManifest& manifest);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mtkit::io
