#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "senticast/date.hpp"

namespace senticast::report {

/// Writes `manifest.json` into `dir`: command, raw arguments, seed, input
/// and output paths, library version and a creation timestamp. The
/// arguments alone suffice to re-run the command; the timestamp lives only
/// here so report CSVs stay byte-stable.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::string>& args, uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

/// Self-contained SVG line chart of actual vs predicted values, no external
/// assets, deterministic for identical inputs.
std::string svg_line_chart(const std::string& title, std::span<const Date> dates,
                           std::span<const double> actual, std::span<const double> predicted);

}  // namespace senticast::report
