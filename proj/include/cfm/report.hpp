#pragma once

// Text and tab-separated renderings of run reports, written atomically.

#include <cfm/pipeline.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cfm {

/// Numbers with 12 significant digits.
[[nodiscard]] std::string fmt12(double v);

[[nodiscard]] std::string report_text(const RunReport& r);
/// One `key<TAB>value` line per field; list fields repeat the key with an index.
[[nodiscard]] std::string report_tsv(const RunReport& r);
[[nodiscard]] std::string sweep_tsv(const std::vector<SweepRow>& rows);

/// Saddles, cut arcs and the jump contours as tagged polyline records:
/// `saddle i x y value multiplicity`, then `polyline <kind> <id> <n>` followed
/// by n lines `x y`.
[[nodiscard]] std::string feature_records(const RunResult& run);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// report.txt and report.tsv in `dir` (created if missing).
void write_reports(const RunReport& r, const std::filesystem::path& dir);

}  // namespace cfm
