#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collage/simulator.hpp"

namespace collage {

inline constexpr std::string_view kReportHeader =
    "scheme,N,mean,p50,p95,p99,p999,max,accuracy,frac_single,frac_collage,frac_reissue,overhead";

/// Header line plus one row per report. Reals are printed with six decimals.
std::string format_report_csv(std::span<const SchemeReport> reports);

/// Fixed-width percentile table for terminals.
std::string format_report_table(std::span<const SchemeReport> reports);

/// Parses a report CSV. Throws ParseError (byte offset) on a header or row
/// that does not match the schema.
std::vector<SchemeReport> parse_report_csv(std::string_view text);

/// Merges rows that share a scheme id: N is summed, every other column is the
/// arithmetic mean. Output is ordered NO_REDUNDANCY, REPLICATION_*, COLLAGE_*,
/// then anything else; first appearance breaks ties within a family.
std::vector<SchemeReport> aggregate_reports(std::span<const SchemeReport> rows);

/// Static SVG bar chart: one group of p50/p95/p99/p999 bars per scheme.
std::string render_report_svg(std::span<const SchemeReport> reports);

}  // namespace collage
