#pragma once

// =============================================================================
// contrakit - Trajectory Output (CSV and SVG)
// =============================================================================
// Serializers for simulation results. CSV rows print every value with %.17g
// so files round-trip doubles exactly and identical runs produce identical
// bytes. The SVG writer renders time series as polylines with axes and a
// legend; it has no external dependencies.
// =============================================================================

#include "contrakit/model.hpp"

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace contrakit::output {

/// One double rendered with %.17g (shortest exact round-trip form used
/// throughout the CSV and CLI output).
[[nodiscard]] std::string g17(double value);

/// Column layout and optional envelope columns for trajectory CSV.
struct CsvOptions {
    std::size_t n = 0; ///< slow dimension: columns x1..xn
    std::size_t m = 0; ///< fast dimension: columns z1..zm
    bool include_input = true;
    std::function<double(double t)> fast_bound; ///< adds column fast_bound
    std::function<double(double t)> slow_bound; ///< adds column slow_bound
    /// When >= 0, appends a comment row marking where integration stopped.
    double truncated_at = -1.0;
};

/// Writes "t,x1..xn,z1..zm,u[,fast_bound][,slow_bound]" and one row per
/// sample. Throws InputError when the trajectory's state width is not n + m.
void write_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& opts);

/// write_csv into a file; throws InputError when the file cannot be opened.
void write_csv_file(const std::string& path, const Trajectory& traj, const CsvOptions& opts);

/// A labeled time series for plotting.
struct SvgSeries {
    std::string label;
    std::vector<double> values;
};

/// Renders the series over a shared time axis as a 640x400 line chart with
/// axes, min/max tick labels, and a legend. Non-finite samples are skipped.
void write_svg(std::ostream& os, const std::string& title, const std::vector<double>& times,
               const std::vector<SvgSeries>& series);

/// write_svg into a file; throws InputError when the file cannot be opened.
void write_svg_file(const std::string& path, const std::string& title,
                    const std::vector<double>& times, const std::vector<SvgSeries>& series);

} // namespace contrakit::output
