#include "contrakit/output.hpp"

#include "contrakit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace contrakit::output {

std::string g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

void write_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& opts) {
    const std::size_t width = opts.n + opts.m;
    for (const auto& state : traj.states) {
        if (state.size() != width) {
            throw InputError("csv writer: state width " + std::to_string(state.size()) +
                             " does not match n + m = " + std::to_string(width));
        }
    }
    if (opts.include_input && traj.inputs.size() != traj.times.size()) {
        throw InputError("csv writer: input column requested but inputs are missing");
    }

    os << "t";
    for (std::size_t i = 1; i <= opts.n; ++i) os << ",x" << i;
    for (std::size_t j = 1; j <= opts.m; ++j) os << ",z" << j;
    if (opts.include_input) os << ",u";
    if (opts.fast_bound) os << ",fast_bound";
    if (opts.slow_bound) os << ",slow_bound";
    os << "\n";

    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        os << g17(t);
        for (std::size_t i = 0; i < width; ++i) os << "," << g17(traj.states[k][i]);
        if (opts.include_input) os << "," << g17(traj.inputs[k]);
        if (opts.fast_bound) os << "," << g17(opts.fast_bound(t));
        if (opts.slow_bound) os << "," << g17(opts.slow_bound(t));
        os << "\n";
    }
    if (opts.truncated_at >= 0.0) {
        os << "# truncated: integration diverged after t = " << g17(opts.truncated_at) << "\n";
    }
}

void write_csv_file(const std::string& path, const Trajectory& traj, const CsvOptions& opts) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_csv(os, traj, opts);
    if (!os) throw InputError("write to '" + path + "' failed");
}

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr double kLeft = 60.0;
constexpr double kRight = 620.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 360.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

[[nodiscard]] std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
}

[[nodiscard]] std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
}

[[nodiscard]] std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

void write_svg(std::ostream& os, const std::string& title, const std::vector<double>& times,
               const std::vector<SvgSeries>& series) {
    if (times.empty()) throw InputError("svg writer: empty time axis");
    for (const auto& s : series) {
        if (s.values.size() != times.size()) {
            throw InputError("svg writer: series '" + s.label +
                             "' length does not match the time axis");
        }
    }

    double tmin = times.front();
    double tmax = times.back();
    if (!(tmax > tmin)) tmax = tmin + 1.0;

    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    if (!std::isfinite(vmin)) {
        vmin = 0.0;
        vmax = 1.0;
    }
    if (!(vmax > vmin)) {
        vmin -= 1.0;
        vmax += 1.0;
    }

    const auto sx = [&](double t) {
        return kLeft + (t - tmin) / (tmax - tmin) * (kRight - kLeft);
    };
    const auto sy = [&](double v) {
        return kBottom - (v - vmin) / (vmax - vmin) * (kBottom - kTop);
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    os << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    os << "  <text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"14\">"
       << escape_xml(title) << "</text>\n";

    // Axes with min/max tick labels.
    os << "  <line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kBottom) << "\" x2=\""
       << coord(kRight) << "\" y2=\"" << coord(kBottom) << "\" stroke=\"black\"/>\n";
    os << "  <line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kTop) << "\" x2=\""
       << coord(kLeft) << "\" y2=\"" << coord(kBottom) << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << coord(kLeft) << "\" y=\"" << coord(kBottom + 16.0)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << tick(tmin) << "</text>\n";
    os << "  <text x=\"" << coord(kRight) << "\" y=\"" << coord(kBottom + 16.0)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(tmax)
       << "</text>\n";
    os << "  <text x=\"" << coord(kLeft - 6.0) << "\" y=\"" << coord(kBottom)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(vmin)
       << "</text>\n";
    os << "  <text x=\"" << coord(kLeft - 6.0) << "\" y=\"" << coord(kTop + 4.0)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(vmax)
       << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % kPaletteSize];
        std::ostringstream points;
        bool open = false;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double v = series[si].values[k];
            if (!std::isfinite(v)) continue;
            if (open) points << " ";
            points << coord(sx(times[k])) << "," << coord(sy(v));
            open = true;
        }
        if (open) {
            os << "  <polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
        }
        os << "  <text x=\"" << coord(kRight - 4.0) << "\" y=\""
           << coord(kTop + 14.0 * static_cast<double>(si) + 12.0)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
           << color << "\">" << escape_xml(series[si].label) << "</text>\n";
    }
    os << "</svg>\n";
}

void write_svg_file(const std::string& path, const std::string& title,
                    const std::vector<double>& times, const std::vector<SvgSeries>& series) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_svg(os, title, times, series);
    if (!os) throw InputError("write to '" + path + "' failed");
}

} // namespace contrakit::output
