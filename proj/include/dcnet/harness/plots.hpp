#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "dcnet/harness/experiment.hpp"
#include "dcnet/harness/scaling.hpp"

namespace dcnet::harness {

namespace svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool markers = false;  // scatter instead of polyline
    bool dashed = false;
};

struct Axes {
    std::string title, xlabel, ylabel;
    bool log_x = false, log_y = false;
};

inline constexpr double width = 760, height = 440;
inline constexpr double left = 80, right = 150, top = 40, bottom = 60;

inline std::string fmt(double v, const char* spec = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

/// Evenly spread hues, fixed saturation.
inline std::string color(std::size_t i, std::size_t count) {
    const double h = 360.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(count, 1));
    return "hsl(" + fmt(h, "%.0f") + ",70%,42%)";
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= d;
            hi += d;
        }
    }
};

inline std::vector<double> linear_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= f * mag) {
            step = f * mag;
            break;
        }
    }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
}

/// A static chart; all coordinates are printed with fixed precision so the
/// same input produces the same bytes.
inline std::string chart(const Axes& axes, const std::vector<Series>& series) {
    auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!axes.log_x || x > 0) && (!axes.log_y || y > 0);
    };
    Range rx, ry;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!usable(s.x[k], s.y[k])) continue;
            rx.add(tx(s.x[k]));
            ry.add(ty(s.y[k]));
        }
    }
    if (!(rx.lo <= rx.hi)) throw ValidationError("chart '" + axes.title + "' has no plottable points");
    rx.pad();
    ry.pad();
    if (axes.log_x) {
        rx.lo = std::floor(rx.lo);
        rx.hi = std::ceil(rx.hi);
    }
    if (axes.log_y) {
        ry.lo = std::floor(ry.lo);
        ry.hi = std::ceil(ry.hi);
    }
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double v) { return top + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, "%.0f") + "\" height=\"" +
           fmt(height, "%.0f") + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           escape(axes.title) + "</text>\n";

    auto tick_list = [](double lo, double hi, bool log) {
        if (!log) return linear_ticks(lo, hi);
        std::vector<double> t;
        const int step = std::max(1, static_cast<int>((hi - lo) / 8.0 + 0.999));
        for (double v = lo; v <= hi + 1e-9; v += step) t.push_back(v);
        return t;
    };
    auto label = [](double v, bool log) {
        return log ? "1e" + fmt(v, "%.0f") : fmt(v, "%g");
    };
    for (double v : tick_list(rx.lo, rx.hi, axes.log_x)) {
        const std::string x = fmt(px(v));
        out += "<line x1=\"" + x + "\" y1=\"" + fmt(top) + "\" x2=\"" + x + "\" y2=\"" + fmt(top + ph) +
               "\" stroke=\"#e4e4e4\"/>\n";
        out += "<text x=\"" + x + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" +
               label(v, axes.log_x) + "</text>\n";
    }
    for (double v : tick_list(ry.lo, ry.hi, axes.log_y)) {
        const std::string y = fmt(py(v));
        out += "<line x1=\"" + fmt(left) + "\" y1=\"" + y + "\" x2=\"" + fmt(left + pw) + "\" y2=\"" + y +
               "\" stroke=\"#e4e4e4\"/>\n";
        out += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(py(v) + 4) + "\" text-anchor=\"end\">" +
               label(v, axes.log_y) + "</text>\n";
    }
    out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 16) + "\" text-anchor=\"middle\">" +
           escape(axes.xlabel) + "</text>\n";
    out += "<text transform=\"translate(18," + fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           escape(axes.ylabel) + "</text>\n";

    const std::size_t legend_max = 16;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const std::string col = color(i, series.size());
        if (s.markers) {
            for (std::size_t k = 0; k < s.x.size(); ++k) {
                if (!usable(s.x[k], s.y[k])) continue;
                out += "<circle cx=\"" + fmt(px(tx(s.x[k]))) + "\" cy=\"" + fmt(py(ty(s.y[k]))) +
                       "\" r=\"3\" fill=\"" + col + "\"/>\n";
            }
        } else {
            std::string pts;
            for (std::size_t k = 0; k < s.x.size(); ++k) {
                if (!usable(s.x[k], s.y[k])) continue;
                if (!pts.empty()) pts += ' ';
                pts += fmt(px(tx(s.x[k]))) + ',' + fmt(py(ty(s.y[k])));
            }
            out += "<polyline fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1.2\"" +
                   (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"" + pts + "\"/>\n";
        }
        if (i < legend_max && !s.label.empty()) {
            const double y = top + 8 + 16 * static_cast<double>(i);
            out += "<rect x=\"" + fmt(left + pw + 12) + "\" y=\"" + fmt(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
                   col + "\"/>\n";
            out += "<text x=\"" + fmt(left + pw + 28) + "\" y=\"" + fmt(y + 1) + "\">" + escape(s.label) + "</text>\n";
        }
    }
    if (series.size() > legend_max) {
        out += "<text x=\"" + fmt(left + pw + 12) + "\" y=\"" + fmt(top + 16 * legend_max + 10) + "\">+" +
               std::to_string(series.size() - legend_max) + " more</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace svg

/// Largest number of traces drawn per panel; bigger networks show an evenly
/// spaced subset.
inline constexpr std::size_t max_traces = 60;
/// Points per trace after thinning.
inline constexpr std::size_t max_points = 1500;

namespace detail {

inline std::vector<std::size_t> spread(std::size_t count, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (count <= cap) {
        for (std::size_t i = 0; i < count; ++i) idx.push_back(i);
        return idx;
    }
    for (std::size_t k = 0; k < cap; ++k) idx.push_back(k * (count - 1) / (cap - 1));
    return idx;
}

inline void write_all(const std::filesystem::path& dir,
                      const std::vector<std::pair<std::string, std::string>>& files,
                      std::vector<std::filesystem::path>& written) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, text] : files) {
        write_text_file(dir / name, text);
        written.push_back(dir / name);
    }
}

}  // namespace detail

/// voltage.svg, current.svg, line_current.svg (|f|) and step_size.svg.
/// Every chart is rendered before anything is written, so a bad report
/// leaves the directory untouched.
inline std::vector<std::filesystem::path> emit_plots(const ExperimentReport& report,
                                                     const std::filesystem::path& dir) {
    const auto& run = report.run;
    if (run.times.size() < 2) throw ValidationError("report holds no trajectory to plot");
    const StateLayout lay{report.n, report.m};
    for (const auto& x : run.states) {
        if (x.size() != lay.dimension()) throw ValidationError("report states do not match its network size");
    }
    const auto rows = detail::spread(run.times.size(), max_points);

    auto block = [&](std::size_t offset, std::size_t count, const char* prefix, bool absolute) {
        std::vector<svg::Series> out;
        for (std::size_t i : detail::spread(count, max_traces)) {
            svg::Series s;
            s.label = prefix + std::to_string(i + 1);
            for (std::size_t r : rows) {
                s.x.push_back(run.times[r]);
                const double v = run.states[r][offset + i];
                s.y.push_back(absolute ? std::abs(v) : v);
            }
            out.push_back(std::move(s));
        }
        return out;
    };
    auto subset = [](std::size_t count) {
        return count > max_traces ? " (" + std::to_string(max_traces) + " of " + std::to_string(count) + ")"
                                  : std::string();
    };

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("voltage.svg",
                       svg::chart({report.network + ": node voltage" + subset(lay.n), "t [s]", "V [V]"},
                                  block(lay.voltage(), lay.n, "node ", false)));
    files.emplace_back("current.svg",
                       svg::chart({report.network + ": generated current" + subset(lay.n), "t [s]", "I [A]"},
                                  block(lay.current(), lay.n, "node ", false)));
    if (lay.m > 0) {
        files.emplace_back("line_current.svg",
                           svg::chart({report.network + ": |line current|" + subset(lay.m), "t [s]", "|f| [A]"},
                                      block(lay.line(), lay.m, "line ", true)));
    }
    svg::Series h;
    h.label = "accepted h";
    for (const auto& s : run.trace) {
        if (!s.accepted) continue;
        h.x.push_back(s.t);
        h.y.push_back(s.h);
    }
    if (!h.x.empty()) {
        const auto keep = detail::spread(h.x.size(), 4 * max_points);
        svg::Series thin;
        thin.label = h.label;
        for (std::size_t k : keep) {
            thin.x.push_back(h.x[k]);
            thin.y.push_back(h.y[k]);
        }
        files.emplace_back(
            "step_size.svg",
            svg::chart({report.network + ": step size (" + std::string(ode::to_string(run.method)) + ")", "t [s]",
                        "h [s]", false, true},
                       {thin}));
    }
    std::vector<std::filesystem::path> written;
    detail::write_all(dir, files, written);
    return written;
}

/// scaling.svg: median wall time against dimension per method, log-log,
/// with each least-squares fit dashed.
inline std::vector<std::filesystem::path> emit_scaling_plot(std::span<const ScalingRow> rows,
                                                            const std::filesystem::path& dir) {
    if (rows.empty()) throw ValidationError("scaling table is empty");
    std::vector<svg::Series> series;
    const auto slopes = scaling_slopes(rows);
    for (ode::Method m : ode::all_methods) {
        svg::Series pts;
        for (const auto& r : rows) {
            if (r.method != m) continue;
            pts.x.push_back(static_cast<double>(r.dimension));
            pts.y.push_back(r.wall_ms_median);
        }
        if (pts.x.empty()) continue;
        pts.label = std::string(ode::to_string(m));
        pts.markers = true;
        series.push_back(pts);
        if (auto it = slopes.find(m); it != slopes.end()) {
            // fit through the log-means
            double mx = 0, my = 0;
            for (std::size_t k = 0; k < pts.x.size(); ++k) {
                mx += std::log(pts.x[k]);
                my += std::log(pts.y[k]);
            }
            mx /= static_cast<double>(pts.x.size());
            my /= static_cast<double>(pts.x.size());
            const auto [lo, hi] = std::minmax_element(pts.x.begin(), pts.x.end());
            svg::Series fit;
            fit.label = pts.label + " fit " + svg::fmt(it->second, "%.2f");
            fit.dashed = true;
            for (double x : {*lo, *hi}) {
                fit.x.push_back(x);
                fit.y.push_back(std::exp(my + it->second * (std::log(x) - mx)));
            }
            series.push_back(fit);
        }
    }
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("scaling.svg", svg::chart({"wall time vs state dimension", "dimension 4n+m",
                                                  "median wall time [ms]", true, true},
                                                 series));
    std::vector<std::filesystem::path> written;
    detail::write_all(dir, files, written);
    return written;
}

}  // namespace dcnet::harness
