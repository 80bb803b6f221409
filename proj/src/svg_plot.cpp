#include "moire/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace moire {

namespace {

constexpr std::array<const char*, 8> kColours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
    std::string out;
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

std::string fmt_tick(double v) {
    if (std::abs(v) < 1e-12) {
        return "0";
    }
    return fmt::format("{:g}", v);
}

std::string marker_svg(Marker m, double x, double y, const char* colour) {
    const double r = 3.0;
    switch (m) {
        case Marker::Circle:
            return fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{}" fill="{}"/>)", x, y, r, colour);
        case Marker::Square:
            return fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{}" height="{}" fill="{}"/>)", x - r, y - r,
                               2 * r, 2 * r, colour);
        case Marker::Triangle:
            return fmt::format(R"(<polygon points="{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}" fill="{}"/>)", x,
                               y - r - 1, x - r - 0.5, y + r, x + r + 0.5, y + r, colour);
        case Marker::Diamond:
            return fmt::format(
                R"(<polygon points="{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}" fill="{}"/>)", x,
                y - r - 1, x + r + 1, y, x, y + r + 1, x - r - 1, y, colour);
        case Marker::Cross:
            return fmt::format(
                R"(<path d="M{:.2f},{:.2f}L{:.2f},{:.2f}M{:.2f},{:.2f}L{:.2f},{:.2f}" stroke="{}" stroke-width="1.5"/>)",
                x - r, y - r, x + r, y + r, x - r, y + r, x + r, y - r, colour);
        case Marker::Plus:
            return fmt::format(
                R"(<path d="M{:.2f},{:.2f}L{:.2f},{:.2f}M{:.2f},{:.2f}L{:.2f},{:.2f}" stroke="{}" stroke-width="1.5"/>)",
                x - r, y, x + r, y, x, y - r, x, y + r, colour);
    }
    return {};
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void finish() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12) {
            const double pad = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

Marker marker_for(std::size_t i) {
    return static_cast<Marker>(i % 6);
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    std::vector<double> out;
    if (!(hi > lo) || target < 1) {
        return out;
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 2.5, 3.0, 5.0, 10.0}) {
        if (f * mag >= raw) {
            step = f * mag;
            break;
        }
    }
    const double first = std::ceil(lo / step - 1e-9) * step;
    for (double v = first; v <= hi + step * 1e-9; v += step) {
        out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    }
    return out;
}

std::string render_svg(const Figure& fig) {
    const double left = 70, right = 150, top_title = fig.title.empty() ? 10 : 34;
    const double pad_top = 26, pad_bottom = 44;
    const double w = fig.width;
    const double ph = fig.panel_height;
    const double total_h = top_title + ph * static_cast<double>(fig.panels.size()) + 10;

    std::string svg = fmt::format(
        R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{:.0f}" viewBox="0 0 {} {:.0f}" font-family="sans-serif" font-size="11">)"
        "\n",
        fig.width, total_h, fig.width, total_h);
    svg += fmt::format(R"(<rect width="100%" height="100%" fill="white"/>)" "\n");
    if (!fig.title.empty()) {
        svg += fmt::format(R"(<text x="{:.1f}" y="20" text-anchor="middle" font-size="14">{}</text>)" "\n", w / 2,
                           escape(fig.title));
    }

    for (std::size_t pi = 0; pi < fig.panels.size(); ++pi) {
        const Panel& p = fig.panels[pi];
        const double y0 = top_title + ph * static_cast<double>(pi);
        const double px0 = left, px1 = w - right;
        const double py0 = y0 + pad_top, py1 = y0 + ph - pad_bottom;

        Range xr, yr;
        for (const auto& s : p.series) {
            for (double v : s.x) xr.add(v);
            for (double v : s.y) yr.add(v);
        }
        xr.finish();
        if (p.y_lo < p.y_hi) {
            yr.lo = p.y_lo;
            yr.hi = p.y_hi;
        } else {
            yr.finish();
        }
        auto sx = [&](double x) { return px0 + (x - xr.lo) / (xr.hi - xr.lo) * (px1 - px0); };
        auto sy = [&](double y) { return py1 - (y - yr.lo) / (yr.hi - yr.lo) * (py1 - py0); };

        svg += fmt::format(R"(<g class="panel" id="panel{}">)" "\n", pi);
        svg += fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#444"/>)"
                           "\n",
                           px0, py0, px1 - px0, py1 - py0);
        if (!p.title.empty()) {
            svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle" font-size="12">{}</text>)" "\n",
                               (px0 + px1) / 2, py0 - 8, escape(p.title));
        }
        for (double t : nice_ticks(xr.lo, xr.hi)) {
            const double x = sx(t);
            svg += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{0:.1f}" y2="{2:.1f}" stroke="#ddd"/>)"
                               R"(<text x="{0:.1f}" y="{3:.1f}" text-anchor="middle">{4}</text>)" "\n",
                               x, py0, py1, py1 + 14, fmt_tick(t));
        }
        for (double t : nice_ticks(yr.lo, yr.hi)) {
            const double y = sy(t);
            svg += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{2:.1f}" y2="{1:.1f}" stroke="#ddd"/>)"
                               R"(<text x="{3:.1f}" y="{4:.1f}" text-anchor="end">{5}</text>)" "\n",
                               px0, y, px1, px0 - 5, y + 4, fmt_tick(t));
        }
        svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)" "\n", (px0 + px1) / 2,
                           py1 + 32, escape(p.x_label));
        svg += fmt::format(
            R"svg(<text x="{0:.1f}" y="{1:.1f}" text-anchor="middle" transform="rotate(-90 {0:.1f} {1:.1f})">{2}</text>)svg"
            "\n",
            px0 - 48, (py0 + py1) / 2, escape(p.y_label));

        for (std::size_t si = 0; si < p.series.size(); ++si) {
            const Series& s = p.series[si];
            const char* colour = kColours[si % kColours.size()];
            const Marker mk = marker_for(si);
            svg += fmt::format(R"(<g class="series" data-label="{}">)", escape(s.label));
            const std::size_t n = std::min(s.x.size(), s.y.size());
            if (s.lines && n > 1) {
                std::string d;
                for (std::size_t i = 0; i < n; ++i) {
                    d += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "M" : "L", sx(s.x[i]), sy(s.y[i]));
                }
                svg += fmt::format(R"(<path d="{}" fill="none" stroke="{}" stroke-width="1"/>)", d, colour);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                    svg += marker_svg(mk, sx(s.x[i]), sy(s.y[i]), colour);
                }
            }
            svg += "</g>\n";
            // legend entry
            const double ly = py0 + 10 + 16 * static_cast<double>(si);
            svg += marker_svg(mk, px1 + 14, ly, colour);
            svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}">{}</text>)" "\n", px1 + 24, ly + 4, escape(s.label));
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace moire
