#pragma once

#include <string>
#include <vector>

namespace moire {

// Minimal static SVG line/scatter plotter. Panels are stacked vertically and
// share the figure width.

enum class Marker { Circle, Square, Triangle, Diamond, Cross, Plus };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool lines = false;  // connect consecutive points
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    // fixed y range, used when lo < hi
    double y_lo = 0.0;
    double y_hi = 0.0;
};

struct Figure {
    std::string title;
    std::vector<Panel> panels;
    int width = 720;
    int panel_height = 240;
};

Marker marker_for(std::size_t series_index);

// "Nice" tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

std::string render_svg(const Figure& fig);

}  // namespace moire
