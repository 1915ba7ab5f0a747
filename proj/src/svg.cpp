#include "sorn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sorn::plot {

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<LineSeries>& series, int width, int height) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write chart: " + path);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (n == 0 || !std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
        n = 1;
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;

    const double ml = 60, mr = 16, mt = 28, mb = 28;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto xpos = [&](std::size_t i) {
        return ml + pw * (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5);
    };
    auto ypos = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << ml << "\" y=\"16\" font-size=\"13\">" << title << "</text>\n";

    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        const double y = ypos(v);
        f << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << (width - mr) << "\" y2=\"" << y
          << "\" stroke=\"#dddddd\"/>\n";
        std::ostringstream lab;
        lab.precision(4);
        lab << v;
        f << "<text x=\"4\" y=\"" << (y + 4) << "\">" << lab.str() << "</text>\n";
    }

    double legend_x = ml;
    for (const auto& s : series) {
        if (s.values.empty()) continue;
        f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < s.values.size(); ++i)
            f << xpos(i) << ',' << ypos(s.values[i]) << ' ';
        f << "\"/>\n";
        f << "<text x=\"" << legend_x << "\" y=\"" << (height - 8) << "\" fill=\"" << s.color << "\">"
          << s.name << "</text>\n";
        legend_x += 10.0 * (s.name.size() + 3);
    }
    f << "</svg>\n";
}

}  // namespace sorn::plot
