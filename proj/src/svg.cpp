#include "rydsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Mapper {
    double xmin, xmax, ymin, ymax;
    double px(double x) const { return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); }
    double py(double y) const {
        return kHeight - kBottom - (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
    }
};

void polyline(std::ostream& out, const Mapper& m, const std::function<double(double)>& f,
              const char* color, const char* dash) {
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5'";
    if (dash[0] != '\0')
        out << " stroke-dasharray='" << dash << "'";
    out << " points='";
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
        const double x = m.xmin + (m.xmax - m.xmin) * i / n;
        const double y = f(x);
        if (std::isfinite(y))
            out << m.px(x) << "," << m.py(std::clamp(y, m.ymin, m.ymax)) << " ";
    }
    out << "'/>\n";
}

} // namespace

void write_svg_plot(const std::string& path, const SvgPlot& plot) {
    if (plot.x.empty() || plot.x.size() != plot.y.size())
        throw ValidationError("svg plot: x/y size mismatch or empty");

    Mapper m{};
    m.xmin = *std::min_element(plot.x.begin(), plot.x.end());
    m.xmax = *std::max_element(plot.x.begin(), plot.x.end());
    m.ymin = *std::min_element(plot.y.begin(), plot.y.end());
    m.ymax = *std::max_element(plot.y.begin(), plot.y.end());
    if (m.xmax == m.xmin) {
        m.xmin -= 1.0;
        m.xmax += 1.0;
    }
    const double ypad = (m.ymax == m.ymin) ? 1.0 : 0.08 * (m.ymax - m.ymin);
    m.ymin -= ypad;
    m.ymax += ypad;

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
        << "font-size='15'>" << plot.title << "</text>\n";

    // axes with a few ticks
    out << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << kWidth - kLeft - kRight
        << "' height='" << kHeight - kTop - kBottom << "' fill='none' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = m.xmin + (m.xmax - m.xmin) * i / 5;
        const double y = m.ymin + (m.ymax - m.ymin) * i / 5;
        out << "<line x1='" << m.px(x) << "' y1='" << kHeight - kBottom << "' x2='" << m.px(x) << "' y2='"
            << kHeight - kBottom + 5 << "' stroke='black'/>\n";
        out << "<text x='" << m.px(x) << "' y='" << kHeight - kBottom + 18
            << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << std::scientific << x
            << "</text>\n";
        out << "<line x1='" << kLeft - 5 << "' y1='" << m.py(y) << "' x2='" << kLeft << "' y2='" << m.py(y)
            << "' stroke='black'/>\n";
        out << "<text x='" << kLeft - 8 << "' y='" << m.py(y) + 4
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << std::defaultfloat << y
            << "</text>\n";
    }

    if (plot.envelope_upper)
        polyline(out, m, plot.envelope_upper, "#999999", "4,3");
    if (plot.envelope_lower)
        polyline(out, m, plot.envelope_lower, "#999999", "4,3");
    if (plot.fitted)
        polyline(out, m, plot.fitted, "#d62728", "");

    for (size_t i = 0; i < plot.x.size(); ++i) {
        const double cx = m.px(plot.x[i]);
        const double cy = m.py(plot.y[i]);
        if (!plot.yerr.empty() && plot.yerr[i] > 0.0) {
            out << "<line x1='" << cx << "' y1='" << m.py(plot.y[i] - plot.yerr[i]) << "' x2='" << cx
                << "' y2='" << m.py(plot.y[i] + plot.yerr[i]) << "' stroke='#1f77b4'/>\n";
        }
        out << "<circle cx='" << cx << "' cy='" << cy << "' r='2.5' fill='#1f77b4'/>\n";
    }
    out << "</svg>\n";

    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot write '" + path + "'");
    file << out.str();
}

} // namespace rydsim
