#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rydsim {

/// Minimal scatter + curve renderer for `--plot`; CSV remains the source of
/// truth, this is a convenience view only.
struct SvgPlot {
    std::string title;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;                         // optional error bars
    std::function<double(double)> fitted;             // optional fitted curve
    std::function<double(double)> envelope_upper;     // optional envelope
    std::function<double(double)> envelope_lower;
};

void write_svg_plot(const std::string& path, const SvgPlot& plot);

} // namespace rydsim
