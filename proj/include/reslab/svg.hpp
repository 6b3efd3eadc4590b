#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "reslab/error.hpp"
#include "reslab/tls.hpp"
#include "reslab/types.hpp"

namespace reslab {

// Log-log plot of a power sweep with the fitted loss curve overlaid.
// Self-contained SVG, no external styling.
inline std::string sweep_plot_svg(const PowerSweep& sweep, const TLSFitResult& fit) {
    sweep.validate();
    constexpr double width = 560.0, height = 400.0;
    constexpr double ml = 70.0, mr = 20.0, mt = 20.0, mb = 50.0;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    double n_lo = sweep.points.front().n_mean, n_hi = n_lo;
    double q_lo = sweep.points.front().q_i, q_hi = q_lo;
    for (const auto& p : sweep.points) {
        n_lo = std::min(n_lo, p.n_mean);
        n_hi = std::max(n_hi, p.n_mean);
        q_lo = std::min(q_lo, p.q_i);
        q_hi = std::max(q_hi, p.q_i);
    }
    const double lx0 = std::floor(std::log10(n_lo));
    const double lx1 = std::ceil(std::log10(n_hi));
    double ly0 = std::floor(std::log10(q_lo) * 10.0) / 10.0;
    double ly1 = std::ceil(std::log10(q_hi) * 10.0) / 10.0;
    if (ly1 - ly0 < 0.2) {
        ly0 -= 0.1;
        ly1 += 0.1;
    }

    auto px = [&](double n) { return ml + (std::log10(n) - lx0) / (lx1 - lx0) * pw; };
    auto py = [&](double q) { return mt + (ly1 - std::log10(q)) / (ly1 - ly0) * ph; };
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(pw) +
           "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    // decade gridlines and tick labels
    for (int d = static_cast<int>(lx0); d <= static_cast<int>(lx1); ++d) {
        const double x = ml + (d - lx0) / (lx1 - lx0) * pw;
        svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(x) + "\" y2=\"" +
               num(mt + ph) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + num(x) + "\" y=\"" + num(mt + ph + 18.0) +
               "\" font-size=\"12\" text-anchor=\"middle\">1e" + std::to_string(d) + "</text>\n";
    }
    for (double ly = std::ceil(ly0 * 2.0) / 2.0; ly <= ly1 + 1e-9; ly += 0.5) {
        const double y = mt + (ly1 - ly) / (ly1 - ly0) * ph;
        svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(y) + "\" x2=\"" + num(ml + pw) +
               "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
        char lab[40];
        std::snprintf(lab, sizeof lab, "%.1e", std::pow(10.0, ly));
        svg += "<text x=\"" + num(ml - 6.0) + "\" y=\"" + num(y + 4.0) +
               "\" font-size=\"12\" text-anchor=\"end\">" + lab + "</text>\n";
    }
    svg += "<text x=\"" + num(ml + pw / 2.0) + "\" y=\"" + num(height - 10.0) +
           "\" font-size=\"13\" text-anchor=\"middle\">mean photon number</text>\n";
    svg += "<text x=\"16\" y=\"" + num(mt + ph / 2.0) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num(mt + ph / 2.0) + ")\">internal quality factor</text>\n";

    // fit curve
    std::string path;
    constexpr int kCurve = 200;
    for (int i = 0; i <= kCurve; ++i) {
        const double ln = lx0 + (lx1 - lx0) * i / kCurve;
        const double n = std::pow(10.0, ln);
        const double q =
            1.0 / loss_model(fit.params, n, fit.f_r, fit.temperature, fit.variant);
        path += (i == 0 ? "M" : "L") + num(px(n)) + " " + num(py(q)) + " ";
    }
    svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";

    // data points
    for (const auto& p : sweep.points)
        svg += "<circle cx=\"" + num(px(p.n_mean)) + "\" cy=\"" + num(py(p.q_i)) +
               "\" r=\"3\" fill=\"#2c3e50\"/>\n";

    svg += "</svg>\n";
    return svg;
}

inline void write_sweep_plot(const PowerSweep& sweep, const TLSFitResult& fit,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << sweep_plot_svg(sweep, fit);
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace reslab
