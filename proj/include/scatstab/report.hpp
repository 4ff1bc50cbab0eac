#pragma once

// Deterministic CSV emission and a small hand-rolled SVG log-log plot,
// so experiment outputs need no external renderer.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatstab/fit.hpp"

namespace scatstab {

// Shortest round-trippable decimal form; locale-independent.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ResultRow {
    std::size_t rung = 0;
    double tau_sup = 0.0;
    double bandwidth = 0.0;  // 0 unless the rung varies bandwidth
    double input_error = 0.0;
    double feature_error = 0.0;
};

inline const char* kResultsHeader = "rung,tau_sup,bandwidth,input_error,feature_error,fitted_alpha,fitted_logc,fit_residual";

inline std::string results_csv(const std::vector<ResultRow>& rows, const ExponentFit& fit) {
    std::string out = kResultsHeader;
    out += "\n";
    for (const ResultRow& r : rows) {
        out += std::to_string(r.rung);
        out += "," + format_double(r.tau_sup);
        out += "," + format_double(r.bandwidth);
        out += "," + format_double(r.input_error);
        out += "," + format_double(r.feature_error);
        out += "," + format_double(fit.alpha);
        out += "," + format_double(fit.log_constant);
        out += "," + format_double(fit.residual);
        out += "\n";
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// SVG log-log plot
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::string color;
    Curve points;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

// Log-log scatter of one or more series plus an optional fitted power law.
inline std::string loglog_svg(const std::string& title, const std::vector<PlotSeries>& series,
                              const ExponentFit* fit = nullptr,
                              const std::string& x_label = "||tau||_inf") {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (!(p.tau_sup > 0.0) || !(p.error > 0.0)) continue;
            xmin = std::min(xmin, std::log10(p.tau_sup));
            xmax = std::max(xmax, std::log10(p.tau_sup));
            ymin = std::min(ymin, std::log10(p.error));
            ymax = std::max(ymax, std::log10(p.error));
        }
    if (xmax < xmin) {
        xmin = -1;
        xmax = 0;
    }
    if (ymax < ymin) {
        ymin = -1;
        ymax = 0;
    }
    if (xmax - xmin < 1e-9) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-9) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double padx = 0.05 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
    xmin -= padx;
    xmax += padx;
    ymin -= pady;
    ymax += pady;
    auto X = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto Y = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(W) + "\" height=\"" +
           detail::svg_num(H) + "\" viewBox=\"0 0 " + detail::svg_num(W) + " " + detail::svg_num(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::svg_num(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" + title + "</text>\n";
    // frame
    svg += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) + "\" width=\"" +
           detail::svg_num(W - ml - mr) + "\" height=\"" + detail::svg_num(H - mt - mb) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    // decade grid lines + labels
    for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
        const double x = X(e);
        svg += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
               detail::svg_num(x) + "\" y2=\"" + detail::svg_num(H - mb) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(H - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">1e" + std::to_string(e) +
               "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e) {
        const double y = Y(e);
        svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(y) + "\" x2=\"" +
               detail::svg_num(W - mr) + "\" y2=\"" + detail::svg_num(y) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">1e" + std::to_string(e) +
               "</text>\n";
    }
    // fitted line
    if (fit) {
        const double lx0 = xmin + 0.02 * (xmax - xmin), lx1 = xmax - 0.02 * (xmax - xmin);
        const double ly0 = (fit->log_constant + fit->alpha * lx0 * std::log(10.0)) / std::log(10.0);
        const double ly1 = (fit->log_constant + fit->alpha * lx1 * std::log(10.0)) / std::log(10.0);
        svg += "<line x1=\"" + detail::svg_num(X(lx0)) + "\" y1=\"" + detail::svg_num(Y(ly0)) + "\" x2=\"" +
               detail::svg_num(X(lx1)) + "\" y2=\"" + detail::svg_num(Y(ly1)) +
               "\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n";
        char lbl[96];
        std::snprintf(lbl, sizeof(lbl), "fit: alpha = %.4f", fit->alpha);
        svg += "<text x=\"" + detail::svg_num(W - mr - 8) + "\" y=\"" + detail::svg_num(mt + 18) +
               "\" text-anchor=\"end\" font-size=\"13\" font-family=\"sans-serif\" fill=\"#555\">" + lbl +
               "</text>\n";
    }
    // series
    double legend_y = mt + 36;
    for (const auto& s : series) {
        std::string poly;
        for (const auto& p : s.points) {
            if (!(p.tau_sup > 0.0) || !(p.error > 0.0)) continue;
            const double x = X(std::log10(p.tau_sup)), y = Y(std::log10(p.error));
            poly += detail::svg_num(x) + "," + detail::svg_num(y) + " ";
            svg += "<circle cx=\"" + detail::svg_num(x) + "\" cy=\"" + detail::svg_num(y) +
                   "\" r=\"3.5\" fill=\"" + s.color + "\"/>\n";
        }
        if (!poly.empty())
            svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + detail::svg_num(W - mr - 8) + "\" y=\"" + detail::svg_num(legend_y) +
               "\" text-anchor=\"end\" font-size=\"13\" font-family=\"sans-serif\" fill=\"" + s.color + "\">" +
               s.label + "</text>\n";
        legend_y += 16;
    }
    svg += "<text x=\"" + detail::svg_num((W + ml - mr) / 2) + "\" y=\"" + detail::svg_num(H - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace scatstab
