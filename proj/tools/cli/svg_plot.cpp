#include "cli/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace anisolab::cli {

namespace {

constexpr double width = 720, height = 480;
constexpr double left = 80, right = 24, top = 48, bottom = 64;
constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0, hi = 1;  // in transformed units
    double pixel_lo = 0, pixel_hi = 1;

    [[nodiscard]] double transform(double v) const { return log ? std::log10(v) : v; }
    [[nodiscard]] bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
    [[nodiscard]] double pixel(double v) const {
        return pixel_lo + (transform(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
    }

    void fit(const std::vector<double>& values) {
        double a = std::numeric_limits<double>::infinity(), b = -a;
        for (double v : values)
            if (usable(v)) {
                a = std::min(a, transform(v));
                b = std::max(b, transform(v));
            }
        if (!std::isfinite(a)) a = 0, b = 1;
        if (b - a < 1e-12) {
            const double pad = log ? 0.5 : std::max(1e-3, std::abs(a) * 0.1);
            a -= pad;
            b += pad;
        }
        const double margin = 0.05 * (b - a);
        lo = a - margin;
        hi = b + margin;
    }

    /// Tick positions in data units.
    [[nodiscard]] std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::ceil(lo); e <= std::floor(hi); e += 1.0) out.push_back(std::pow(10.0, e));
            if (out.size() < 2) {
                for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0)
                    for (double m : {2.0, 5.0}) {
                        const double v = m * std::pow(10.0, e);
                        if (std::log10(v) >= lo && std::log10(v) <= hi) out.push_back(v);
                    }
                std::sort(out.begin(), out.end());
            }
            return out;
        }
        const double raw = (hi - lo) / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

std::string tick_label(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

} // namespace

std::string render_svg(const PlotSpec& plot) {
    Axis x{plot.log_x}, y{plot.log_y};
    x.pixel_lo = left;
    x.pixel_hi = width - right;
    y.pixel_lo = height - bottom;
    y.pixel_hi = top;
    std::vector<double> xs, ys;
    for (const auto& s : plot.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
        ys.insert(ys.end(), s.lo.begin(), s.lo.end());
        ys.insert(ys.end(), s.hi.begin(), s.hi.end());
    }
    x.fit(xs);
    y.fit(ys);

    std::ostringstream svg;
    svg.precision(6);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(plot.title)
        << "</text>\n";

    for (double t : x.ticks()) {
        const double px = x.pixel(t);
        svg << "<line x1=\"" << px << "\" y1=\"" << top << "\" x2=\"" << px << "\" y2=\"" << height - bottom
            << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<text x=\"" << px << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t : y.ticks()) {
        const double py = y.pixel(t);
        svg << "<line x1=\"" << left << "\" y1=\"" << py << "\" x2=\"" << width - right << "\" y2=\"" << py
            << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << tick_label(t)
            << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
        << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 20 << "\" text-anchor=\"middle\">"
        << escape(plot.x_label) << (plot.log_x ? " (log)" : "") << "</text>\n";
    svg << "<text transform=\"translate(20," << (top + height - bottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << (plot.log_y ? " (log)" : "")
        << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* colour = palette[k % std::size(palette)];
        std::ostringstream points;
        points.precision(6);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!x.usable(s.x[i]) || !y.usable(s.y[i])) continue;
            const double px = x.pixel(s.x[i]), py = y.pixel(s.y[i]);
            points << px << ',' << py << ' ';
            if (i < s.lo.size() && y.usable(s.lo[i]) && y.usable(s.hi[i]) && s.hi[i] > s.lo[i])
                svg << "<line x1=\"" << px << "\" y1=\"" << y.pixel(s.lo[i]) << "\" x2=\"" << px << "\" y2=\""
                    << y.pixel(s.hi[i]) << "\" stroke=\"" << colour << "\"/>\n";
            svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
        }
        svg << "<polyline points=\"" << points.str() << "\" fill=\"none\" stroke=\"" << colour
            << "\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << width - right - 8 << "\" y=\"" << top + 16 + 16 * static_cast<double>(k)
            << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << escape(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace anisolab::cli
