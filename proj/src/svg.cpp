#include "vpinn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vpinn {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

struct Axis {
    AxisScale scale;
    double lo = 0.0, hi = 1.0;

    double map(double v, double pixel_lo, double pixel_hi) const {
        double t;
        if (scale == AxisScale::log) {
            t = (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        } else {
            t = (v - lo) / (hi - lo);
        }
        return pixel_lo + t * (pixel_hi - pixel_lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (scale == AxisScale::log) {
            const int e0 = static_cast<int>(std::floor(std::log10(lo)));
            const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
            for (int e = e0; e <= e1; ++e) {
                const double v = std::pow(10.0, e);
                if (v >= lo * 0.999 && v <= hi * 1.001) out.push_back(v);
            }
            if (out.size() < 2) {
                out = {lo, hi};
            }
        } else {
            const int n = 5;
            for (int i = 0; i <= n; ++i) out.push_back(lo + (hi - lo) * i / n);
        }
        return out;
    }
};

std::string fmt_tick(double v, AxisScale scale) {
    std::ostringstream os;
    if (scale == AxisScale::log) {
        const double e = std::log10(v);
        const double er = std::round(e);
        if (std::abs(e - er) < 1e-9) {
            os << "1e" << static_cast<int>(er);
            return os.str();
        }
    }
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label, AxisScale x_scale,
                    AxisScale y_scale, const std::vector<PlotSeries>& series) {
    Axis xa{x_scale}, ya{y_scale};
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double xv = s.x[i], yv = s.y[i];
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            if (x_scale == AxisScale::log && xv <= 0.0) continue;
            if (y_scale == AxisScale::log && yv <= 0.0) continue;
            xlo = std::min(xlo, xv);
            xhi = std::max(xhi, xv);
            ylo = std::min(ylo, yv);
            yhi = std::max(yhi, yv);
        }
    }
    if (!(xlo < xhi)) {
        xhi = xlo + 1.0;
        xlo = (x_scale == AxisScale::log) ? xlo * 0.5 : xlo - 1.0;
    }
    if (!(ylo < yhi)) {
        yhi = (y_scale == AxisScale::log) ? ylo * 2.0 : ylo + 1.0;
        ylo = (y_scale == AxisScale::log) ? ylo * 0.5 : ylo - 1.0;
    }
    if (x_scale == AxisScale::log) {
        xlo /= 1.2;
        xhi *= 1.2;
    } else {
        const double pad = 0.05 * (xhi - xlo);
        xlo -= pad;
        xhi += pad;
    }
    if (y_scale == AxisScale::log) {
        ylo /= 1.5;
        yhi *= 1.5;
    } else {
        const double pad = 0.05 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;
    }
    xa.lo = xlo;
    xa.hi = xhi;
    ya.lo = ylo;
    ya.hi = yhi;

    const double px0 = kMarginLeft, px1 = kWidth - kMarginRight;
    const double py0 = kHeight - kMarginBottom, py1 = kMarginTop;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";

    // axes
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
        << "\" stroke=\"black\"/>\n";
    for (double tv : xa.ticks()) {
        const double px = xa.map(tv, px0, px1);
        out << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px << "\" y2=\""
            << py0 + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << py0 + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_tick(tv, x_scale)
            << "</text>\n";
    }
    for (double tv : ya.ticks()) {
        const double py = ya.map(tv, py0, py1);
        out << "<line x1=\"" << px0 - 5 << "\" y1=\"" << py << "\" x2=\"" << px0 << "\" y2=\""
            << py << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px0 - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(tv, y_scale) << "</text>\n";
    }
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (py0 + py1) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
        << (py0 + py1) / 2 << ")\">" << y_label << "</text>\n";

    // series
    for (const auto& s : series) {
        std::ostringstream pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double xv = s.x[i], yv = s.y[i];
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            if (x_scale == AxisScale::log && xv <= 0.0) continue;
            if (y_scale == AxisScale::log && yv <= 0.0) continue;
            pts << xa.map(xv, px0, px1) << ',' << ya.map(yv, py0, py1) << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        if (s.markers) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double xv = s.x[i], yv = s.y[i];
                if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
                if (x_scale == AxisScale::log && xv <= 0.0) continue;
                if (y_scale == AxisScale::log && yv <= 0.0) continue;
                out << "<circle cx=\"" << xa.map(xv, px0, px1) << "\" cy=\""
                    << ya.map(yv, py0, py1) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            }
        }
    }

    // legend
    double ly = py1 + 10;
    for (const auto& s : series) {
        out << "<line x1=\"" << px1 - 150 << "\" y1=\"" << ly << "\" x2=\"" << px1 - 120
            << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << px1 - 114 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
            << s.label << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

}  // namespace vpinn
