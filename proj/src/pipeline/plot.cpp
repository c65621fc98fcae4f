#include "porogen/pipeline/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "porogen/core/errors.hpp"

namespace porogen::pipeline {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range data_range(const std::vector<Series>& series, bool use_x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series)
        for (double v : use_x ? s.xs : s.ys) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

class SvgCanvas {
public:
    SvgCanvas(const std::string& title, const std::string& xlabel, const std::string& ylabel,
              Range xr, Range yr)
        : xr_(xr), yr_(yr) {
        ss_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
            << title << "</text>\n"
            << "<text x=\"" << (kMarginLeft + plot_w() / 2) << "\" y=\"" << (kHeight - 12)
            << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n"
            << "<text x=\"18\" y=\"" << (kMarginTop + plot_h() / 2)
            << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
            << (kMarginTop + plot_h() / 2) << ")\">" << ylabel << "</text>\n"
            << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w()
            << "\" height=\"" << plot_h() << "\" fill=\"none\" stroke=\"#444\"/>\n";
        axes();
    }

    double px(double x) const {
        return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_w();
    }
    double py(double y) const {
        return kMarginTop + plot_h() - (y - yr_.lo) / (yr_.hi - yr_.lo) * plot_h();
    }

    void polyline(const Series& s) {
        ss_ << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            ss_ << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
        ss_ << "\"/>\n";
    }

    void dots(const Series& s) {
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            ss_ << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
                << "\" r=\"2.5\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
    }

    void line(double x0, double y0, double x1, double y1, const std::string& color,
              const std::string& dash = {}) {
        ss_ << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x1)
            << "\" y2=\"" << py(y1) << "\" stroke=\"" << color << "\"";
        if (!dash.empty()) ss_ << " stroke-dasharray=\"" << dash << "\"";
        ss_ << "/>\n";
    }

    void legend(const std::vector<Series>& series) {
        int y = kMarginTop + 14;
        for (const auto& s : series) {
            if (s.name.empty()) continue;
            ss_ << "<rect x=\"" << (kWidth - kMarginRight - 150) << "\" y=\"" << (y - 9)
                << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n"
                << "<text x=\"" << (kWidth - kMarginRight - 133) << "\" y=\"" << (y + 2)
                << "\" font-size=\"11\">" << s.name << "</text>\n";
            y += 18;
        }
    }

    void save(const std::filesystem::path& path) {
        ss_ << "</svg>\n";
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write plot: " + path.string());
        out << ss_.str();
    }

private:
    static int plot_w() { return kWidth - kMarginLeft - kMarginRight; }
    static int plot_h() { return kHeight - kMarginTop - kMarginBottom; }

    void axes() {
        for (int i = 0; i <= 5; ++i) {
            double fx = xr_.lo + (xr_.hi - xr_.lo) * i / 5.0;
            double fy = yr_.lo + (yr_.hi - yr_.lo) * i / 5.0;
            ss_ << "<text x=\"" << px(fx) << "\" y=\"" << (kHeight - kMarginBottom + 16)
                << "\" text-anchor=\"middle\" font-size=\"10\">" << format(fx) << "</text>\n"
                << "<text x=\"" << (kMarginLeft - 6) << "\" y=\"" << (py(fy) + 3)
                << "\" text-anchor=\"end\" font-size=\"10\">" << format(fy) << "</text>\n";
        }
    }

    static std::string format(double v) {
        std::ostringstream s;
        s.precision(4);
        s << v;
        return s.str();
    }

    Range xr_, yr_;
    std::ostringstream ss_;
};

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
    SvgCanvas canvas(title, xlabel, ylabel, data_range(series, true), data_range(series, false));
    for (const auto& s : series) canvas.polyline(s);
    canvas.legend(series);
    canvas.save(path);
}

void write_scatter_plot(const std::filesystem::path& path, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel,
                        const std::vector<Series>& series, bool identity_line) {
    Range xr = data_range(series, true);
    Range yr = data_range(series, false);
    if (identity_line) {
        xr.lo = yr.lo = std::min(xr.lo, yr.lo);
        xr.hi = yr.hi = std::max(xr.hi, yr.hi);
    }
    SvgCanvas canvas(title, xlabel, ylabel, xr, yr);
    if (identity_line) canvas.line(xr.lo, xr.lo, xr.hi, xr.hi, "#999", "4 3");
    for (const auto& s : series) canvas.dots(s);
    canvas.legend(series);
    canvas.save(path);
}

}  // namespace porogen::pipeline
