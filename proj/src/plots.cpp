#include "tsci/reporter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsci {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 220.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 20.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 30.0;
constexpr double kLineWidth = 2.0;

const char* const kPalette[] = {"#4c72b0", "#55a868", "#8172b2", "#ccb974", "#64b5cd", "#dd8452", "#937860"};

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

struct Line {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;  // NaN breaks the path
    std::string color;
    double width = kLineWidth;
    std::string dash;
    bool stems = false;  // vertical bars from y = 0
};

struct Band {
    std::vector<double> xs, lower, upper;
    std::string color;
};

struct Panel {
    std::string title;
    std::vector<Line> lines;
    std::vector<Band> bands;
    std::vector<double> reference_levels;  // dashed horizontal lines
};

std::vector<double> iota_x(std::size_t n, double start = 0.0) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = start + static_cast<double>(i);
    return xs;
}

class Frame {
public:
    Frame(const Panel& p, double top) : top_(top) {
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        const auto take = [&](double x, double y) {
            if (!std::isfinite(x) || !std::isfinite(y)) return;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        };
        for (const auto& l : p.lines) {
            for (std::size_t i = 0; i < l.xs.size(); ++i) take(l.xs[i], l.ys[i]);
            if (l.stems)
                for (double x : l.xs) take(x, 0.0);
        }
        for (const auto& b : p.bands)
            for (std::size_t i = 0; i < b.xs.size(); ++i) {
                take(b.xs[i], b.lower[i]);
                take(b.xs[i], b.upper[i]);
            }
        for (double r : p.reference_levels) take(std::isfinite(xmin) ? xmin : 0.0, r);
        if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymin -= 1.0, ymax += 1.0;
        const double pad = 0.05 * (ymax - ymin);
        x0_ = xmin;
        x1_ = xmax;
        y0_ = ymin - pad;
        y1_ = ymax + pad;
    }

    double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
    double py(double y) const {
        const double h = kPanelHeight - kTop - kBottom;
        return top_ + kTop + (1.0 - (y - y0_) / (y1_ - y0_)) * h;
    }
    double y_lo() const { return y0_; }
    double y_hi() const { return y1_; }
    double x_lo() const { return x0_; }
    double x_hi() const { return x1_; }
    double top() const { return top_; }

private:
    double top_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

std::string path_data(const Frame& f, const Line& l) {
    std::string d;
    bool pen_down = false;
    for (std::size_t i = 0; i < l.xs.size(); ++i) {
        const double x = l.xs[i], y = l.ys[i];
        if (!std::isfinite(x) || !std::isfinite(y)) {
            pen_down = false;
            continue;
        }
        if (l.stems) {
            d += fmt::format("M{:.2f},{:.2f}L{:.2f},{:.2f}", f.px(x), f.py(0.0), f.px(x), f.py(y));
            continue;
        }
        d += fmt::format("{}{:.2f},{:.2f}", pen_down ? "L" : "M", f.px(x), f.py(y));
        pen_down = true;
    }
    return d;
}

std::string render_panel(const Panel& p, double top) {
    const Frame f(p, top);
    std::string s;
    const double plot_top = top + kTop;
    const double plot_bottom = top + kPanelHeight - kBottom;
    s += fmt::format("<g class=\"panel\">\n<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" font-weight=\"bold\">{}</text>\n",
                     kLeft, top + 20.0, escape(p.title));

    // Grid: five major divisions (solid, half opacity) with a dotted minor line between each pair.
    constexpr int kMajor = 5;
    for (int i = 0; i <= 2 * kMajor; ++i) {
        const double frac = static_cast<double>(i) / (2 * kMajor);
        const double y = f.y_lo() + frac * (f.y_hi() - f.y_lo());
        const double x = f.x_lo() + frac * (f.x_hi() - f.x_lo());
        const bool major = i % 2 == 0;
        const auto style = major ? std::string("stroke=\"#b0b0b0\" stroke-opacity=\"0.5\" stroke-width=\"0.8\"")
                                 : std::string("stroke=\"#b0b0b0\" stroke-opacity=\"0.3\" stroke-width=\"0.5\" "
                                               "stroke-dasharray=\"1,3\"");
        s += fmt::format("<line class=\"grid\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" {}/>\n", kLeft,
                         f.py(y), kWidth - kRight, f.py(y), style);
        s += fmt::format("<line class=\"grid\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" {}/>\n", f.px(x),
                         plot_top, f.px(x), plot_bottom, style);
        if (major) {
            s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
                             kLeft - 4.0, f.py(y) + 3.0, escape(fmt::format("{:.3g}", y)));
            s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                             f.px(x), plot_bottom + 14.0, escape(fmt::format("{:.4g}", x)));
        }
    }
    s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"#333333\" "
                     "stroke-width=\"0.8\"/>\n",
                     kLeft, plot_top, kWidth - kLeft - kRight, plot_bottom - plot_top);

    for (const auto& b : p.bands) {
        std::string pts;
        for (std::size_t i = 0; i < b.xs.size(); ++i) pts += fmt::format("{:.2f},{:.2f} ", f.px(b.xs[i]), f.py(b.upper[i]));
        for (std::size_t i = b.xs.size(); i-- > 0;) pts += fmt::format("{:.2f},{:.2f} ", f.px(b.xs[i]), f.py(b.lower[i]));
        if (!pts.empty()) pts.pop_back();
        s += fmt::format("<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.18\" stroke=\"none\"/>\n", pts,
                         b.color);
    }
    for (double r : p.reference_levels)
        s += fmt::format("<line class=\"reference\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                         "stroke=\"#1f77b4\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n",
                         kLeft, f.py(r), kWidth - kRight, f.py(r));
    for (const auto& l : p.lines) {
        s += fmt::format("<path data-series=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
                         escape(l.name), path_data(f, l), l.color, l.width,
                         l.dash.empty() ? std::string() : fmt::format(" stroke-dasharray=\"{}\"", l.dash));
    }

    // Legend.
    double lx = kLeft + 260.0;
    for (const auto& l : p.lines) {
        s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" fill=\"{}\">{}</text>\n", lx, top + 20.0, l.color,
                         escape(l.name));
        lx += 9.0 + 7.0 * static_cast<double>(l.name.size());
    }
    s += "</g>\n";
    return s;
}

std::string render_svg(const std::string& title, const std::vector<Panel>& panels) {
    const double height = kPanelHeight * static_cast<double>(panels.size());
    std::string s = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\">\n<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n",
        kWidth, height, kWidth, height, escape(title));
    for (std::size_t i = 0; i < panels.size(); ++i) s += render_panel(panels[i], kPanelHeight * static_cast<double>(i));
    s += "</svg>\n";
    return s;
}

std::vector<double> offset_values(std::size_t n, std::size_t first, const std::vector<double>& values) {
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < values.size() && first + i < n; ++i) out[first + i] = values[i];
    return out;
}

}  // namespace

std::map<std::string, std::string> render_plots(const PlotData& data) {
    std::map<std::string, std::string> out;
    const std::size_t n = data.series.size();
    const auto xs = iota_x(n);

    // Overview: raw series with rolling mean, and the rolling standard deviation.
    {
        Panel level{"Series with rolling mean (window 24)", {}, {}, {}};
        level.lines.push_back({"series", xs, data.series, kPrimaryColor});
        Panel spread{"Rolling standard deviation (window 24)", {}, {}, {}};
        if (n >= kOverviewWindow) {
            const auto rs = rolling_stats(data.series, kOverviewWindow);
            level.lines.push_back({"rolling mean", xs, offset_values(n, rs.first_index, rs.means), kPalette[0]});
            spread.lines.push_back({"rolling std", xs, offset_values(n, rs.first_index, rs.stds), kPalette[1]});
        } else {
            const std::vector<double> empty(n, std::numeric_limits<double>::quiet_NaN());
            level.lines.push_back({"rolling mean", xs, empty, kPalette[0]});
            spread.lines.push_back({"rolling std", xs, empty, kPalette[1]});
        }
        out["overview.svg"] = render_svg("Overview", {level, spread});
    }

    // Decomposition: X, T, S, R stacked.
    {
        const auto& d = data.decomposition;
        const auto dx = iota_x(d.observed.size());
        std::vector<Panel> panels{
            {fmt::format("Observed (period {})", d.period), {{"observed", dx, d.observed, kPrimaryColor}}, {}, {}},
            {"Trend", {{"trend", dx, d.trend, kPalette[0]}}, {}, {}},
            {"Seasonal", {{"seasonal", dx, d.seasonal, kPalette[1]}}, {}, {}},
            {"Residual", {{"residual", dx, d.residual, kPalette[2]}}, {}, {}},
        };
        out["decomposition.svg"] = render_svg("Decomposition", panels);
    }

    // Correlogram: ACF and PACF stems with the +-1.96/sqrt(n) band.
    {
        const auto& c = data.correlogram;
        const double band = c.confidence_band;
        Panel acf{"Autocorrelation (ACF)", {{"acf", iota_x(c.acf.size()), c.acf, kPrimaryColor, 2.0, "", true}}, {}, {band, -band}};
        Panel pacf{"Partial autocorrelation (PACF)", {{"pacf", iota_x(c.pacf.size()), c.pacf, kPalette[0], 2.0, "", true}}, {}, {band, -band}};
        out["correlogram.svg"] = render_svg("Correlogram", {acf, pacf});
    }

    // Ensemble forecast: history tail, members, ensemble line and interval band.
    {
        const std::size_t h = data.intervals.point.size();
        const std::size_t tail = std::min(n, std::max<std::size_t>(2 * h, 96));
        std::vector<double> hist_x, hist_y;
        for (std::size_t i = n - tail; i < n; ++i) {
            hist_x.push_back(static_cast<double>(i));
            hist_y.push_back(data.series[i]);
        }
        const auto fx = iota_x(h, static_cast<double>(n));
        Panel p{"Ensemble forecast with members", {}, {}, {}};
        p.bands.push_back({fx, data.intervals.lower, data.intervals.upper, kPrimaryColor});
        p.lines.push_back({"history", hist_x, hist_y, kPrimaryColor});
        for (std::size_t i = 0; i < data.member_forecasts.size(); ++i) {
            const auto name = i < data.member_names.size() ? data.member_names[i] : fmt::format("member {}", i + 1);
            p.lines.push_back({name, fx, data.member_forecasts[i], kPalette[i % std::size(kPalette)], 1.2, "4,3"});
        }
        p.lines.push_back({"ensemble", fx, data.intervals.point, "#1f1f1f", 2.5});
        if (data.actual.size() == h) p.lines.push_back({"actual", fx, data.actual, "#2b8cbe", 1.5, "2,2"});
        out["ensemble_forecast.svg"] = render_svg("Ensemble forecast", {p});
    }
    return out;
}

}  // namespace tsci
