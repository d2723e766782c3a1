#include "mlsa/plot.hpp"

#include "mlsa/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mlsa {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;

std::string fmt(const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

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

std::string escape_comment(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '-' && !out.empty() && out.back() == '-') out += ' ';
        out += c;
    }
    return out;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const { return log ? std::log10(v) : v; }
    double unit(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(double mn, double mx, bool log) {
    Axis a;
    a.log = log;
    if (!(mn <= mx)) return a;
    if (log) {
        a.lo = std::floor(std::log10(mn));
        a.hi = std::ceil(std::log10(mx));
    } else {
        a.lo = mn;
        a.hi = mx;
    }
    if (a.hi - a.lo < 1e-12) {
        a.lo -= log ? 1.0 : std::max(1.0, std::abs(a.lo) * 0.1);
        a.hi += log ? 1.0 : std::max(1.0, std::abs(a.hi) * 0.1);
    }
    return a;
}

std::vector<std::pair<double, std::string>> ticks(const Axis& a) {
    std::vector<std::pair<double, std::string>> out;
    if (a.log) {
        const int lo = static_cast<int>(a.lo), hi = static_cast<int>(a.hi);
        const int step = std::max(1, (hi - lo) / 8);
        for (int e = lo; e <= hi; e += step) {
            out.emplace_back((e - a.lo) / (a.hi - a.lo), "1e" + std::to_string(e));
        }
        return out;
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = a.lo + (a.hi - a.lo) * i / 5.0;
        out.emplace_back(i / 5.0, fmt("%.3g", v));
    }
    return out;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string render_svg(const FigureSpec& spec, const std::vector<Curve>& curves) {
    std::vector<std::vector<std::pair<double, double>>> points(curves.size());
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto xs = curves[c].table.values(curves[c].x);
        const auto ys = curves[c].table.values(curves[c].y);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!usable(xs[i], spec.log_x) || !usable(ys[i], spec.log_y)) continue;
            points[c].emplace_back(xs[i], ys[i]);
            xmin = std::min(xmin, xs[i]);
            xmax = std::max(xmax, xs[i]);
            ymin = std::min(ymin, ys[i]);
            ymax = std::max(ymax, ys[i]);
        }
    }
    const Axis ax = make_axis(xmin, xmax, spec.log_x);
    const Axis ay = make_axis(ymin, ymax, spec.log_y);
    const double pw = spec.width - kMarginLeft - kMarginRight;
    const double ph = spec.height - kMarginTop - kMarginBottom;
    auto px = [&](double v) { return kMarginLeft + pw * ax.unit(v); };
    auto py = [&](double v) { return kMarginTop + ph * (1.0 - ay.unit(v)); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    if (!spec.comments.empty()) {
        o << "<!--\n";
        for (const auto& c : spec.comments) o << escape_comment(c) << '\n';
        o << "-->\n";
    }
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";
    o << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << fmt("%.2f", pw)
      << "\" height=\"" << fmt("%.2f", ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (const auto& [u, text] : ticks(ax)) {
        const double x = kMarginLeft + pw * u;
        o << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << kMarginTop << "\" x2=\"" << fmt("%.2f", x)
          << "\" y2=\"" << fmt("%.2f", kMarginTop + ph) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << fmt("%.2f", kMarginTop + ph + 16)
          << "\" text-anchor=\"middle\">" << escape(text) << "</text>\n";
    }
    for (const auto& [u, text] : ticks(ay)) {
        const double y = kMarginTop + ph * (1.0 - u);
        o << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\""
          << fmt("%.2f", kMarginLeft + pw) << "\" y2=\"" << fmt("%.2f", y) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << fmt("%.2f", y + 4)
          << "\" text-anchor=\"end\">" << escape(text) << "</text>\n";
    }
    o << "<text x=\"" << fmt("%.2f", kMarginLeft + pw / 2) << "\" y=\"" << spec.height - 14
      << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << fmt("%.2f", kMarginTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % std::size(kPalette)];
        if (!points[c].empty()) {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < points[c].size(); ++i) {
                o << (i ? " " : "") << fmt("%.2f", px(points[c][i].first)) << ','
                  << fmt("%.2f", py(points[c][i].second));
            }
            o << "\"/>\n";
        }
        const double ly = kMarginTop + 14.0 + 18.0 * static_cast<double>(c);
        const double lx = kMarginLeft + pw + 12;
        o << "<line x1=\"" << fmt("%.2f", lx) << "\" y1=\"" << fmt("%.2f", ly - 4) << "\" x2=\""
          << fmt("%.2f", lx + 20) << "\" y2=\"" << fmt("%.2f", ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fmt("%.2f", lx + 26) << "\" y=\"" << fmt("%.2f", ly) << "\">"
          << escape(curves[c].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void plot_files(const FigureSpec& spec, const std::vector<CurveFile>& files,
                const std::string& out_path) {
    std::vector<Curve> curves;
    for (const auto& f : files) curves.push_back({f.label, load_csv(f.path), f.x, f.y});
    const std::string svg = render_svg(spec, curves);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + out_path);
    out << svg;
}

void write_figure_file(const std::string& path, const FigureFile& figure) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + path);
    const FigureSpec& s = figure.spec;
    out << "title=" << s.title << "\nx_label=" << s.x_label << "\ny_label=" << s.y_label
        << "\nlog_x=" << (s.log_x ? 1 : 0) << "\nlog_y=" << (s.log_y ? 1 : 0) << '\n';
    for (const auto& c : figure.curves) {
        if ((c.path + c.x + c.y).find('|') != std::string::npos) {
            throw Error(ErrorCode::InvalidParameter, "curve fields other than the label cannot contain '|'");
        }
        out << "curve=" << c.label << '|' << c.path << '|' << c.x << '|' << c.y << '\n';
    }
}

FigureFile read_figure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    FigureFile f;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(number, 1, "expected key=value");
        const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "title") {
            f.spec.title = value;
        } else if (key == "x_label") {
            f.spec.x_label = value;
        } else if (key == "y_label") {
            f.spec.y_label = value;
        } else if (key == "log_x") {
            f.spec.log_x = value != "0";
        } else if (key == "log_y") {
            f.spec.log_y = value != "0";
        } else if (key == "curve") {
            // The label may contain '|'; the last three fields may not.
            std::string rest = value;
            std::string fields[3];
            for (int i = 2; i >= 0; --i) {
                const auto bar = rest.rfind('|');
                if (bar == std::string::npos) {
                    throw ParseError(number, eq + 2, "curve needs label|csv|x|y");
                }
                fields[i] = rest.substr(bar + 1);
                rest.erase(bar);
            }
            f.curves.push_back({rest, fields[0], fields[1], fields[2]});
        } else {
            throw ParseError(number, 1, "unknown key " + key);
        }
    }
    return f;
}

void render_figure(const FigureFile& figure, const std::string& base_dir, const std::string& out_path) {
    std::vector<Curve> curves;
    FigureSpec spec = figure.spec;
    for (const auto& c : figure.curves) {
        const std::string path = base_dir.empty() || (!c.path.empty() && c.path[0] == '/')
                                     ? c.path
                                     : base_dir + "/" + c.path;
        curves.push_back({c.label, load_csv(path), c.x, c.y});
    }
    if (!curves.empty()) spec.comments = curves.front().table.comments;
    const std::string svg = render_svg(spec, curves);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + out_path);
    out << svg;
}

}  // namespace mlsa
