#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/fit.hpp"

namespace sbm {

namespace detail {
inline std::string svg_num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return b;
}
inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}
}  // namespace detail

// Scatter of (xs, ys) with the fitted line a + b x.  The data are plotted as
// given, so pass logarithms for a log-log plot and label the axes.
inline std::string fit_svg(const ExponentFit& fit, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    const double W = 480, H = 360, L = 60, R = 20, T = 40, B = 50;
    if (fit.xs.empty()) throw input_error("fit_svg: fit has no data");
    double x0 = *std::min_element(fit.xs.begin(), fit.xs.end()), x1 = *std::max_element(fit.xs.begin(), fit.xs.end());
    double y0 = *std::min_element(fit.ys.begin(), fit.ys.end()), y1 = *std::max_element(fit.ys.begin(), fit.ys.end());
    for (double x : {x0, x1}) {
        y0 = std::min(y0, fit.intercept + fit.estimate * x);
        y1 = std::max(y1, fit.intercept + fit.estimate * x);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
    x0 -= px;
    x1 += px;
    y0 -= py;
    y1 += py;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    using detail::svg_num;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(title) << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << detail::xml_escape(xlabel) << "</text>\n";
    s << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
      << detail::xml_escape(ylabel) << "</text>\n";
    for (double v : {x0 + px, x1 - px})
        s << "<text x=\"" << svg_num(X(v)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << svg_num(v) << "</text>\n";
    for (double v : {y0 + py, y1 - py})
        s << "<text x=\"" << L - 4 << "\" y=\"" << svg_num(Y(v)) << "\" text-anchor=\"end\" font-size=\"10\">" << svg_num(v) << "</text>\n";
    s << "<line x1=\"" << svg_num(X(x0)) << "\" y1=\"" << svg_num(Y(fit.intercept + fit.estimate * x0)) << "\" x2=\"" << svg_num(X(x1))
      << "\" y2=\"" << svg_num(Y(fit.intercept + fit.estimate * x1)) << "\" stroke=\"#c0392b\"/>\n";
    for (std::size_t i = 0; i < fit.xs.size(); ++i)
        s << "<circle cx=\"" << svg_num(X(fit.xs[i])) << "\" cy=\"" << svg_num(Y(fit.ys[i])) << "\" r=\"3\" fill=\"#2c3e50\"/>\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "slope %.4f +- %.4f, R2 %.5f", fit.estimate, fit.stderr_, fit.r2);
    s << "<text x=\"" << L + 8 << "\" y=\"" << T + 14 << "\" font-size=\"11\">" << buf << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot write " + path);
    f << text;
}

}  // namespace sbm
