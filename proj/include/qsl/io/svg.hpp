// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace qsl::io {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Marker {
    double at = 0.0;
    std::string label;
};

/// Minimal line plot: axes, polylines, a legend, optional vertical and
/// horizontal reference lines. No external assets.
struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
    std::vector<Marker> vmarks;
    std::vector<Marker> hmarks;
};

namespace detail {

inline std::string esc(const std::string& s) {
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

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double x = log ? std::log10(v) : v;
        return (x - a) / (b - a);
    }
};

inline Axis make_axis(const std::vector<double>& values, bool log) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (std::isfinite(v) && (!log || v > 0.0)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    if (hi == lo) {
        hi = log ? lo * 10.0 : lo + 1.0;
    }
    ax.lo = lo;
    ax.hi = hi;
    return ax;
}

// Tick positions: powers of ten on log axes, 1-2-5 steps otherwise. The
// axis ends are used when no round value falls inside.
inline std::vector<double> ticks(const Axis& ax) {
    std::vector<double> out;
    if (ax.log) {
        const int a = static_cast<int>(std::ceil(std::log10(ax.lo) - 1e-9));
        const int b = static_cast<int>(std::floor(std::log10(ax.hi) + 1e-9));
        const int stride = std::max(1, (b - a) / 6 + 1);
        for (int k = a; k <= b; k += stride) {
            out.push_back(std::pow(10.0, k));
        }
    } else {
        const double raw = (ax.hi - ax.lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = 10.0 * mag;
        for (double m : {1.0, 2.0, 5.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        const double eps = 1e-9 * step;
        for (double k = std::ceil((ax.lo - eps) / step); k * step <= ax.hi + eps; k += 1.0) {
            out.push_back(std::abs(k * step) < eps ? 0.0 : k * step);
        }
    }
    if (out.size() < 2) {
        out = {ax.lo, ax.hi};
    }
    return out;
}

} // namespace detail

inline std::string render_svg(const Plot& p) {
    constexpr double W = 720, H = 440, L = 70, R = 210, T = 40, B = 50;
    const double pw = W - L - R;
    const double ph = H - T - B;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : p.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    for (const auto& m : p.vmarks) {
        xs.push_back(m.at);
    }
    for (const auto& m : p.hmarks) {
        ys.push_back(m.at);
    }
    const auto ax = detail::make_axis(xs, p.log_x);
    const auto ay = detail::make_axis(ys, p.log_y);
    auto px = [&](double v) { return L + pw * ax.map(v); };
    auto py = [&](double v) { return T + ph * (1.0 - ay.map(v)); };
    auto ok = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0);
    };
    using detail::num;
    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + num(L + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::esc(p.title) + "</text>\n";
    o += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double xv : detail::ticks(ax)) {
        o += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(T + ph + 16) +
             "\" text-anchor=\"middle\">" + detail::tick(xv) + "</text>\n";
    }
    for (double yv : detail::ticks(ay)) {
        o += "<text x=\"" + num(L - 6) + "\" y=\"" + num(py(yv) + 4) +
             "\" text-anchor=\"end\">" + detail::tick(yv) + "</text>\n";
    }
    o += "<text x=\"" + num(L + pw / 2) + "\" y=\"" + num(H - 12) + "\" text-anchor=\"middle\">" +
         detail::esc(p.x_label) + "</text>\n";
    o += "<text x=\"16\" y=\"" + num(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(T + ph / 2) + ")\">" + detail::esc(p.y_label) + "</text>\n";

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    for (std::size_t s = 0; s < p.series.size(); ++s) {
        const auto& ser = p.series[s];
        const char* color = colors[s % 8];
        std::string pts;
        for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
            if (ok(ser.x[k], ser.y[k])) {
                pts += num(px(ser.x[k])) + "," + num(py(ser.y[k])) + " ";
            }
        }
        if (!pts.empty()) {
            pts.pop_back();
        }
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"" +
             (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts + "\"/>\n";
        const double ly = T + 14 + 18 * static_cast<double>(s);
        o += "<line x1=\"" + num(W - R + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - R + 34) +
             "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
             (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        o += "<text x=\"" + num(W - R + 40) + "\" y=\"" + num(ly + 4) + "\">" +
             detail::esc(ser.label) + "</text>\n";
    }
    for (std::size_t k = 0; k < p.vmarks.size(); ++k) {
        const auto& m = p.vmarks[k];
        if (!ok(m.at, ay.lo)) {
            continue;
        }
        o += "<line x1=\"" + num(px(m.at)) + "\" y1=\"" + num(T) + "\" x2=\"" + num(px(m.at)) +
             "\" y2=\"" + num(T + ph) + "\" stroke=\"#d62728\" stroke-dasharray=\"2 3\"/>\n";
        o += "<text x=\"" + num(px(m.at) + 3) + "\" y=\"" + num(T + 12 + 14 * static_cast<double>(k)) + "\" fill=\"#d62728\">" +
             detail::esc(m.label) + "</text>\n";
    }
    for (const auto& m : p.hmarks) {
        if (!ok(ax.lo, m.at)) {
            continue;
        }
        o += "<line x1=\"" + num(L) + "\" y1=\"" + num(py(m.at)) + "\" x2=\"" + num(L + pw) +
             "\" y2=\"" + num(py(m.at)) + "\" stroke=\"#7f7f7f\" stroke-dasharray=\"2 3\"/>\n";
        o += "<text x=\"" + num(L + pw - 3) + "\" y=\"" + num(py(m.at) - 4) +
             "\" text-anchor=\"end\" fill=\"#7f7f7f\">" + detail::esc(m.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

} // namespace qsl::io
