#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "rhale/baselines.hpp"
#include "rhale/estimator.hpp"
#include "rhale/evaluation.hpp"

namespace rhale::svg {

inline std::string escape(const std::string& s) {
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

inline std::string fmt(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    return s == "-0.00" || s == "-0.0" || s == "-0" ? s.substr(1) : s;
}

// Short tick label: 3 significant digits.
inline std::string label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

// Maps data coordinates onto a pixel rectangle (y grows downwards).
struct Panel {
    double left, top, width, height;
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return left + (x - xmin) / (xmax - xmin) * width; }
    double py(double y) const { return top + height - (y - ymin) / (ymax - ymin) * height; }
};

inline void pad(double& lo, double& hi, double frac = 0.05) {
    if (!(hi > lo)) {
        const double d = std::max(1.0, std::abs(lo)) * 0.5;
        lo -= d;
        hi += d;
        return;
    }
    const double d = (hi - lo) * frac;
    lo -= d;
    hi += d;
}

class Document {
public:
    Document(int width, int height) : width_(width), height_(height) {}

    void raw(const std::string& s) { body_ << s << '\n'; }

    void text(double x, double y, const std::string& s, const std::string& anchor = "middle",
              int size = 12) {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
              << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& style) {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\""
              << fmt(y2) << "\" style=\"" << style << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& style) {
        if (h < 0) {
            y += h;
            h = -h;
        }
        body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(std::max(w, 0.0))
              << "\" height=\"" << fmt(h) << "\" style=\"" << style << "\"/>\n";
    }

    void polyline(const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& style) {
        body_ << "<polyline fill=\"none\" style=\"" << style << "\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            body_ << (i ? " " : "") << fmt(p.px(xs[i])) << ',' << fmt(p.py(ys[i]));
        body_ << "\"/>\n";
    }

    // Closed band between two curves sharing xs.
    void band(const Panel& p, const std::vector<double>& xs, const std::vector<double>& lo,
              const std::vector<double>& hi, const std::string& style) {
        body_ << "<polygon style=\"" << style << "\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            body_ << (i ? " " : "") << fmt(p.px(xs[i])) << ',' << fmt(p.py(hi[i]));
        for (std::size_t i = xs.size(); i-- > 0;) body_ << ' ' << fmt(p.px(xs[i])) << ',' << fmt(p.py(lo[i]));
        body_ << "\"/>\n";
    }

    void axes(const Panel& p, const std::string& xlabel, const std::string& ylabel) {
        rect(p.left, p.top, p.width, p.height, "fill:none;stroke:#444;stroke-width:1");
        for (int t = 0; t <= 4; ++t) {
            const double fx = p.xmin + (p.xmax - p.xmin) * t / 4.0;
            const double fy = p.ymin + (p.ymax - p.ymin) * t / 4.0;
            line(p.px(fx), p.top + p.height, p.px(fx), p.top + p.height + 4, "stroke:#444");
            text(p.px(fx), p.top + p.height + 16, label(fx), "middle", 10);
            line(p.left - 4, p.py(fy), p.left, p.py(fy), "stroke:#444");
            text(p.left - 6, p.py(fy) + 3, label(fy), "end", 10);
        }
        if (p.ymin < 0 && p.ymax > 0)
            line(p.left, p.py(0), p.left + p.width, p.py(0), "stroke:#bbb;stroke-dasharray:3,3");
        text(p.left + p.width / 2, p.top + p.height + 32, xlabel);
        body_ << "<text x=\"" << fmt(p.left - 44) << "\" y=\"" << fmt(p.top + p.height / 2)
              << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(p.left - 44) << ' '
              << fmt(p.top + p.height / 2) << ")\">" << escape(ylabel) << "</text>\n";
    }

    std::string str() const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
            << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    int width_, height_;
    std::ostringstream body_;
};

// Top: accumulated effect with a +-STD band. Bottom: per-bin effect bars with
// +-sigma whiskers and a mirrored histogram of the local effects in each bin.
inline std::string effect_plot(const EffectResult& r, const std::string& feature_name) {
    Document doc(760, 620);
    const double xmin = r.partition.front(), xmax = r.partition.back();
    const auto xs = default_grid({xmin, xmax}, 201);
    std::vector<double> mu, lo, hi;
    for (double x : xs) {
        const double m = r.effect(x), s = r.deviation(x);
        mu.push_back(m);
        lo.push_back(m - s);
        hi.push_back(m + s);
    }
    double ylo = *std::min_element(lo.begin(), lo.end()), yhi = *std::max_element(hi.begin(), hi.end());
    pad(ylo, yhi);
    Panel top{80, 40, 640, 250, xmin, xmax, ylo, yhi};
    doc.text(380, 24, "RHALE: " + feature_name + " (" + std::to_string(r.partition.bins()) + " bins)", "middle", 14);
    doc.band(top, xs, lo, hi, "fill:#f4a261;fill-opacity:0.35;stroke:none");
    doc.polyline(top, xs, mu, "stroke:#1d3557;stroke-width:2");
    for (double z : r.partition.limits)
        doc.line(top.px(z), top.top, top.px(z), top.top + top.height, "stroke:#ccc;stroke-width:0.5");
    doc.axes(top, feature_name, "effect");

    double blo = 0.0, bhi = 0.0;
    for (const auto& b : r.bins.bins) {
        const double s = b.deviation_or_zero();
        blo = std::min({blo, b.effect - s, b.histogram.lo});
        bhi = std::max({bhi, b.effect + s, b.histogram.hi});
    }
    pad(blo, bhi);
    Panel bottom{80, 350, 640, 220, xmin, xmax, blo, bhi};
    for (const auto& b : r.bins.bins) {
        const double x0 = bottom.px(b.lo), x1 = bottom.px(b.hi), xc = (x0 + x1) / 2;
        const auto& h = b.histogram;
        std::size_t peak = 0;
        for (auto c : h.counts) peak = std::max(peak, c);
        if (peak > 0 && h.hi > h.lo) {
            const double half = (x1 - x0) * 0.45;
            const double step = (h.hi - h.lo) / static_cast<double>(h.counts.size());
            for (std::size_t k = 0; k < h.counts.size(); ++k) {
                if (!h.counts[k]) continue;
                const double w = half * static_cast<double>(h.counts[k]) / static_cast<double>(peak);
                const double ya = bottom.py(h.lo + step * static_cast<double>(k + 1));
                const double yb = bottom.py(h.lo + step * static_cast<double>(k));
                doc.rect(xc - w, ya, 2 * w, yb - ya, "fill:#a8dadc;fill-opacity:0.6;stroke:none");
            }
        }
        doc.rect(x0, bottom.py(0), x1 - x0, bottom.py(b.effect) - bottom.py(0),
                 "fill:#457b9d;fill-opacity:0.5;stroke:#1d3557;stroke-width:0.5");
        if (b.deviation) {
            const double s = *b.deviation;
            doc.line(xc, bottom.py(b.effect - s), xc, bottom.py(b.effect + s), "stroke:#e63946;stroke-width:1.5");
            const double cap = std::min(6.0, (x1 - x0) / 4);
            doc.line(xc - cap, bottom.py(b.effect - s), xc + cap, bottom.py(b.effect - s), "stroke:#e63946");
            doc.line(xc - cap, bottom.py(b.effect + s), xc + cap, bottom.py(b.effect + s), "stroke:#e63946");
        }
    }
    doc.axes(bottom, feature_name, "bin effect");
    return doc.str();
}

// ICE curves (thin, at most ~200 drawn) under the PDP (thick).
inline std::string pdp_ice_plot(const ICEBundle& ice, const GridCurve& pdp, const std::string& feature_name) {
    Document doc(760, 420);
    double ylo = *std::min_element(ice.curves.begin(), ice.curves.end());
    double yhi = *std::max_element(ice.curves.begin(), ice.curves.end());
    ylo = std::min(ylo, *std::min_element(pdp.values.begin(), pdp.values.end()));
    yhi = std::max(yhi, *std::max_element(pdp.values.begin(), pdp.values.end()));
    pad(ylo, yhi);
    Panel p{80, 40, 640, 300, ice.grid.front(), ice.grid.back(), ylo, yhi};
    doc.text(380, 24, std::string(ice.centered ? "c-ICE" : "PDP-ICE") + ": " + feature_name, "middle", 14);
    const std::size_t stride = std::max<std::size_t>(1, (ice.rows + 199) / 200);
    std::vector<double> row(ice.grid.size());
    for (std::size_t i = 0; i < ice.rows; i += stride) {
        for (std::size_t t = 0; t < ice.grid.size(); ++t) row[t] = ice.at(i, t);
        doc.polyline(p, ice.grid, row, "stroke:#888;stroke-opacity:0.3;stroke-width:0.7");
    }
    doc.polyline(p, pdp.grid, pdp.values, "stroke:#d62828;stroke-width:2.5");
    doc.axes(p, feature_name, "prediction");
    return doc.str();
}

// Mean metric per fixed K (markers joined by a line) against the automatic
// binning's mean as a horizontal reference.
inline std::string benchmark_plot(const BenchmarkReport& r, MetricSummary MethodSummary::*metric,
                                  const std::string& metric_name) {
    Document doc(640, 400);
    std::vector<double> ks, vals;
    for (const auto& s : r.summaries) {
        if (s.method != "fixed" || !std::isfinite((s.*metric).mean)) continue;
        ks.push_back(static_cast<double>(s.k));
        vals.push_back((s.*metric).mean);
    }
    const double automatic = (r.automatic().*metric).mean;
    double ylo = 0.0, yhi = std::isfinite(automatic) ? automatic : 0.0;
    for (double v : vals) yhi = std::max(yhi, v);
    pad(ylo, yhi);
    ylo = 0.0;
    double kmin = 1.0, kmax = ks.empty() ? 2.0 : std::max(2.0, ks.back());
    Panel p{80, 40, 520, 280, kmin, kmax, ylo, yhi};
    doc.text(340, 24, metric_name + " vs K (" + synthetic::to_string(r.spec.example) + ")", "middle", 14);
    if (!ks.empty()) doc.polyline(p, ks, vals, "stroke:#1d3557;stroke-width:1.5");
    for (std::size_t i = 0; i < ks.size(); ++i)
        doc.raw("<circle cx=\"" + fmt(p.px(ks[i])) + "\" cy=\"" + fmt(p.py(vals[i])) +
                "\" r=\"2.5\" fill=\"#1d3557\"/>");
    if (std::isfinite(automatic)) {
        doc.line(p.left, p.py(automatic), p.left + p.width, p.py(automatic),
                 "stroke:#e63946;stroke-width:2;stroke-dasharray:6,4");
        doc.text(p.left + p.width - 4, p.py(automatic) - 6, "auto " + label(automatic), "end", 11);
    }
    doc.axes(p, "K (fixed-size bins)", metric_name);
    return doc.str();
}

}  // namespace rhale::svg
