#include "tracerlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

#include "tracerlab/config.hpp"

namespace trl {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kLeft = 66, kRight = 708, kTop = 40, kBottom = 430;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    std::vector<double> ticks;
    if (!(hi > lo)) return {lo};
    double raw = (hi - lo) / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= m * mag + 1e-300) {
            step = m * mag;
            break;
        }
    double first = std::ceil(lo / step - 1e-9) * step;
    for (double v = first; v <= hi + step * 1e-9; v += step) ticks.push_back(v);
    return ticks;
}

// Decade ticks for a log axis, with 2x/5x fill-in when few decades fit.
std::vector<double> log_ticks(double lo, double hi) {
    std::vector<double> ticks;
    int d0 = static_cast<int>(std::floor(std::log10(lo) - 1e-9));
    int d1 = static_cast<int>(std::ceil(std::log10(hi) + 1e-9));
    for (int d = d0; d <= d1; ++d)
        for (double m : {1.0, 2.0, 5.0}) {
            double v = m * std::pow(10.0, d);
            if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) ticks.push_back(v);
        }
    if (ticks.size() > 8) { // keep only decades when the span is wide
        std::vector<double> dec;
        for (double v : ticks) {
            double f = v / std::pow(10.0, std::floor(std::log10(v) + 1e-9));
            if (std::abs(f - 1.0) < 1e-6) dec.push_back(v);
        }
        if (dec.size() >= 3) return dec;
    }
    return ticks;
}

struct Frame {
    bool log_x = false;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;

    double tx(double v) const { return log_x ? std::log(v) : v; }
    double px(double v) const {
        return kLeft + (tx(v) - tx(xlo)) / (tx(xhi) - tx(xlo)) * (kRight - kLeft);
    }
    double py(double v) const { return kBottom - (v - ylo) / (yhi - ylo) * (kBottom - kTop); }
};

void chart_header(std::string& s, const std::string& title) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
         "viewBox=\"0 0 720 480\" font-family=\"Helvetica, Arial, sans-serif\">\n";
    s += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    s += "<text x=\"360\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222\">" +
         esc(title) + "</text>\n";
}

void axes_box(std::string& s) {
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kRight - kLeft) +
         "\" height=\"" + num(kBottom - kTop) + "\" fill=\"none\" stroke=\"#333\"/>\n";
}

} // namespace

std::string svg_line_chart(const SvgChartSpec& spec) {
    Frame f;
    f.log_x = spec.log_x;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& sr : spec.series)
        for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
            double x = sr.x[i], y = sr.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x && !(x > 0)) continue;
            double e = (i < sr.err.size() && std::isfinite(sr.err[i])) ? std::abs(sr.err[i]) : 0.0;
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y - e);
            yhi = std::max(yhi, y + e);
        }
    if (!std::isfinite(xlo) || !std::isfinite(ylo)) {
        xlo = 0; xhi = 1; ylo = 0; yhi = 1;
    }
    if (spec.has_band) {
        ylo = std::min(ylo, spec.band_lo);
        yhi = std::max(yhi, spec.band_hi);
    }
    if (xhi <= xlo) xhi = xlo + (spec.log_x ? xlo * 0.1 + 1e-12 : 1.0);
    if (yhi <= ylo) yhi = ylo + 1.0;
    double pad = 0.06 * (yhi - ylo);
    f.xlo = xlo;
    f.xhi = xhi;
    f.ylo = ylo - pad;
    f.yhi = yhi + pad;

    std::string s;
    chart_header(s, spec.title);

    if (spec.has_band) {
        double y1 = f.py(spec.band_hi), y2 = f.py(spec.band_lo);
        s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(y1) + "\" width=\"" +
             num(kRight - kLeft) + "\" height=\"" + num(y2 - y1) +
             "\" fill=\"#2ca02c\" fill-opacity=\"0.12\"/>\n";
    }

    std::vector<double> xticks = spec.log_x ? log_ticks(f.xlo, f.xhi) : nice_ticks(f.xlo, f.xhi);
    for (double v : xticks) {
        double x = f.px(v);
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" +
             num(kBottom) + "\" stroke=\"#ddd\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 16) +
             "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#333\">" + tick_label(v) +
             "</text>\n";
    }
    for (double v : nice_ticks(f.ylo, f.yhi)) {
        double y = f.py(v);
        s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kRight) +
             "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\" font-size=\"11\" fill=\"#333\">" + tick_label(v) +
             "</text>\n";
    }
    axes_box(s);
    s += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"" + num(kBottom + 36) +
         "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\">" + esc(spec.x_label) +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + num((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\" transform=\"rotate(-90 16 " +
         num((kTop + kBottom) / 2) + ")\">" + esc(spec.y_label) + "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& sr = spec.series[k];
        const char* color = kPalette[k % 6];
        std::string path;
        bool pen_down = false;
        for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
            double x = sr.x[i], y = sr.y[i];
            bool ok = std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0);
            if (!ok) {
                pen_down = false;
                continue;
            }
            path += (pen_down ? "L" : "M") + num(f.px(x)) + " " + num(f.py(y)) + " ";
            pen_down = true;
        }
        s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\"" +
             (sr.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
            double x = sr.x[i], y = sr.y[i];
            if (!std::isfinite(x) || !std::isfinite(y) || (spec.log_x && !(x > 0))) continue;
            double cx = f.px(x), cy = f.py(y);
            if (i < sr.err.size() && std::isfinite(sr.err[i]) && sr.err[i] > 0) {
                double e1 = f.py(y - sr.err[i]), e2 = f.py(y + sr.err[i]);
                s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(e1) + "\" x2=\"" + num(cx) +
                     "\" y2=\"" + num(e2) + "\" stroke=\"" + color + "\"/>\n";
                s += "<line x1=\"" + num(cx - 3) + "\" y1=\"" + num(e1) + "\" x2=\"" + num(cx + 3) +
                     "\" y2=\"" + num(e1) + "\" stroke=\"" + color + "\"/>\n";
                s += "<line x1=\"" + num(cx - 3) + "\" y1=\"" + num(e2) + "\" x2=\"" + num(cx + 3) +
                     "\" y2=\"" + num(e2) + "\" stroke=\"" + color + "\"/>\n";
            }
            if (sr.markers)
                s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"2.8\" fill=\"" +
                     color + "\"/>\n";
        }
        double ly = kTop + 16 + 16 * static_cast<double>(k);
        s += "<line x1=\"" + num(kRight - 170) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
             num(kRight - 148) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"" + (sr.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        s += "<text x=\"" + num(kRight - 142) + "\" y=\"" + num(ly) +
             "\" font-size=\"11\" fill=\"#222\">" + esc(sr.name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string svg_bar_chart(const SvgBarSpec& spec) {
    std::size_t n = spec.labels.size();
    double floor_v = std::numeric_limits<double>::infinity();
    double top_v = -std::numeric_limits<double>::infinity();
    auto consider = [&](double v) {
        if (!std::isfinite(v)) return;
        if (v > 0) floor_v = std::min(floor_v, v);
        top_v = std::max(top_v, v);
    };
    for (std::size_t i = 0; i < n; ++i) {
        consider(i < spec.a.size() ? spec.a[i] : 0.0);
        double b = i < spec.b.size() ? spec.b[i] : 0.0;
        double e = i < spec.b_err.size() ? spec.b_err[i] : 0.0;
        consider(b);
        consider(b + e);
    }
    if (!std::isfinite(floor_v)) floor_v = 1e-18;
    if (!(top_v > 0)) top_v = 1.0;

    const double bottom = 360; // leave room for slanted labels
    Frame f;
    if (spec.log_y) {
        f.ylo = std::log10(floor_v) - 0.5;
        f.yhi = std::log10(top_v) + 0.5;
    } else {
        f.ylo = 0.0;
        f.yhi = top_v * 1.1;
    }
    auto py = [&](double v) {
        double t = spec.log_y ? std::log10(std::max(v, floor_v / 3)) : v;
        return bottom - (t - f.ylo) / (f.yhi - f.ylo) * (bottom - kTop);
    };

    std::string s;
    chart_header(s, spec.title);
    if (spec.log_y) {
        int d0 = static_cast<int>(std::ceil(f.ylo));
        int d1 = static_cast<int>(std::floor(f.yhi));
        for (int d = d0; d <= d1; ++d) {
            double y = py(std::pow(10.0, d));
            s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kRight) +
                 "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
            s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
                 "\" text-anchor=\"end\" font-size=\"11\" fill=\"#333\">1e" + std::to_string(d) +
                 "</text>\n";
        }
    } else {
        for (double v : nice_ticks(f.ylo, f.yhi)) {
            double y = py(v);
            s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kRight) +
                 "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
            s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
                 "\" text-anchor=\"end\" font-size=\"11\" fill=\"#333\">" + tick_label(v) +
                 "</text>\n";
        }
    }
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kRight - kLeft) +
         "\" height=\"" + num(bottom - kTop) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    s += "<text x=\"16\" y=\"" + num((kTop + bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\" transform=\"rotate(-90 16 " +
         num((kTop + bottom) / 2) + ")\">" + esc(spec.y_label) + "</text>\n";

    double slot = (kRight - kLeft) / std::max<std::size_t>(n, 1);
    double bw = std::min(26.0, slot * 0.3);
    double base = py(spec.log_y ? floor_v / 3 : 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
        double va = i < spec.a.size() ? spec.a[i] : 0.0;
        double vb = i < spec.b.size() ? spec.b[i] : 0.0;
        double eb = i < spec.b_err.size() ? spec.b_err[i] : 0.0;
        double ya = py(va), yb = py(vb);
        s += "<rect x=\"" + num(cx - bw - 1) + "\" y=\"" + num(std::min(ya, base)) + "\" width=\"" +
             num(bw) + "\" height=\"" + num(std::abs(base - ya)) + "\" fill=\"" + kPalette[0] +
             "\"/>\n";
        s += "<rect x=\"" + num(cx + 1) + "\" y=\"" + num(std::min(yb, base)) + "\" width=\"" +
             num(bw) + "\" height=\"" + num(std::abs(base - yb)) + "\" fill=\"" + kPalette[1] +
             "\"/>\n";
        if (eb > 0 && vb > 0) {
            double xm = cx + 1 + bw / 2;
            double y1 = py(std::max(vb - eb, spec.log_y ? floor_v / 3 : vb - eb));
            double y2 = py(vb + eb);
            s += "<line x1=\"" + num(xm) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(xm) +
                 "\" y2=\"" + num(y2) + "\" stroke=\"#222\"/>\n";
            s += "<line x1=\"" + num(xm - 4) + "\" y1=\"" + num(y2) + "\" x2=\"" + num(xm + 4) +
                 "\" y2=\"" + num(y2) + "\" stroke=\"#222\"/>\n";
        }
        s += "<text x=\"" + num(cx) + "\" y=\"" + num(bottom + 14) +
             "\" font-size=\"10\" fill=\"#333\" text-anchor=\"end\" transform=\"rotate(-30 " +
             num(cx) + " " + num(bottom + 14) + ")\">" + esc(spec.labels[i]) + "</text>\n";
    }
    double ly = kTop + 16;
    s += "<rect x=\"" + num(kRight - 180) + "\" y=\"" + num(ly - 9) +
         "\" width=\"10\" height=\"10\" fill=\"" + kPalette[0] + "\"/>\n";
    s += "<text x=\"" + num(kRight - 166) + "\" y=\"" + num(ly) +
         "\" font-size=\"11\" fill=\"#222\">" + esc(spec.name_a) + "</text>\n";
    s += "<rect x=\"" + num(kRight - 180) + "\" y=\"" + num(ly + 7) +
         "\" width=\"10\" height=\"10\" fill=\"" + kPalette[1] + "\"/>\n";
    s += "<text x=\"" + num(kRight - 166) + "\" y=\"" + num(ly + 16) +
         "\" font-size=\"11\" fill=\"#222\">" + esc(spec.name_b) + "</text>\n";
    s += "</svg>\n";
    return s;
}

namespace {

std::vector<double> table_column(const nlohmann::json& table, const std::string& name) {
    const auto& cols = table.at("columns");
    std::size_t idx = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i].get<std::string>() == name) idx = i;
    if (idx == cols.size())
        throw ConfigError("table is missing column '" + name + "'");
    std::vector<double> out;
    for (const auto& row : table.at("rows")) out.push_back(row[idx].get<double>());
    return out;
}

} // namespace

std::vector<OutputRecord> emit_plots(const RunManifest& manifest, const std::string& run_dir) {
    std::vector<OutputRecord> written;
    auto have = [&](const char* t) { return manifest.tables.contains(t); };

    if (have("msd_ratio")) {
        const auto& t = manifest.tables["msd_ratio"];
        SvgChartSpec spec;
        spec.title = "Directional MSD against the superdiffusive normalization";
        spec.x_label = "t";
        spec.y_label = "ratio";
        spec.log_x = true;
        spec.has_band = true;
        spec.band_lo = manifest.metrics.value("ratio_gate_lo", 0.7);
        spec.band_hi = manifest.metrics.value("ratio_gate_hi", 1.4);
        SvgSeries good{"msd / (2t sqrt(1 + eps2/2 ln t))", table_column(t, "t"),
                       table_column(t, "ratio"), table_column(t, "ratio_se"), true, false};
        SvgSeries wrong{"mis-normalized: ln t in place of sqrt", table_column(t, "t"),
                        table_column(t, "wrong_ratio"), {}, true, true};
        spec.series = {good, wrong};
        written.push_back(write_output(run_dir, "msd_ratio.svg", svg_line_chart(spec)));
    } else {
        std::cerr << "plot: no msd_ratio table, skipping msd_ratio.svg\n";
    }

    if (have("lambda_ladder")) {
        const auto& t = manifest.tables["lambda_ladder"];
        SvgChartSpec spec;
        spec.title = "Effective diffusivity against the recursion envelope";
        spec.x_label = "1 + eps2 ln L";
        spec.y_label = "lambda^2";
        auto x = table_column(t, "x");
        auto hat = table_column(t, "lambda_hat");
        auto ci = table_column(t, "ci_half_width");
        std::vector<double> hat2(hat.size()), err(hat.size());
        for (std::size_t i = 0; i < hat.size(); ++i) {
            hat2[i] = hat[i] * hat[i];
            err[i] = 2.0 * hat[i] * ci[i];
        }
        SvgSeries meas{"simulated lambda^2", x, hat2, err, true, false};
        SvgSeries lo{"lower envelope", x, table_column(t, "env_lo"), {}, false, true};
        SvgSeries hi{"upper envelope", x, table_column(t, "env_hi"), {}, false, true};
        spec.series = {meas, lo, hi};
        written.push_back(write_output(run_dir, "lambda_vs_lnL.svg", svg_line_chart(spec)));
    } else {
        std::cerr << "plot: no lambda_ladder table, skipping lambda_vs_lnL.svg\n";
    }

    if (have("lemma51")) {
        const auto& t = manifest.tables["lemma51"];
        SvgBarSpec spec;
        spec.title = "Single-increment identities: quadrature vs Monte Carlo";
        spec.y_label = "value";
        spec.name_a = "quadrature";
        spec.name_b = "MC mean (3 s.e. whiskers)";
        spec.log_y = true;
        auto quad = table_column(t, "quadrature");
        auto mc = table_column(t, "mc_mean");
        auto se = table_column(t, "mc_se");
        const auto& labels = t.at("labels");
        for (std::size_t i = 0; i < quad.size(); ++i) {
            if (!(quad[i] > 0)) continue; // zero-target rows have no bar to draw
            spec.labels.push_back(labels[i].get<std::string>());
            spec.a.push_back(quad[i]);
            spec.b.push_back(mc[i]);
            spec.b_err.push_back(3.0 * se[i]);
        }
        written.push_back(write_output(run_dir, "lemma51_bars.svg", svg_bar_chart(spec)));
    }

    if (have("rep_ledger")) {
        const auto& t = manifest.tables["rep_ledger"];
        SvgChartSpec spec;
        spec.title = "Displacement energy vs corrector energy";
        spec.x_label = "t";
        spec.y_label = "energy";
        SvgSeries lhs{"(xi . (X_t - X_0))^2 / 2, ensemble mean", table_column(t, "t"),
                      table_column(t, "lhs"), {}, true, false};
        SvgSeries rhs{"t + v(t)^2/2 + int |grad v|^2", table_column(t, "t"),
                      table_column(t, "rhs"), {}, false, true};
        spec.series = {lhs, rhs};
        written.push_back(write_output(run_dir, "rep_identity.svg", svg_line_chart(spec)));
    }

    if (written.empty())
        std::cerr << "plot: manifest has no plottable tables\n";
    return written;
}

} // namespace trl
