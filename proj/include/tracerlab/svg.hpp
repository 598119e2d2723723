#pragma once

#include <string>
#include <vector>

#include "tracerlab/manifest.hpp"

namespace trl {

// Self-contained SVG output: no scripts, no external references, so the
// files open anywhere and can live in a manifest digest.

struct SvgSeries {
    std::string name;
    std::vector<double> x, y;
    std::vector<double> err; // optional symmetric error bars, per point
    bool markers = true;
    bool dashed = false; // guide-curve styling, drawn without markers
};

struct SvgChartSpec {
    std::string title, x_label, y_label;
    bool log_x = false;
    // Optional horizontal acceptance band [band_lo, band_hi].
    double band_lo = 0.0, band_hi = 0.0;
    bool has_band = false;
    std::vector<SvgSeries> series;
};

std::string svg_line_chart(const SvgChartSpec& spec);

struct SvgBarSpec {
    std::string title, y_label;
    std::vector<std::string> labels;
    std::string name_a; // first bar of each pair
    std::vector<double> a;
    std::string name_b; // second bar, with error whiskers
    std::vector<double> b;
    std::vector<double> b_err;
    bool log_y = false;
};

std::string svg_bar_chart(const SvgBarSpec& spec);

// Render the plots a manifest's tables support (msd_ratio -> msd_ratio.svg,
// lambda_ladder -> lambda_vs_lnL.svg, lemma51 -> lemma51_bars.svg,
// rep_ledger -> rep_identity.svg). Tables that are absent are skipped with a
// warning on stderr. Returns digest records of the files written.
std::vector<OutputRecord> emit_plots(const RunManifest& manifest, const std::string& run_dir);

} // namespace trl
