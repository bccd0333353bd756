#include "qconv/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

constexpr double kW = 760.0, kH = 480.0;
constexpr double kL = 70.0, kR = 20.0, kT = 20.0, kB = 50.0;

double clamp_log(double v) { return std::log10(std::max(v, 1e-300)); }

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x0, double x1, double y0, double y1,
                     const std::string& style) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double fx = x1 > x0 ? (xs[i] - x0) / (x1 - x0) : 0.5;
        double fy = y1 > y0 ? (ys[i] - y0) / (y1 - y0) : 0.5;
        double px = kL + fx * (kW - kL - kR);
        double py = kH - kB - fy * (kH - kT - kB);
        pts += format_double(px) + "," + format_double(py) + " ";
    }
    return "<polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

} // namespace

void emit_convergence_plot(const std::vector<CsvTable>& tables,
                           const std::string& out_path) {
    if (tables.empty())
        throw SchemaMismatch("convergence plot needs at least one CSV");
    const auto& head = tables.front().header;
    const auto t_ref = tables.front().column("t");
    for (const auto& table : tables) {
        if (table.header != head)
            throw SchemaMismatch("CSV headers disagree");
        if (table.column("t") != t_ref)
            throw SchemaMismatch("CSV time axes disagree");
    }

    std::vector<std::vector<double>> curves;
    for (const auto& table : tables) {
        auto e = table.column("sup_error");
        for (double& v : e) v = clamp_log(v);
        curves.push_back(std::move(e));
    }
    // pointwise median across the per-seed curves
    std::vector<double> median(t_ref.size());
    for (std::size_t i = 0; i < t_ref.size(); ++i) {
        std::vector<double> col;
        col.reserve(curves.size());
        for (const auto& c : curves) col.push_back(c[i]);
        std::sort(col.begin(), col.end());
        std::size_t m = col.size() / 2;
        median[i] = col.size() % 2 == 1 ? col[m] : 0.5 * (col[m - 1] + col[m]);
    }

    double x0 = t_ref.front(), x1 = t_ref.back();
    double y0 = median.front(), y1 = y0;
    for (const auto& c : curves)
        for (double v : c) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (y1 - y0 < 1e-9) y1 = y0 + 1.0;

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write plot: " + out_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
        << "\" height=\"" << kH << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
        << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
        << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (kW / 2) << "\" y=\"" << (kH - 12)
        << "\" text-anchor=\"middle\" font-size=\"13\">t</text>\n";
    out << "<text x=\"16\" y=\"" << (kH / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (kH / 2) << ")\">log10 sup error</text>\n";
    for (const auto& c : curves)
        out << polyline(t_ref, c, x0, x1, y0, y1,
                        "stroke=\"#9ecae1\" stroke-width=\"1\"");
    out << polyline(t_ref, median, x0, x1, y0, y1,
                    "stroke=\"#08519c\" stroke-width=\"2\"");
    out << "</svg>\n";
}

void emit_convergence_plot_files(const std::vector<std::string>& csv_paths,
                                 const std::string& out_path) {
    std::vector<CsvTable> tables;
    tables.reserve(csv_paths.size());
    for (const auto& p : csv_paths) tables.push_back(read_csv(p));
    emit_convergence_plot(tables, out_path);
}

} // namespace qconv
