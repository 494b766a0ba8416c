#include "hjbcli/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjbcli {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string nodal_csv(const hjb::Grid& grid, const std::vector<std::string>& names,
                      const std::vector<const hjb::GridFunction*>& columns) {
    std::ostringstream os;
    os << "node,x,y";
    for (const auto& n : names) os << ',' << n;
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const hjb::Point p = grid.coordinates(i);
        os << i << ',' << p[0] << ',' << (grid.dimension() == 2 ? p[1] : 0.0);
        for (const auto* c : columns) os << ',' << (*c)[i];
        os << '\n';
    }
    return os.str();
}

std::string polylines_csv(const hjb::Diagram& d) {
    std::ostringstream os;
    os << "branch,lambda,signed_sup_norm\n" << std::setprecision(17);
    for (const auto& pl : d.polylines) {
        for (const auto& [l, v] : pl.points) os << pl.branch_id << ',' << l << ',' << v << '\n';
    }
    return os.str();
}

std::string counts_csv(const hjb::Diagram& d) {
    std::ostringstream os;
    os << "lambda,count\n" << std::setprecision(17);
    for (const auto& c : d.counts) os << c.lambda << ',' << c.count << '\n';
    return os.str();
}

std::string diagram_csv(const hjb::Diagram& d) {
    std::ostringstream os;
    hjb::write_diagram_csv(os, d);
    return os.str();
}

namespace {

double squash(double v) { return std::copysign(std::log10(1.0 + std::abs(v)), v); }

}  // namespace

std::string diagram_svg(const hjb::Diagram& d, const std::vector<std::pair<std::string, double>>& marks) {
    const double W = 720, H = 420, L = 60, R = 20, T = 20, B = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = 0, ymax = 0;
    for (const auto& pl : d.polylines) {
        for (const auto& [l, v] : pl.points) {
            xmin = std::min(xmin, l);
            xmax = std::max(xmax, l);
            ymin = std::min(ymin, squash(v));
            ymax = std::max(ymax, squash(v));
        }
    }
    for (const auto& m : marks) {
        xmin = std::min(xmin, m.second);
        xmax = std::max(xmax, m.second);
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
    if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-12) ymin -= 1, ymax += 1;
    const double pad = 0.05 * (xmax - xmin);
    xmin -= pad;
    xmax += pad;
    auto X = [&](double l) { return L + (l - xmin) / (xmax - xmin) * (W - L - R); };
    auto Y = [&](double v) { return T + (ymax - v) / (ymax - ymin) * (H - T - B); };
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << Y(0) << "\" x2=\"" << W - R << "\" y2=\"" << Y(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (const auto& [name, l] : marks) {
        os << "<line x1=\"" << X(l) << "\" y1=\"" << T << "\" x2=\"" << X(l) << "\" y2=\"" << H - B
           << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
        os << "<text x=\"" << X(l) + 3 << "\" y=\"" << T + 12 << "\" font-size=\"12\">" << name << "</text>\n";
    }
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (const auto& pl : d.polylines) {
        if (pl.points.empty()) continue;
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colours[pl.branch_id % 6] << "\" points=\"";
        for (const auto& [l, v] : pl.points) os << X(l) << ',' << Y(squash(v)) << ' ';
        os << "\"/>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" font-size=\"13\">lambda</text>\n";
    os << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"13\" transform=\"rotate(-90 12 " << H / 2
       << ")\">sign(u) log10(1+|u|)</text>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << xmin << "</text>\n";
    os << "<text x=\"" << W - R - 50 << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << xmax << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace hjbcli
