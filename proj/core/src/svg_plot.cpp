#include "dbmf/svg_plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dbmf {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void polyline(std::ostream& out, const DensityCurve& curve, const SvgViewport& vp,
              const std::string& color) {
    out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        if (i) out << ' ';
        out << fmt(vp.px(curve.xs[i])) << ',' << fmt(vp.py(curve.ys[i]));
    }
    out << "\"/>\n";
}

}  // namespace

SvgViewport density_viewport(const DensityCurve& id_density, const DensityCurve& ood_density) {
    SvgViewport vp;
    vp.x_min = std::min(id_density.xs.front(), ood_density.xs.front());
    vp.x_max = std::max(id_density.xs.back(), ood_density.xs.back());
    double y_max = 0.0;
    for (double y : id_density.ys) y_max = std::max(y_max, y);
    for (double y : ood_density.ys) y_max = std::max(y_max, y);
    vp.y_max = y_max > 0.0 ? 1.05 * y_max : 1.0;
    return vp;
}

void write_density_svg(const DensityCurve& id_density, const DensityCurve& ood_density,
                       const std::string& path) {
    if (id_density.xs.empty() || ood_density.xs.empty())
        throw EmptyInput("write_density_svg: empty curve");
    const SvgViewport vp = density_viewport(id_density, ood_density);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << vp.width << "\" height=\""
        << vp.height << "\" viewBox=\"0 0 " << vp.width << ' ' << vp.height << "\">\n";
    out << "  <rect width=\"" << vp.width << "\" height=\"" << vp.height
        << "\" fill=\"white\"/>\n";

    // Axes.
    out << "  <line x1=\"" << fmt(vp.px(vp.x_min)) << "\" y1=\"" << fmt(vp.py(vp.y_min))
        << "\" x2=\"" << fmt(vp.px(vp.x_max)) << "\" y2=\"" << fmt(vp.py(vp.y_min))
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << fmt(vp.px(vp.x_min)) << "\" y1=\"" << fmt(vp.py(vp.y_min))
        << "\" x2=\"" << fmt(vp.px(vp.x_min)) << "\" y2=\"" << fmt(vp.py(vp.y_max))
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << vp.width / 2 << "\" y=\"" << vp.height - 10
        << "\" text-anchor=\"middle\" font-size=\"13\">OOD score</text>\n";
    out << "  <text x=\"15\" y=\"" << vp.height / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 15 "
        << vp.height / 2 << ")\">density</text>\n";

    polyline(out, id_density, vp, "#1f77b4");
    polyline(out, ood_density, vp, "#ff7f0e");

    // Legend.
    out << "  <rect x=\"" << vp.width - 130 << "\" y=\"28\" width=\"14\" height=\"4\" "
        << "fill=\"#1f77b4\"/>\n";
    out << "  <text x=\"" << vp.width - 110 << "\" y=\"34\" font-size=\"12\">ID</text>\n";
    out << "  <rect x=\"" << vp.width - 130 << "\" y=\"46\" width=\"14\" height=\"4\" "
        << "fill=\"#ff7f0e\"/>\n";
    out << "  <text x=\"" << vp.width - 110 << "\" y=\"52\" font-size=\"12\">OOD</text>\n";
    out << "</svg>\n";
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace dbmf
