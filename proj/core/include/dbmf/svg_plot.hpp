#pragma once

#include <string>

#include "dbmf/numerics.hpp"

namespace dbmf {

/// Fixed viewport for the density plot; exposed so consumers can map data
/// coordinates to pixels.
struct SvgViewport {
    double width = 640.0;
    double height = 400.0;
    double margin_left = 60.0;
    double margin_right = 20.0;
    double margin_top = 20.0;
    double margin_bottom = 50.0;
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double px(double x) const {
        return margin_left + (x - x_min) / (x_max - x_min) * (width - margin_left - margin_right);
    }
    double py(double y) const {
        return height - margin_bottom -
               (y - y_min) / (y_max - y_min) * (height - margin_top - margin_bottom);
    }
};

/// Viewport spanning both curves' data ranges.
SvgViewport density_viewport(const DensityCurve& id_density, const DensityCurve& ood_density);

/// Two polylines (ID blue, OOD orange) with axes and a legend.
void write_density_svg(const DensityCurve& id_density, const DensityCurve& ood_density,
                       const std::string& path);

}  // namespace dbmf
