#pragma once

namespace nullhorizon::detail {

struct HermiteValue {
    double value;
    double slope;
};

// Cubic Hermite on [0, h] at offset t, from end values and end slopes.
inline HermiteValue hermite(double y0, double d0, double y1, double d1, double h, double t) {
    const double s = t / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    const double value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    const double g00 = (6 * s2 - 6 * s) / h;
    const double g10 = 3 * s2 - 4 * s + 1;
    const double g01 = (-6 * s2 + 6 * s) / h;
    const double g11 = 3 * s2 - 2 * s;
    const double slope = g00 * y0 + g10 * d0 + g01 * y1 + g11 * d1;
    return {value, slope};
}

}  // namespace nullhorizon::detail
