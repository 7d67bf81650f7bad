#pragma once

#include <iosfwd>
#include <vector>

#include "nullhorizon/core.hpp"
#include "nullhorizon/evolution.hpp"

namespace nullhorizon {

// m = (r/2)(1 + 4 omega2hat^-1 dU r dv r)
double hawking_mass(const CellState& s);

// Full curvature contraction from first-order data; every second derivative
// is replaced through the field equations.
double kretschmann(const CellState& s);

// Same scalar from the mass and the scalar-field gradients:
// 48 m^2/r^6 - 64 m X/r^3 + 128 X^2 with X = omega2hat^-1 dU phi dv phi.
double kretschmann_from_mass(const CellState& s, double m);

// Y phi = dU phi / (-dU r).
double y_derivative(const CellState& s);

// ln(r omega2hat) and its mixed derivative, with the field-equation value of the latter.
struct RenormalizedLapse {
    double value = 0;
    double mixed = 0;
};
RenormalizedLapse renormalized_lapse(const CellState& s);

DiagnosticRecord diagnose(const CellState& s, double res_u = 0, double res_v = 0);

enum class CurveKind { apparent_horizon, r_level, singularity };

const char* to_string(CurveKind kind);

struct CurvePoint {
    double u = 0;
    double U = 0;
    double v = 0;
    double span = 0;  // extrapolation distance in v; zero for located points
};

struct CurveSample {
    CurveKind kind = CurveKind::apparent_horizon;
    double level = 0;  // r value of an r_level curve
    std::vector<CurvePoint> points;
};

// v rows on which row-wise locators sample the sheet: the horizon column's nodes.
std::vector<double> sheet_rows(const GridSheet& sheet);

// On each row, the smallest-U sign change of dv r from positive to nonpositive,
// placed by linear interpolation between the bracketing columns.
CurveSample locate_apparent_horizon(const GridSheet& sheet);

// On each row, the smallest U where r falls to the level.
CurveSample locate_r_level(const GridSheet& sheet, double level);

// v of r = 0 on every column that stopped short of v_max, by extending
// w linearly in v from the last cell.
CurveSample locate_singularity(const GridSheet& sheet);

// Columns: kind,u,U,v,level
void write_curve_csv(std::ostream& out, const CurveSample& curve);

}  // namespace nullhorizon
