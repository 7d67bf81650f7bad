#include "nullhorizon/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace nullhorizon {

namespace {

void require_positive_w(const CellState& s, const char* who) {
    if (!(s.w > 0)) throw DomainError(std::string(who) + ": w must be positive");
}

double point_u(double U, double M) {
    return U > 0 ? u_from_U(U, M) : -std::numeric_limits<double>::infinity();
}

}  // namespace

double hawking_mass(const CellState& s) {
    require_positive_w(s, "hawking_mass");
    return 0.5 * s.r * (1 + 4 * std::exp(-s.sigma) * s.dU_r() * s.dv_r());
}

double kretschmann(const CellState& s) {
    require_positive_w(s, "kretschmann");
    const double r = s.r;
    const double r2 = s.w;
    const double r4 = r2 * r2;
    const double om2 = std::exp(s.sigma);  // Omega^2
    const double om4 = om2 * om2;
    const double om = std::sqrt(om2);
    const double rU = s.dU_r();
    const double rv = s.dv_r();
    const double lU = 0.5 * s.dU_sigma;  // d log Omega
    const double lv = 0.5 * s.dv_sigma;

    const double rUv = (-om2 / 2 - 2 * rU * rv) / (2 * r);
    const double rUU = rU * s.dU_sigma - r * s.dU_phi * s.dU_phi;
    const double rvv = rv * s.dv_sigma - r * s.dv_phi * s.dv_phi;
    const double sigma_Uv = rhs_cross_derivatives(s).sigma;
    const double omUv = om * (lU * lv + 0.5 * sigma_Uv);

    double K = 4 / (r2 * om4) * (16 * rUv * rUv + 16 * rUU * rvv);
    K += 4 / (r2 * om4) * (-32 * rUU * rv * lv - 32 * rvv * rU * lU);
    K += 4 / (r4 * om4) * (16 * rv * rv * rU * rU + 64 * rv * r2 * rU * lU * lv);
    K += 32 / (r4 * om2) * rv * rU;
    K += 4 / (om4 * om4) * (16 * omUv * omUv * om2 - 32 * omUv * om * om2 * lv * lU);
    K += 64 / om4 * lv * lv * lU * lU;
    K += 4 / r4;
    return K;
}

double kretschmann_from_mass(const CellState& s, double m) {
    require_positive_w(s, "kretschmann_from_mass");
    const double r3 = s.w * s.r;
    const double X = std::exp(-s.sigma) * s.dU_phi * s.dv_phi;
    return 48 * m * m / (r3 * r3) - 64 * m * X / r3 + 128 * X * X;
}

double y_derivative(const CellState& s) {
    require_positive_w(s, "y_derivative");
    const double dUr = s.dU_r();
    if (!(dUr < 0)) throw DomainError("y_derivative: dU r must be negative");
    return s.dU_phi / -dUr;
}

RenormalizedLapse renormalized_lapse(const CellState& s) {
    require_positive_w(s, "renormalized_lapse");
    return {s.sigma + 0.5 * std::log(s.w), std::exp(s.sigma) / (4 * s.w) - 2 * s.dU_phi * s.dv_phi};
}

DiagnosticRecord diagnose(const CellState& s, double res_u, double res_v) {
    DiagnosticRecord d;
    d.m = hawking_mass(s);
    d.K = kretschmann(s);
    d.dvr = s.dv_r();
    d.trapped = s.dU_r() < 0 && s.dv_r() < 0;
    d.res_u = res_u;
    d.res_v = res_v;
    return d;
}

const char* to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::apparent_horizon: return "apparent_horizon";
        case CurveKind::r_level: return "r_level";
        case CurveKind::singularity: return "singularity";
    }
    return "unknown";
}

std::vector<double> sheet_rows(const GridSheet& sheet) {
    std::vector<double> rows;
    if (sheet.columns.empty()) return rows;
    for (const auto& c : sheet.columns.front().cells) rows.push_back(c.v);
    return rows;
}

namespace {

// First crossing of f from positive to nonpositive across stored columns on row v.
template <typename F>
bool first_crossing(const GridSheet& sheet, double v, F&& f, CurvePoint& hit) {
    const double M = sheet.params.M;
    bool have_prev = false;
    double U_prev = 0, f_prev = 0;
    for (const auto& col : sheet.columns) {
        if (v < col.cells.front().v || v > col.v_end()) continue;
        const double val = f(interpolate_column(col, v, M));
        if (have_prev && f_prev > 0 && val <= 0) {
            const double t = f_prev / (f_prev - val);
            hit.U = U_prev + t * (col.U - U_prev);
            hit.v = v;
            hit.u = point_u(hit.U, M);
            return true;
        }
        have_prev = true;
        U_prev = col.U;
        f_prev = val;
    }
    return false;
}

}  // namespace

CurveSample locate_apparent_horizon(const GridSheet& sheet) {
    CurveSample curve;
    curve.kind = CurveKind::apparent_horizon;
    for (double v : sheet_rows(sheet)) {
        CurvePoint p;
        if (first_crossing(sheet, v, [](const CellState& s) { return s.dv_w; }, p)) curve.points.push_back(p);
    }
    return curve;
}

CurveSample locate_r_level(const GridSheet& sheet, double level) {
    if (!(level > 0)) throw DomainError("locate_r_level: level must be positive");
    CurveSample curve;
    curve.kind = CurveKind::r_level;
    curve.level = level;
    for (double v : sheet_rows(sheet)) {
        CurvePoint p;
        if (first_crossing(sheet, v, [level](const CellState& s) { return s.r - level; }, p))
            curve.points.push_back(p);
    }
    return curve;
}

CurveSample locate_singularity(const GridSheet& sheet) {
    CurveSample curve;
    curve.kind = CurveKind::singularity;
    const double M = sheet.params.M;
    for (const auto& col : sheet.columns) {
        if (col.stop != StopReason::reached_rmin && col.stop != StopReason::resolution_limit) continue;
        const CellState& s = col.cells.back();
        if (!(s.dv_w < 0)) continue;
        CurvePoint p;
        p.U = col.U;
        p.u = point_u(col.U, M);
        p.span = s.w / -s.dv_w;
        p.v = s.v + p.span;
        curve.points.push_back(p);
    }
    return curve;
}

void write_curve_csv(std::ostream& out, const CurveSample& curve) {
    const auto old_precision = out.precision(17);
    out << "kind,u,U,v,level\n";
    for (const auto& p : curve.points)
        out << to_string(curve.kind) << ',' << p.u << ',' << p.U << ',' << p.v << ',' << curve.level << '\n';
    out.precision(old_precision);
}

}  // namespace nullhorizon
