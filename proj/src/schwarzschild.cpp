#include "nullhorizon/schwarzschild.hpp"

namespace nullhorizon {

CellState schwarzschild_cell(double U, double v, double M) {
    if (U < 0) throw DomainError("schwarzschild_cell: U must be nonnegative");
    double r = 2 * M;
    if (U > 0) {
        const double u = u_from_U(U, M);
        r = solve_rS(u, v, M).rS;
    }
    const double om2hat = schwarzschild_omega2hat(r, v, M);
    const double dUr = -om2hat / 2;
    const double dvr = -om2hat * U / (8 * M);
    const double k = 1 / r + 1 / (2 * M);

    CellState s;
    s.U = U;
    s.v = v;
    s.w = r * r;
    s.sigma = std::log(om2hat);
    s.phi = 0;
    s.dU_w = 2 * r * dUr;
    s.dv_w = 2 * r * dvr;
    s.dU_sigma = -dUr * k;
    s.dv_sigma = -dvr * k + 1 / (4 * M);
    return with_coordinates(s, M);
}

}  // namespace nullhorizon
