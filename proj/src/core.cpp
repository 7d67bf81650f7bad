#include "nullhorizon/core.hpp"

#include <limits>

namespace nullhorizon {

void ModelParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw DomainError(std::string("invalid parameters: ") + what);
    };
    require(std::isfinite(M) && M > 0, "M must be positive");
    require(p > 1, "p must exceed 1");
    require(p <= q, "p must not exceed q");
    require(q < 3 * p - 1, "q must be below 3p-1");
    require(D1 >= 0 && D2 >= 0 && D3 >= 0, "amplitudes must be nonnegative");
    require(D1 <= D2, "D1 must not exceed D2");
    require(std::isfinite(v0), "v0 must be finite");
    require(U0 > 0, "U0 must be positive");
    require(r_min > 0, "r_min must be positive");
    require(r_min < r0, "r_min must be below r0");
    require(r0 < 2 * M, "r0 must be below 2M");
}

double u_from_U(double U, double M) {
    if (!(U > 0)) throw DomainError("u_from_U: U must be positive");
    return 4.0 * M * std::log(U / (4.0 * M));
}

double U_from_u(double u, double M) { return 4.0 * M * std::exp(u / (4.0 * M)); }

double omega2_from_gauge(double omega2_hat, double U, double M) {
    if (!(U > 0) || !(omega2_hat > 0)) throw DomainError("omega2_from_gauge: inputs must be positive");
    return omega2_hat * U / (4.0 * M);
}

CellState with_coordinates(CellState s, double M) {
    s.u = s.U > 0 ? u_from_U(s.U, M) : -std::numeric_limits<double>::infinity();
    s.r = std::sqrt(s.w);
    return s;
}

}  // namespace nullhorizon
