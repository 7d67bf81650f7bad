#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nullhorizon {

// Thrown for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Inconsistent or out-of-class initial data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fewer samples than a fit or extraction needs.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite state produced during time marching.
class EvolutionError : public std::runtime_error {
public:
    EvolutionError(const std::string& what, double U, double v)
        : std::runtime_error(what + " at U=" + std::to_string(U) + " v=" + std::to_string(v)),
          U_(U), v_(v) {}
    double U() const noexcept { return U_; }
    double v() const noexcept { return v_; }

private:
    double U_;
    double v_;
};

struct ModelParams {
    double M = 1.0;
    double p = 2.0;     // upper decay exponent of the horizon tail
    double q = 2.0;     // lower decay exponent, p <= q < 3p-1
    double D1 = 0.0;
    double D2 = 0.0;
    double D3 = 0.0;
    double v0 = 10.0;
    double U0 = 0.3;
    double r_min = 1e-3;
    double r0 = 0.5;

    // Throws DomainError naming the first violated condition.
    void validate() const;
    bool vacuum() const noexcept { return D1 == 0.0 && D2 == 0.0 && D3 == 0.0; }
};

// Fields and first derivatives at one grid point, in the regular (U, v) gauge.
// sigma = ln of the regular lapse; w = r^2.
struct CellState {
    double u = 0, v = 0, U = 0;
    double w = 0, r = 0;
    double sigma = 0, phi = 0;
    double dU_w = 0, dv_w = 0;
    double dU_phi = 0, dv_phi = 0;
    double dU_sigma = 0, dv_sigma = 0;

    double omega2hat() const { return std::exp(sigma); }
    double dU_r() const { return dU_w / (2.0 * r); }
    double dv_r() const { return dv_w / (2.0 * r); }
};

struct DiagnosticRecord {
    double m = 0;
    double K = 0;
    double dvr = 0;
    bool trapped = false;
    double res_u = 0;
    double res_v = 0;
};

double u_from_U(double U, double M);
double U_from_u(double u, double M);

// Lapse in the singular outgoing coordinate: omega2_hat * dU/du.
double omega2_from_gauge(double omega2_hat, double U, double M);

// Fills u from U (u = -inf on the horizon) and r from w.
CellState with_coordinates(CellState s, double M);

}  // namespace nullhorizon
