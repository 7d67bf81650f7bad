#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nullhorizon/core.hpp"
#include "nullhorizon/diagnostics.hpp"
#include "nullhorizon/evolution.hpp"

namespace nullhorizon {

struct Window {
    double lo = 0;
    double hi = 0;
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

struct PowerLawFit {
    double exponent = 0;
    double amplitude = 0;
    double std_error = 0;
    Window window;
    std::size_t samples = 0;
};

// Least squares line through (ln x, ln y) for samples with x in the window.
// Needs at least min_samples points (8 unless a caller asks otherwise).
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples, Window window,
                          std::size_t min_samples = 8);

// Slope of y = slope * x through the origin, with its standard error.
struct OriginFit {
    double slope = 0;
    double std_error = 0;
};
OriginFit fit_through_origin(std::span<const std::pair<double, double>> samples);

struct ProfileOptions {
    double r_fit_min = 0.02;    // radii below this are not resolved on a row; in units of M
    double r_fit_max = -1;      // negative means r0 / 4
    bool transported_mass = true;  // K from the transported mass instead of the pointwise one
};

// A cell on a v row with the transported mass carried along.
struct RowSample {
    CellState cell;
    double mass = 0;
};

// Stored columns interpolated onto the row v, in increasing U.
std::vector<RowSample> row_samples(const GridSheet& sheet, double v);

struct StationFit {
    double station = 0;
    double value = 0;  // N, beta or alpha, read off the fitted slope
    std::optional<PowerLawFit> fit;  // empty when the station was skipped
    std::string notice;
};

struct ExponentProfile {
    std::vector<StationFit> stations;
    OriginFit sigma_fit;           // N - 6 against (v/M)^-2p
    OriginFit rho_fit;             // N - 6 against (v/M)^-2q
    std::optional<PowerLawFit> trend;  // N - 6 against v/M across stations
};

// N(v) = -d ln K / d ln r along each station row.
ExponentProfile kretschmann_exponent_profile(const GridSheet& sheet, std::span<const double> v_stations,
                                             const ProfileOptions& opts = {});

// beta(v) from m ~ A r^-beta along each station row.
ExponentProfile mass_inflation_profile(const GridSheet& sheet, std::span<const double> v_stations,
                                       const ProfileOptions& opts = {});

// alpha(u) from r Omega^2 ~ r^alpha along the stored column nearest to each u station.
ExponentProfile omega_exponent_profile(const GridSheet& sheet, std::span<const double> u_stations,
                                       const ProfileOptions& opts = {});

struct LimitSample {
    double u = 0;
    double v = 0;      // v of r = 0 on this column
    double value = 0;  // extrapolated limit
    double gamma = 0;  // exponent of the fitted approach a + b r^gamma
    bool flagged = false;  // the two extrapolation levels disagree by more than 10%
};

struct GradientLimits {
    std::vector<LimitSample> f1;  // lim (r du r + M)
    std::vector<LimitSample> f2;  // lim (r dv r + M)
    double u1 = 0;                // reference column
    double v_sing_u1 = 0;
    std::optional<PowerLawFit> f1_decay;  // |f1| against |u - u1 - v_sing(u1)|
    std::optional<PowerLawFit> f2_decay;  // |f2| against v
};

// Limits at r = 0 of r du r + M and r dv r + M along every column that stopped short of v_max.
GradientLimits extract_f1_f2(const GridSheet& sheet, const ProfileOptions& opts = {});

// Fit y = a + b r^gamma with gamma in [0.01, 1]; returns (a, gamma).
std::pair<double, double> extrapolate_to_zero(std::span<const std::pair<double, double>> r_y);

// One bound checked over the sheet. lower and upper are the extreme ratios of
// the quantity to the bound's shape, i.e. the constants that make it hold.
struct AuditLine {
    std::string name;
    std::string region;
    std::size_t samples = 0;
    double lower = 0;       // NaN when the bound has no lower side
    double upper = 0;
    double scaled_min = 0;  // extremes of |quantity| (v/M)^q / M, for the scalar-field lines
    double scaled_max = 0;
    double prefactor = 0;   // lower / D1', NaN when not applicable
    bool positive = true;   // the quantity stayed strictly positive
};

struct AuditOptions {
    double v1 = 40;          // audits start at this v, in units of M
    double epsilon = 0.1;
    double sigma_exponent = 0;  // coefficient of (v/M)^-2p in r-power shapes
    double rho_exponent = 0;    // coefficient of (v/M)^-2q
};

struct AuditReport {
    std::vector<AuditLine> lines;
    double D1_prime = 0;  // (3 - 2 sqrt 2)(D1 - eps)
};

AuditReport audit_estimates(const GridSheet& sheet, const ModelParams& params, const AuditOptions& opts = {});

// Integral of e^{sign alpha x} f(x) over [a, b] by adaptive quadrature.
double exponential_integral(const std::function<double(double)>& f, double alpha, double a, double b, int sign);

// Constant C for which the decaying (sign -1) and growing (sign +1) bounds
// C alpha^-1 B e^{-alpha a} a^-p and C alpha^-1 B e^{alpha b} b^-p hold for every b > a.
// The growing side needs alpha a > p.
double exponential_integral_constant(double alpha, double p, double a, int sign);

// Verifies the reverse Gronwall implication on sampled psi, beta (trapezoid integrals).
struct GronwallCheck {
    bool premise = false;       // psi >= A + int beta psi at every sample
    bool conclusion = false;    // psi >= A exp(int beta) at every sample
    double worst_margin = 0;    // min over samples of psi / (A exp(int beta)) - 1
};
GronwallCheck verify_reverse_gronwall(std::span<const double> t, std::span<const double> psi,
                                      std::span<const double> beta, double A, double tol = 1e-12);

nlohmann::json to_json(const PowerLawFit& fit);
nlohmann::json to_json(const ExponentProfile& profile, const char* station_key);
nlohmann::json to_json(const GradientLimits& limits);
nlohmann::json to_json(const AuditReport& audit);
nlohmann::json to_json(const ModelParams& params);

}  // namespace nullhorizon
