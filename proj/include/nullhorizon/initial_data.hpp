#pragma once

#include <array>
#include <filesystem>
#include <utility>
#include <vector>

#include "nullhorizon/core.hpp"

namespace nullhorizon {

enum class ProfileKind { power_law, two_term, custom_table };

// Free data on the event horizon: r * dv(phi) as a function of v.
class HorizonProfile {
public:
    // D (v/M)^-q
    static HorizonProfile power_law(double D, double q, double M);
    // D_slow (v/M)^-p + D_fast (v/M)^-q
    static HorizonProfile two_term(double D_slow, double p, double D_fast, double q, double M);
    // Samples (v, r dv phi); v strictly increasing, values nonnegative.
    // Interpolated log-log, extended past the last sample by the power law
    // through the last two samples.
    static HorizonProfile table(std::vector<std::pair<double, double>> samples, double M);
    static HorizonProfile read_table(const std::filesystem::path& path, double M);

    ProfileKind kind() const noexcept { return kind_; }
    double operator()(double v) const;
    bool is_zero() const noexcept;
    const std::vector<std::pair<double, double>>& samples() const noexcept { return samples_; }

    // Largest relative violation of D1 (v/M)^-q <= value <= D2 (v/M)^-p on [a, b].
    double corridor_violation(const ModelParams& params, double a, double b) const;

private:
    ProfileKind kind_ = ProfileKind::power_law;
    double M_ = 1;
    double amp_[2] = {0, 0};
    double exp_[2] = {2, 2};
    std::vector<std::pair<double, double>> samples_;
    std::vector<double> lv_, ly_, slope_;  // log-log table with monotone cubic slopes
};

// Free data on the ingoing slice v = v0.
struct IngoingProfile {
    std::vector<std::pair<double, double>> samples;  // (U, r Y phi); one sample means constant
    double dUr0 = 0;                                  // dU r at the corner

    static IngoingProfile constant(double rYphi, double dUr0);
    double rYphi(double U) const;
    double sup_abs() const;
};

double gauge_on_H0(double v, const ModelParams& params);
double gauge_on_Hbar0(double U, double r_at, const ModelParams& params);

// Horizon column U = 0 sampled on v0 + j*dv.
struct HorizonData {
    std::vector<double> v;
    std::vector<double> gap;       // 2M - r
    std::vector<double> r;
    std::vector<double> dvr;
    std::vector<double> phi;
    std::vector<double> rdvphi;
    std::vector<double> r2Yphi;
    std::vector<double> dUr;
    std::vector<double> dUsigma;
    double anchor_v = 0;
    double anchor_residual = 0;

    std::size_t size() const noexcept { return v.size(); }
    CellState cell(std::size_t j, double M) const;
};

struct HorizonOptions {
    double dv_out = 0.25;       // largest spacing of the returned samples; shrunk to land on v_end
    double h_max = 0.01;        // integration substep bound, in units of M
    double anchor_margin = 40;  // anchor placed this far (in M) past v_end
    double anchor_tol = 1e-6;
};

// Integrates the horizon constraints: r and dv r backwards from the anchor,
// r^2 Y phi and dU sigma forwards from the corner. Returns samples on [v0, v_end].
HorizonData integrate_horizon_constraint(const HorizonProfile& profile, const IngoingProfile& ingoing,
                                         const ModelParams& params, double v_end,
                                         const HorizonOptions& opts = {});

// Ingoing slice v = v0 on [0, U0] with Hermite interpolation between mesh nodes.
class NullSlice {
public:
    NullSlice() = default;
    CellState at(double U) const;
    double mass_at(double U) const;  // Hawking mass transported along the slice
    double U_max() const noexcept { return U_.empty() ? 0 : U_.back(); }
    std::size_t nodes() const noexcept { return U_.size(); }

    static constexpr int kComponents = 7;  // r, P, phi, r dv r, dv sigma, r dv phi, mass

private:
    friend NullSlice build_ingoing_data(const IngoingProfile&, const HorizonData&, const ModelParams&, int);
    ModelParams params_;
    IngoingProfile profile_;
    std::vector<double> U_;
    std::vector<std::array<double, kComponents>> y_, dy_;
    std::array<double, kComponents> interp(double U, std::array<double, kComponents>* dy = nullptr) const;
};

NullSlice build_ingoing_data(const IngoingProfile& profile, const HorizonData& horizon,
                             const ModelParams& params, int intervals = 4096);

}  // namespace nullhorizon
