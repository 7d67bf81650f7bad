#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "nullhorizon/analysis.hpp"
#include "nullhorizon/core.hpp"
#include "nullhorizon/diagnostics.hpp"
#include "nullhorizon/evolution.hpp"
#include "nullhorizon/initial_data.hpp"

namespace nullhorizon {

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Step bounds. Lengths are plain lengths, the w bounds are lengths squared.
struct GridConfig {
    double v_max = 11.84;
    double base_dv = 0.25;
    double dv_min = 1e-12;
    double max_dw = 0.05;
    double max_dsigma = 0.02;
    double eta_u = 0.05;
    double du_max = 0.25;
    double du_min = 1e-9;
    double w_floor = 1e-2;
    double max_u_ratio = 0.5;
    double refine = 1;  // every step bound is divided by this
    std::size_t store_stride = 1;
    double focus_half_width = 0.05;  // focus windows sit on the stations
    double focus_w_floor = 4e-3;     // zero disables them
};

struct ProfileConfig {
    std::string kind = "power_law";  // power_law, two_term or table
    double amplitude = 0;
    double exponent = 2;
    double amplitude_fast = 0;
    double exponent_fast = 2;
    std::string table;  // two-column file for kind "table"
};

struct IngoingConfig {
    double rYphi = 0;
    double dUr0 = 0;
};

struct OutputConfig {
    bool slices = true;
    bool curves = true;
    bool rates = true;
    std::string out_dir = "out";
};

struct RunConfig {
    ModelParams params;
    GridConfig grid;
    ProfileConfig horizon;
    IngoingConfig ingoing;
    OutputConfig outputs;
    std::vector<double> stations;  // v rows for the exponent profiles
    std::vector<double> r_levels;  // extra r = const curves
};

// Missing keys keep their defaults; unknown keys and wrong types are errors.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig read_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Schwarzschild interior from bifurcate data, resolved for the vacuum regression.
RunConfig vacuum_config();
// Decaying scalar tail on the horizon, stations at v = 40, 80, 160, 320.
RunConfig benchmark_config();

// Every length multiplied by factor (M included), so dimensionless outputs are unchanged.
RunConfig scaled(const RunConfig& config, double factor);
// Same run with every step bound divided by factor.
RunConfig refined(const RunConfig& config, double factor);

StepControls step_controls(const RunConfig& config);
HorizonProfile horizon_profile(const RunConfig& config);
IngoingProfile ingoing_profile(const RunConfig& config);

struct RunData {
    HorizonData horizon;
    NullSlice slice;
    GridSheet sheet;
};

RunData execute(const RunConfig& config, const ColumnObserver& observer = {});

// Pointwise invariants checked on every computed column.
class InvariantMonitor {
public:
    explicit InvariantMonitor(double M) : M_(M) {}
    void operator()(const Column& column);

    double worst_mass_inequality() const noexcept { return worst_ineq_; }  // min K r^6 / 32 m^2 - 1
    double worst_du_mass() const noexcept { return worst_dum_; }           // min du m / M over trapped cells
    std::size_t trapped_cells() const noexcept { return trapped_; }
    std::size_t outgoing_violations() const noexcept { return dUr_bad_; }  // cells with dU r >= 0 off the horizon
    std::size_t cells() const noexcept { return cells_; }

private:
    double M_;
    double worst_ineq_ = std::numeric_limits<double>::infinity();
    double worst_dum_ = std::numeric_limits<double>::infinity();
    std::size_t trapped_ = 0, dUr_bad_ = 0, cells_ = 0;
    std::optional<Column> prev_;
};

struct VacuumErrors {
    double mass = 0;         // max |m - M| / M
    double kretschmann = 0;  // max |K r^6 / 48 M^2 - 1|
    ResidualSummary residuals;
    std::size_t cells = 0;   // cells with r >= r_floor
    std::size_t columns = 0;
};

// Errors against the exact interior over cells with r >= r_floor (every column, not just stored ones).
VacuumErrors vacuum_errors(const RunConfig& config, double r_floor, InvariantMonitor* monitor = nullptr);

struct ConvergenceStudy {
    std::vector<double> factors;
    std::vector<VacuumErrors> levels;
    std::vector<double> mass_order;  // one per doubling
    std::vector<double> kretschmann_order;
    std::vector<double> residual_order;  // from the l2 residual norm
};

ConvergenceStudy convergence_study(const RunConfig& config, int doublings, double r_floor);

struct RateReport {
    ExponentProfile kretschmann;
    ExponentProfile mass;
    GradientLimits limits;
    CurveSample apparent_horizon;
    std::optional<PowerLawFit> horizon_fit;  // |r_A - 2M| against v/M
    AuditReport audit;
    std::vector<std::string> notices;  // analyses skipped for lack of data
};

// How many analyses may run at once: NULLHORIZON_THREADS, else 1.
// Throws ConfigError on a value that is not a positive integer.
unsigned analysis_threads();

// f1/f2 or the horizon fit are skipped with a notice when the sheet has too few samples.
RateReport build_rate_report(const GridSheet& sheet, std::span<const double> stations,
                             const AuditOptions& audit = {}, unsigned threads = 1);

// Horizon fit on v >= v_lo.
std::optional<PowerLawFit> fit_horizon_approach(const CurveSample& ah, const GridSheet& sheet, double v_lo);

// Document with top-level keys params, stations, fits, audits.
nlohmann::json report_json(const RunConfig& config, const RateReport& report);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};
std::vector<Verdict> rate_verdicts(const RunConfig& config, const RateReport& report);

// U,u,v,r,w,sigma,omega2hat,phi,dUr,dvr,dUphi,dvphi,m,K,res_u,res_v at 17 significant digits.
void write_column_csv(std::ostream& out, const Column& column, double M);

}  // namespace nullhorizon
