#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "nullhorizon/core.hpp"
#include "nullhorizon/initial_data.hpp"

namespace nullhorizon {

// Mixed second derivatives d_U d_v of (w, sigma, phi).
struct CrossDerivatives {
    double w = 0;
    double sigma = 0;
    double phi = 0;
};

CrossDerivatives rhs_cross_derivatives(const CellState& s);

struct DiamondResult {
    CellState ne;
    bool converged = false;
    int iterations = 0;
};

// One characteristic rectangle: sw at (U, v), se at (U + dU, v), nw at (U, v + dv).
DiamondResult diamond_step(const CellState& sw, const CellState& se, const CellState& nw, double dU, double dv,
                           double M, int max_iter = 8);

enum class StopReason { reached_vmax, reached_rmin, step_underflow, upstream_end, resolution_limit };

const char* to_string(StopReason reason);

// A v-window where the column-step floor on w is lowered for resolving
// rows close to the singularity.
struct FocusWindow {
    double v_center = 0;
    double half_width = 0;
    double w_floor = 0;
};

struct StepControls {
    double v_max = 20;
    double base_dv = 0.25;      // spacing of the horizon column
    double dv_min = 1e-12;
    double max_dw = 0.05;       // bound on |dw| per v-step
    double max_dsigma = 0.02;   // bound on |dsigma| per v-step
    double eta_u = 0.05;        // bound on |dw|/w and |dsigma| per U-step
    double du_max = 0.25;       // largest step in the singular coordinate u
    double du_min = 1e-9;
    double w_floor = 1e-2;      // w below this does not tighten the U-step
    double max_u_ratio = 0.5;   // column stops once w changes by more than this fraction across one U-step
    std::vector<FocusWindow> focus;
    std::size_t max_columns = 2'000'000;
    std::size_t store_stride = 1;  // keep every k-th column outside focus windows
    std::size_t keep_head = 16;    // always keep this many leading columns

    // Every step bound divided by factor (factor 2 is one grid doubling).
    StepControls refined(double factor) const;
};

struct Column {
    std::size_t index = 0;  // position among all computed columns
    double U = 0;
    std::vector<CellState> cells;
    std::vector<double> mass;   // Hawking mass transported along the column
    std::vector<double> res_u;  // normalized Raychaudhuri defects; NaN where no stencil exists
    std::vector<double> res_v;
    StopReason stop = StopReason::reached_vmax;

    std::size_t size() const noexcept { return cells.size(); }
    double v_end() const { return cells.back().v; }
    double local_dv(std::size_t j) const { return j == 0 ? 0 : cells[j].v - cells[j - 1].v; }
};

struct GridSheet {
    ModelParams params;
    StepControls controls;
    std::vector<Column> columns;  // stored subset, increasing U
    std::size_t columns_computed = 0;
    std::size_t cells_computed = 0;
    std::size_t rejected_steps = 0;

    std::vector<double> U_nodes() const;
};

// Sees every finished column, including those the storage stride drops.
using ColumnObserver = std::function<void(const Column&)>;

GridSheet evolve(const NullSlice& ingoing, const HorizonData& horizon, const ModelParams& params,
                 const StepControls& controls, const ColumnObserver& observer = {});

// State of a column at an arbitrary v inside its range, by cubic Hermite
// interpolation that uses the field equations for the mixed derivatives.
CellState interpolate_column(const Column& column, double v, double M);

// Transported mass at v, with its transport rate as the Hermite slope.
double interpolate_mass(const Column& column, double v);

struct ResidualSummary {
    double max_res_u = 0;
    double max_res_v = 0;
    double l2_res = 0;
    std::size_t samples = 0;
    double order_estimate = std::numeric_limits<double>::quiet_NaN();  // set only from paired runs
};

// Residual norms over stored cells with r >= r_floor.
ResidualSummary summarize_residuals(const GridSheet& sheet, double r_floor);

// Observed order from errors at successive doublings.
double convergence_order(double coarse_error, double fine_error, double ratio = 2.0);

// Copy of coarse with order_estimate filled from the paired finer run.
ResidualSummary with_order(ResidualSummary coarse, const ResidualSummary& fine, double ratio = 2.0);

}  // namespace nullhorizon
