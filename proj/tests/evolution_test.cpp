#include "doctest.h"

#include <cmath>

#include "nullhorizon/diagnostics.hpp"
#include "nullhorizon/evolution.hpp"
#include "nullhorizon/run.hpp"
#include "nullhorizon/schwarzschild.hpp"

using namespace nullhorizon;

namespace {

CellState flat_cell(double U, double v) {
    CellState s;
    s.U = U;
    s.v = v;
    s.r = (v - U) / 2;
    s.w = s.r * s.r;
    s.dU_w = -s.r;
    s.dv_w = s.r;
    return s;
}

double diamond_w_error(double U, double v, double h) {
    const double M = 1.0;
    const auto r = diamond_step(schwarzschild_cell(U, v, M), schwarzschild_cell(U + h, v, M),
                                schwarzschild_cell(U, v + h, M), h, h, M);
    REQUIRE(r.converged);
    return std::abs(r.ne.w - schwarzschild_cell(U + h, v + h, M).w);
}

RunConfig short_matter_run() {
    RunConfig c = benchmark_config();
    c.grid.v_max = 30;
    c.grid.store_stride = 1;
    c.stations.clear();
    return c;
}

}  // namespace

TEST_CASE("cross derivatives") {
    CellState s = schwarzschild_cell(0.1, 11.0, 1.0);
    s.sigma = std::log(2.0);
    for (double w : {0.01, 1.0, 3.5}) {
        s.w = w;
        s.r = std::sqrt(w);
        CHECK(rhs_cross_derivatives(s).w == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(rhs_cross_derivatives(s).phi == 0.0);
    }
    const auto flat = rhs_cross_derivatives(flat_cell(0.2, 3.0));
    CHECK(flat.sigma == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("diamond has third-order local error on the exact interior") {
    for (auto [U, v] : {std::pair{0.05, 11.0}, {0.1, 11.5}}) {
        const double e1 = diamond_w_error(U, v, 1e-2);
        const double e2 = diamond_w_error(U, v, 5e-3);
        const double e3 = diamond_w_error(U, v, 2.5e-3);
        CAPTURE(U);
        CHECK(std::log2(e1 / e2) > 2.7);
        CHECK(std::log2(e2 / e3) > 2.7);
    }
    CHECK(diamond_w_error(0.05, 11.0, 1e-3) < 1e-8);
}

TEST_CASE("diamond special cases") {
    const CellState sw = flat_cell(0.2, 3.0), se = flat_cell(0.3, 3.0), nw = flat_cell(0.2, 3.1);
    const auto r = diamond_step(sw, se, nw, 0.1, 0.1, 1.0);
    // w is the four-corner quadrature of the constant source; the lapse at the
    // new corner comes from the ln(r omega2hat) update and is only accurate to h^4
    const double lapse_ne = std::exp(r.ne.sigma);
    CHECK(r.ne.w == doctest::Approx(nw.w + se.w - sw.w - 0.1 * 0.1 / 8 * (3 + lapse_ne)).epsilon(1e-15));
    CHECK(std::abs(lapse_ne - 1) < 1e-5);
    CHECK(r.ne.w == doctest::Approx(flat_cell(0.3, 3.1).w).epsilon(1e-8));

    const CellState a = schwarzschild_cell(0.1, 11.0, 1.0);
    const CellState b = schwarzschild_cell(0.11, 11.0, 1.0);
    const auto z = diamond_step(a, b, a, 0.01, 0.0, 1.0);
    CHECK(z.ne.w == a.w);
    CHECK(z.ne.sigma == a.sigma);
}

TEST_CASE("column interpolation is fourth order on the exact interior") {
    auto make = [](double h) {
        Column c;
        c.U = 0.1;
        for (double v = 10.0; v <= 11.0 + 1e-12; v += h) {
            c.cells.push_back(schwarzschild_cell(0.1, v, 1.0));
            c.mass.push_back(1.0);
        }
        return c;
    };
    auto err = [&](double h) {
        const Column c = make(h);
        const double v = 10.0 + 2.5 * h;
        return std::abs(interpolate_column(c, v, 1.0).w - schwarzschild_cell(0.1, v, 1.0).w);
    };
    CHECK(std::log2(err(0.1) / err(0.05)) > 3.5);
    CHECK(interpolate_mass(make(0.1), 10.37) == doctest::Approx(1.0));
}

TEST_CASE("convergence order helpers") {
    CHECK(convergence_order(4e-4, 1e-4) == doctest::Approx(2.0));
    CHECK(convergence_order(9e-4, 1e-4, 3.0) == doctest::Approx(2.0));
    ResidualSummary coarse, fine;
    coarse.l2_res = 8e-3;
    fine.l2_res = 1e-3;
    CHECK(with_order(coarse, fine).order_estimate == doctest::Approx(3.0));
    CHECK(std::isnan(fine.order_estimate));
}

TEST_CASE("stop reasons have names") {
    CHECK(std::string(to_string(StopReason::reached_rmin)) == "reached_rmin");
    CHECK(std::string(to_string(StopReason::reached_vmax)) == "reached_vmax");
}

TEST_CASE("matter evolution keeps dU r negative and the mass monotone where trapped") {
    const RunConfig cfg = short_matter_run();
    InvariantMonitor monitor(cfg.params.M);
    const RunData run = execute(cfg, std::ref(monitor));
    REQUIRE(run.sheet.columns.size() > 10);
    CHECK(monitor.outgoing_violations() == 0);
    CHECK(monitor.trapped_cells() > 0);
    CHECK(monitor.worst_mass_inequality() >= -1e-10);

    // transported mass at fixed v never decreases toward larger U inside the trapped region
    std::size_t compared = 0, decreasing = 0;
    for (double v : {12.0, 16.0, 24.0}) {
        const auto row = row_samples(run.sheet, v);
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (!diagnose(row[i].cell).trapped || !diagnose(row[i - 1].cell).trapped) continue;
            ++compared;
            if (row[i].mass < row[i - 1].mass * (1 - 1e-9)) ++decreasing;
        }
    }
    CHECK(compared > 100);
    CHECK(decreasing == 0);
}

TEST_CASE("vacuum evolution against the exact mass") {
    RunConfig cfg;
    cfg.params.U0 = 0.3;
    cfg.grid.v_max = 11.84;
    cfg.outputs.slices = false;
    const VacuumErrors e = vacuum_errors(cfg, 0.05);
    CHECK(e.columns > 10);
    CHECK(e.mass < 1e-3);
    CHECK(e.kretschmann < 1e-2);
    CHECK(e.residuals.l2_res < 1e-2);
}
