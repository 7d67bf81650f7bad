#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nullhorizon/run.hpp"
#include "nullhorizon/schwarzschild.hpp"

using namespace nullhorizon;
using nlohmann::json;

namespace {

RunConfig small_vacuum() {
    RunConfig c;
    c.params.U0 = 0.3;
    c.grid.v_max = 11.84;
    c.outputs.slices = false;
    return c;
}

RunConfig small_matter() {
    RunConfig c = benchmark_config();
    c.grid.v_max = 30;
    c.stations = {20, 25};
    return c;
}

std::string csv_of(const Column& col, double M) {
    std::ostringstream s;
    write_column_csv(s, col, M);
    return s.str();
}

struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (value) setenv("NULLHORIZON_THREADS", value, 1);
        else unsetenv("NULLHORIZON_THREADS");
    }
    ~EnvGuard() { unsetenv("NULLHORIZON_THREADS"); }
};

}  // namespace

TEST_CASE("config round trip is idempotent") {
    for (const RunConfig& c : {RunConfig{}, vacuum_config(), benchmark_config(), scaled(benchmark_config(), 2.0)}) {
        const json once = to_json(c);
        const json twice = to_json(parse_run_config(once));
        CHECK(once == twice);
    }
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(parse_run_config(json{{"grid", {{"vmax", 20}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"params", {{"M", "one"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"params", {{"p", 0.5}}}}), std::exception);
    CHECK_THROWS_AS(parse_run_config(json{{"stations", {5.0}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"profiles", {{"horizon", {{"kind", "spline"}}}}}}), ConfigError);
    const RunConfig c = parse_run_config(json{{"stations", {11.5, 10.5}}, {"grid", {{"v_max", 12}}}});
    CHECK(c.stations == std::vector<double>{10.5, 11.5});
    CHECK(c.grid.base_dv == GridConfig{}.base_dv);
}

TEST_CASE("malformed config files report the location") {
    const auto path = std::filesystem::temp_directory_path() / "nullhorizon_bad_config.json";
    {
        std::ofstream f(path);
        f << "{\n  \"params\": {\"M\": 1,,}\n}\n";
    }
    try {
        read_run_config(path);
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_run_config(path), ConfigError);
}

TEST_CASE("refined and scaled configs") {
    const RunConfig c = vacuum_config();
    const RunConfig r = refined(c, 2);
    CHECK(step_controls(r).base_dv == doctest::Approx(step_controls(c).base_dv / 2));
    const RunConfig s = scaled(c, 2);
    CHECK(s.params.M == 2.0);
    CHECK(s.params.v0 == 2 * c.params.v0);
    CHECK(s.grid.v_max == 2 * c.grid.v_max);
}

TEST_CASE("doubling M leaves dimensionless outputs unchanged") {
    const RunConfig c = small_vacuum();
    const VacuumErrors a = vacuum_errors(c, 0.05);
    const VacuumErrors b = vacuum_errors(scaled(c, 2), 0.1);
    CHECK(a.columns == b.columns);
    CHECK(a.cells == b.cells);
    CHECK(b.mass == doctest::Approx(a.mass).epsilon(1e-6));
    CHECK(b.kretschmann == doctest::Approx(a.kretschmann).epsilon(1e-6));
    CHECK(b.residuals.l2_res == doctest::Approx(a.residuals.l2_res).epsilon(1e-6));
}

TEST_CASE("invariant monitor on the exact interior") {
    Column col;
    col.U = 0.1;
    for (double v = 10; v < 11.7; v += 0.05) {
        col.cells.push_back(schwarzschild_cell(0.1, v, 1.0));
        col.mass.push_back(1.0);
    }
    InvariantMonitor mon(1.0);
    mon(col);
    Column next = col;
    next.U = 0.11;
    for (auto& c : next.cells) c = schwarzschild_cell(0.11, c.v, 1.0);
    mon(next);
    CHECK(mon.cells() == 2 * col.size());
    CHECK(mon.outgoing_violations() == 0);
    CHECK(mon.trapped_cells() == 2 * col.size());
    CHECK(mon.worst_mass_inequality() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(mon.worst_du_mass()) < 1e-12);
}

TEST_CASE("column CSV header, precision and determinism") {
    const RunConfig c = small_vacuum();
    const RunData a = execute(c);
    const RunData b = execute(c);
    REQUIRE(a.sheet.columns.size() == b.sheet.columns.size());
    const std::string text = csv_of(a.sheet.columns[3], 1.0);
    CHECK(text.rfind("U,u,v,r,w,sigma,omega2hat,phi,dUr,dvr,dUphi,dvphi,m,K,res_u,res_v\n", 0) == 0);
    for (std::size_t i = 0; i < a.sheet.columns.size(); i += 17)
        CHECK(csv_of(a.sheet.columns[i], 1.0) == csv_of(b.sheet.columns[i], 1.0));

    // 17 significant digits read back to the same double
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    const double v = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
    CHECK(v == a.sheet.columns[3].cells[1].v);
}

TEST_CASE("analysis thread count comes from the environment") {
    {
        EnvGuard g(nullptr);
        CHECK(analysis_threads() == 1);
    }
    {
        EnvGuard g("3");
        CHECK(analysis_threads() == 3);
    }
    {
        EnvGuard g("");  // empty counts as unset
        CHECK(analysis_threads() == 1);
    }
    for (const char* bad : {"0", "-2", "abc", "2x"}) {
        EnvGuard g(bad);
        CHECK_THROWS_AS(analysis_threads(), ConfigError);
    }
}

TEST_CASE("rate report does not depend on the thread count") {
    const RunConfig c = small_matter();
    const RunData run = execute(c);
    const RateReport one = build_rate_report(run.sheet, c.stations, {}, 1);
    const RateReport four = build_rate_report(run.sheet, c.stations, {}, 4);
    CHECK(report_json(c, one).dump() == report_json(c, four).dump());
    const json doc = report_json(c, one);
    for (const char* key : {"params", "stations", "fits", "audits"}) CHECK(doc.contains(key));
}
