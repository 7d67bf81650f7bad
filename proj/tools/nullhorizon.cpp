// Batch driver: vacuum-regression, evolve, rates, audit.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nullhorizon/run.hpp"

namespace fs = std::filesystem;
using namespace nullhorizon;

namespace {

enum Exit { ok = 0, threshold_miss = 1, usage = 2, io = 3, evolution = 4, missing_data = 5 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string out;
    std::string stations;
    bool quiet = false;
};

std::vector<double> parse_stations(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("--stations: cannot read \"" + item + "\"");
        v.push_back(x);
    }
    if (v.empty()) throw ConfigError("--stations: empty list");
    return v;
}

RunConfig load(const Options& o, RunConfig fallback) {
    RunConfig c = o.config.empty() ? std::move(fallback) : read_run_config(o.config);
    if (!o.out.empty()) c.outputs.out_dir = o.out;
    if (!o.stations.empty()) {
        c.stations = parse_stations(o.stations);
        // revalidate through the parser
        c = parse_run_config(to_json(c));
    }
    return c;
}

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
}

int vacuum_regression(const Options& o) {
    const RunConfig c = load(o, vacuum_config());
    if (!c.params.vacuum()) {
        std::cerr << "vacuum-regression: D1, D2 and D3 must all be zero\n";
        return usage;
    }
    const double r_floor = 0.05 * c.params.M;
    const VacuumErrors fine = vacuum_errors(c, r_floor);
    const VacuumErrors coarse = vacuum_errors(refined(c, 0.5), r_floor);
    const double order = convergence_order(coarse.mass, fine.mass);
    const double res_order = convergence_order(coarse.residuals.l2_res, fine.residuals.l2_res);
    const bool pass = fine.mass <= 1e-5 && fine.kretschmann <= 1e-4 && std::abs(order - 2) <= 0.3;
    if (!o.quiet) {
        std::printf("columns %zu, cells with r >= %.3g: %zu\n", fine.columns, r_floor, fine.cells);
        std::printf("max |m-M|/M          %.3e  (limit 1e-5)\n", fine.mass);
        std::printf("max |K r^6/48M^2-1|  %.3e  (limit 1e-4)\n", fine.kretschmann);
        std::printf("residuals max %.3e / %.3e, l2 %.3e\n", fine.residuals.max_res_u, fine.residuals.max_res_v,
                    fine.residuals.l2_res);
        std::printf("convergence order    %.3f (mass), %.3f (residual l2) from the half-resolution run\n", order,
                    res_order);
        std::printf("%s\n", pass ? "PASS" : "FAIL");
    }
    return pass ? ok : threshold_miss;
}

void print_verdicts(const std::vector<Verdict>& verdicts) {
    for (const auto& v : verdicts)
        std::printf("%s  %s%s%s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.detail.empty() ? "" : ": ",
                    v.detail.c_str());
}

std::string curve_text(const CurveSample& c) {
    std::ostringstream s;
    write_curve_csv(s, c);
    return s.str();
}

int evolve_cmd(const Options& o) {
    const RunConfig c = load(o, benchmark_config());
    const unsigned threads = analysis_threads();
    const fs::path out = ensure_dir(c.outputs.out_dir);
    const RunData run = execute(c);
    const GridSheet& sheet = run.sheet;
    const double M = c.params.M;
    if (c.outputs.slices) {
        const fs::path dir = ensure_dir(out / "slices");
        for (const auto& col : sheet.columns) {
            std::ostringstream s;
            write_column_csv(s, col, M);
            char name[40];
            std::snprintf(name, sizeof name, "column_%08zu.csv", col.index);
            write_file(dir / name, s.str());
        }
    }
    if (c.outputs.curves) {
        const fs::path dir = ensure_dir(out / "curves");
        write_file(dir / "apparent_horizon.csv", curve_text(locate_apparent_horizon(sheet)));
        write_file(dir / "singularity.csv", curve_text(locate_singularity(sheet)));
        for (std::size_t i = 0; i < c.r_levels.size(); ++i) {
            char name[40];
            std::snprintf(name, sizeof name, "r_level_%02zu.csv", i);
            write_file(dir / name, curve_text(locate_r_level(sheet, c.r_levels[i])));
        }
    }
    if (c.outputs.rates) {
        const RateReport rep = build_rate_report(sheet, c.stations, {}, threads);
        write_file(out / "rates.json", report_json(c, rep).dump(2) + "\n");
    }
    if (!o.quiet)
        std::printf("%zu columns computed, %zu stored, %zu cells; output in %s\n", sheet.columns_computed,
                    sheet.columns.size(), sheet.cells_computed, out.string().c_str());
    return ok;
}

int rates_cmd(const Options& o, bool audit_only) {
    const RunConfig c = load(o, benchmark_config());
    const unsigned threads = analysis_threads();
    if (c.stations.empty()) throw InsufficientData("no stations given");
    const fs::path out = ensure_dir(c.outputs.out_dir);
    const RunData run = execute(c);
    const RateReport rep = build_rate_report(run.sheet, c.stations, {}, threads);
    bool any_fit = false;
    for (const auto& s : rep.kretschmann.stations) any_fit = any_fit || s.fit.has_value();
    if (!any_fit) throw InsufficientData("no station row could be fitted");
    {
        nlohmann::json doc = report_json(c, rep);
        if (audit_only) {
            doc.erase("stations");
            doc.erase("fits");
            doc["stations"] = nlohmann::json::array();
            doc["fits"] = nlohmann::json::object();
        }
        write_file(out / (audit_only ? "audit.json" : "rates.json"), doc.dump(2) + "\n");
    }
    if (!o.quiet) {
        if (audit_only) {
            for (const auto& l : rep.audit.lines)
                std::printf("%-14s samples %zu  lower %.4g  upper %.4g  positive %s\n", l.name.c_str(), l.samples,
                            l.lower, l.upper, l.positive ? "yes" : "no");
        } else {
            print_verdicts(rate_verdicts(c, rep));
        }
        for (const auto& n : rep.notices) std::printf("note: %s\n", n.c_str());
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Characteristic evolution of a black-hole interior with a scalar tail"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--stations", o.stations, "comma-separated v stations");
        sub->add_flag("--quiet", o.quiet, "no console output");
    };
    CLI::App* vac = app.add_subcommand("vacuum-regression", "compare with the exact interior");
    CLI::App* evo = app.add_subcommand("evolve", "evolve and write slices, curves and rates");
    CLI::App* rat = app.add_subcommand("rates", "exponent fits and verdicts");
    CLI::App* aud = app.add_subcommand("audit", "bound audits");
    for (auto* s : {vac, evo, rat, aud}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (vac->parsed()) return vacuum_regression(o);
        if (evo->parsed()) return evolve_cmd(o);
        if (rat->parsed()) return rates_cmd(o, false);
        if (aud->parsed()) return rates_cmd(o, true);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return usage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return io;
    } catch (const EvolutionError& e) {
        std::cerr << "evolution failed at U=" << e.U() << " v=" << e.v() << ": " << e.what() << '\n';
        return evolution;
    } catch (const InsufficientData& e) {
        std::cerr << "missing data: " << e.what() << '\n';
        return missing_data;
    }
    return usage;
}
