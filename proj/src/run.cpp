#include "nullhorizon/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace nullhorizon {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
void read(const json& obj, const char* where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + ": wrong type");
    }
}

std::vector<double> read_list(const json& obj, const char* key) {
    std::vector<double> out;
    read(obj, "config", key, out);
    return out;
}

void require_positive(double x, const char* name) {
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(std::string(name) + " must be positive");
}

void validate(const RunConfig& c) {
    try {
        c.params.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const GridConfig& g = c.grid;
    require_positive(g.v_max, "grid.v_max");
    require_positive(g.base_dv, "grid.base_dv");
    require_positive(g.dv_min, "grid.dv_min");
    require_positive(g.max_dw, "grid.max_dw");
    require_positive(g.max_dsigma, "grid.max_dsigma");
    require_positive(g.eta_u, "grid.eta_u");
    require_positive(g.du_max, "grid.du_max");
    require_positive(g.du_min, "grid.du_min");
    require_positive(g.w_floor, "grid.w_floor");
    require_positive(g.max_u_ratio, "grid.max_u_ratio");
    require_positive(g.refine, "grid.refine");
    if (g.store_stride == 0) throw ConfigError("grid.store_stride must be positive");
    if (g.focus_w_floor < 0 || g.focus_half_width < 0) throw ConfigError("focus settings must be nonnegative");
    if (!(g.v_max > c.params.v0)) throw ConfigError("grid.v_max must exceed params.v0");
    for (double v : c.stations)
        if (!(v > c.params.v0 && v <= g.v_max)) throw ConfigError("stations must lie in (v0, v_max]");
    for (double r : c.r_levels) require_positive(r, "r_levels");
    const std::string& k = c.horizon.kind;
    if (k != "power_law" && k != "two_term" && k != "table")
        throw ConfigError("profiles.horizon.kind must be power_law, two_term or table");
    if (k == "table" && c.horizon.table.empty()) throw ConfigError("profiles.horizon.table: path required");
    if (c.outputs.out_dir.empty()) throw ConfigError("outputs.out_dir must not be empty");
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig c;
    check_keys(j, "config", {"params", "grid", "profiles", "outputs", "stations", "r_levels"});
    if (j.contains("params")) {
        const json& p = j.at("params");
        check_keys(p, "params", {"M", "p", "q", "D1", "D2", "D3", "v0", "U0", "r_min", "r0"});
        read(p, "params", "M", c.params.M);
        read(p, "params", "p", c.params.p);
        read(p, "params", "q", c.params.q);
        read(p, "params", "D1", c.params.D1);
        read(p, "params", "D2", c.params.D2);
        read(p, "params", "D3", c.params.D3);
        read(p, "params", "v0", c.params.v0);
        read(p, "params", "U0", c.params.U0);
        read(p, "params", "r_min", c.params.r_min);
        read(p, "params", "r0", c.params.r0);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"v_max", "base_dv", "dv_min", "max_dw", "max_dsigma", "eta_u", "du_max", "du_min",
                               "w_floor", "max_u_ratio", "refine", "store_stride", "focus_half_width",
                               "focus_w_floor"});
        read(g, "grid", "v_max", c.grid.v_max);
        read(g, "grid", "base_dv", c.grid.base_dv);
        read(g, "grid", "dv_min", c.grid.dv_min);
        read(g, "grid", "max_dw", c.grid.max_dw);
        read(g, "grid", "max_dsigma", c.grid.max_dsigma);
        read(g, "grid", "eta_u", c.grid.eta_u);
        read(g, "grid", "du_max", c.grid.du_max);
        read(g, "grid", "du_min", c.grid.du_min);
        read(g, "grid", "w_floor", c.grid.w_floor);
        read(g, "grid", "max_u_ratio", c.grid.max_u_ratio);
        read(g, "grid", "refine", c.grid.refine);
        read(g, "grid", "store_stride", c.grid.store_stride);
        read(g, "grid", "focus_half_width", c.grid.focus_half_width);
        read(g, "grid", "focus_w_floor", c.grid.focus_w_floor);
    }
    if (j.contains("profiles")) {
        const json& pr = j.at("profiles");
        check_keys(pr, "profiles", {"horizon", "ingoing"});
        if (pr.contains("horizon")) {
            const json& h = pr.at("horizon");
            check_keys(h, "profiles.horizon", {"kind", "amplitude", "exponent", "amplitude_fast", "exponent_fast", "table"});
            read(h, "profiles.horizon", "kind", c.horizon.kind);
            read(h, "profiles.horizon", "amplitude", c.horizon.amplitude);
            read(h, "profiles.horizon", "exponent", c.horizon.exponent);
            read(h, "profiles.horizon", "amplitude_fast", c.horizon.amplitude_fast);
            read(h, "profiles.horizon", "exponent_fast", c.horizon.exponent_fast);
            read(h, "profiles.horizon", "table", c.horizon.table);
        }
        if (pr.contains("ingoing")) {
            const json& in = pr.at("ingoing");
            check_keys(in, "profiles.ingoing", {"rYphi", "dUr0"});
            read(in, "profiles.ingoing", "rYphi", c.ingoing.rYphi);
            read(in, "profiles.ingoing", "dUr0", c.ingoing.dUr0);
        }
    }
    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        check_keys(o, "outputs", {"slices", "curves", "rates", "out_dir"});
        read(o, "outputs", "slices", c.outputs.slices);
        read(o, "outputs", "curves", c.outputs.curves);
        read(o, "outputs", "rates", c.outputs.rates);
        read(o, "outputs", "out_dir", c.outputs.out_dir);
    }
    if (j.contains("stations")) c.stations = read_list(j, "stations");
    if (j.contains("r_levels")) c.r_levels = read_list(j, "r_levels");
    std::sort(c.stations.begin(), c.stations.end());
    std::sort(c.r_levels.begin(), c.r_levels.end());
    validate(c);
    return c;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        // the message carries line and column
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& c) {
    const GridConfig& g = c.grid;
    return {{"params", to_json(c.params)},
            {"grid",
             {{"v_max", g.v_max},
              {"base_dv", g.base_dv},
              {"dv_min", g.dv_min},
              {"max_dw", g.max_dw},
              {"max_dsigma", g.max_dsigma},
              {"eta_u", g.eta_u},
              {"du_max", g.du_max},
              {"du_min", g.du_min},
              {"w_floor", g.w_floor},
              {"max_u_ratio", g.max_u_ratio},
              {"refine", g.refine},
              {"store_stride", g.store_stride},
              {"focus_half_width", g.focus_half_width},
              {"focus_w_floor", g.focus_w_floor}}},
            {"profiles",
             {{"horizon",
               {{"kind", c.horizon.kind},
                {"amplitude", c.horizon.amplitude},
                {"exponent", c.horizon.exponent},
                {"amplitude_fast", c.horizon.amplitude_fast},
                {"exponent_fast", c.horizon.exponent_fast},
                {"table", c.horizon.table}}},
              {"ingoing", {{"rYphi", c.ingoing.rYphi}, {"dUr0", c.ingoing.dUr0}}}}},
            {"outputs",
             {{"slices", c.outputs.slices},
              {"curves", c.outputs.curves},
              {"rates", c.outputs.rates},
              {"out_dir", c.outputs.out_dir}}},
            {"stations", c.stations},
            {"r_levels", c.r_levels}};
}

RunConfig vacuum_config() {
    RunConfig c;
    c.params.U0 = 0.3;
    c.grid.v_max = 11.84;
    c.grid.base_dv = 0.25 / 6;
    c.grid.max_dw = 0.05 / 6;
    c.grid.max_dsigma = 0.02 / 6;
    c.grid.eta_u = 0.05 / 6;
    c.grid.du_max = 0.25 / 4;
    c.grid.w_floor = 2.5e-3;
    c.grid.store_stride = 64;
    c.outputs.slices = false;
    c.outputs.rates = false;
    return c;
}

RunConfig benchmark_config() {
    RunConfig c;
    c.params.D1 = c.params.D2 = c.params.D3 = 0.05;
    c.params.U0 = 0.3;
    c.grid.v_max = 322;
    c.grid.w_floor = 0.25;
    c.grid.store_stride = 50;
    c.horizon.amplitude = 0.05;
    c.horizon.exponent = 2;
    c.ingoing.rYphi = 0.025;
    c.ingoing.dUr0 = -0.025;
    c.stations = {40, 80, 160, 320};
    c.outputs.slices = false;
    return c;
}

RunConfig scaled(const RunConfig& config, double k) {
    require_positive(k, "scale factor");
    if (config.horizon.kind == "table") throw ConfigError("scaled: tabulated profiles are not rescaled");
    RunConfig c = config;
    ModelParams& p = c.params;
    p.M *= k;
    p.v0 *= k;
    p.U0 *= k;
    p.r_min *= k;
    p.r0 *= k;
    GridConfig& g = c.grid;
    g.v_max *= k;
    g.base_dv *= k;
    g.dv_min *= k;
    g.du_max *= k;
    g.du_min *= k;
    g.focus_half_width *= k;
    g.max_dw *= k * k;
    g.w_floor *= k * k;
    g.focus_w_floor *= k * k;
    for (double& v : c.stations) v *= k;
    for (double& r : c.r_levels) r *= k;
    return c;
}

RunConfig refined(const RunConfig& config, double factor) {
    require_positive(factor, "refinement factor");
    RunConfig c = config;
    c.grid.refine *= factor;
    return c;
}

StepControls step_controls(const RunConfig& config) {
    const GridConfig& g = config.grid;
    StepControls c;
    c.v_max = g.v_max;
    c.base_dv = g.base_dv;
    c.dv_min = g.dv_min;
    c.max_dw = g.max_dw;
    c.max_dsigma = g.max_dsigma;
    c.eta_u = g.eta_u;
    c.du_max = g.du_max;
    c.du_min = g.du_min;
    c.w_floor = g.w_floor;
    c.max_u_ratio = g.max_u_ratio;
    c.store_stride = g.store_stride;
    if (g.focus_w_floor > 0 && g.focus_half_width > 0)
        for (double v : config.stations) c.focus.push_back({v, g.focus_half_width, g.focus_w_floor});
    return g.refine == 1 ? c : c.refined(g.refine);
}

HorizonProfile horizon_profile(const RunConfig& config) {
    const ProfileConfig& h = config.horizon;
    const double M = config.params.M;
    if (h.kind == "two_term") return HorizonProfile::two_term(h.amplitude, h.exponent, h.amplitude_fast, h.exponent_fast, M);
    if (h.kind == "table") return HorizonProfile::read_table(h.table, M);
    return HorizonProfile::power_law(h.amplitude, h.exponent, M);
}

IngoingProfile ingoing_profile(const RunConfig& config) {
    return IngoingProfile::constant(config.ingoing.rYphi, config.ingoing.dUr0);
}

RunData execute(const RunConfig& config, const ColumnObserver& observer) {
    const StepControls controls = step_controls(config);
    const IngoingProfile in = ingoing_profile(config);
    HorizonOptions ho;
    ho.dv_out = controls.base_dv;
    RunData run;
    run.horizon = integrate_horizon_constraint(horizon_profile(config), in, config.params, controls.v_max, ho);
    run.slice = build_ingoing_data(in, run.horizon, config.params);
    run.sheet = evolve(run.slice, run.horizon, config.params, controls, observer);
    return run;
}

void InvariantMonitor::operator()(const Column& col) {
    for (std::size_t j = 0; j < col.size(); ++j) {
        const CellState& s = col.cells[j];
        ++cells_;
        const double m = hawking_mass(s);
        if (m > 0) {
            const double r3 = s.w * s.r;
            worst_ineq_ = std::min(worst_ineq_, kretschmann(s) * r3 * r3 / (32 * m * m) - 1);
        }
        if (col.U > 0 && !(s.dU_r() < 0)) ++dUr_bad_;
        if (!(s.dU_r() < 0 && s.dv_r() < 0)) continue;
        ++trapped_;
        if (!prev_ || !(prev_->U > 0) || s.v > prev_->v_end()) continue;
        const double du = s.u - u_from_U(prev_->U, M_);
        const double dm = col.mass[j] - interpolate_mass(*prev_, s.v);
        worst_dum_ = std::min(worst_dum_, dm / du / M_);
    }
    prev_ = col;
}

VacuumErrors vacuum_errors(const RunConfig& config, double r_floor, InvariantMonitor* monitor) {
    if (!config.params.vacuum()) throw DomainError("vacuum_errors: matter amplitudes must vanish");
    const double M = config.params.M;
    VacuumErrors e;
    double sum = 0;
    auto observe = [&](const Column& col) {
        if (monitor) (*monitor)(col);
        for (std::size_t j = 0; j < col.size(); ++j) {
            const CellState& s = col.cells[j];
            if (s.r < r_floor) continue;
            ++e.cells;
            e.mass = std::max(e.mass, std::abs(hawking_mass(s) - M) / M);
            const double r3 = s.w * s.r;
            e.kretschmann = std::max(e.kretschmann, std::abs(kretschmann(s) * r3 * r3 / (48 * M * M) - 1));
            const double ru = col.res_u[j], rv = col.res_v[j];
            if (std::isfinite(ru)) e.residuals.max_res_u = std::max(e.residuals.max_res_u, std::abs(ru));
            if (std::isfinite(rv)) e.residuals.max_res_v = std::max(e.residuals.max_res_v, std::abs(rv));
            if (std::isfinite(ru) && std::isfinite(rv)) {
                sum += ru * ru + rv * rv;
                ++e.residuals.samples;
            }
        }
    };
    const RunData run = execute(config, observe);
    e.columns = run.sheet.columns_computed;
    e.residuals.l2_res = e.residuals.samples ? std::sqrt(sum / e.residuals.samples) : 0;
    return e;
}

ConvergenceStudy convergence_study(const RunConfig& config, int doublings, double r_floor) {
    if (doublings < 1) throw DomainError("convergence_study: need at least one doubling");
    ConvergenceStudy s;
    for (int k = 0; k <= doublings; ++k) {
        const double f = std::ldexp(1.0, k);
        s.factors.push_back(f);
        s.levels.push_back(vacuum_errors(refined(config, f), r_floor));
        if (k == 0) continue;
        const VacuumErrors& a = s.levels[k - 1];
        const VacuumErrors& b = s.levels[k];
        s.mass_order.push_back(convergence_order(a.mass, b.mass));
        s.kretschmann_order.push_back(convergence_order(a.kretschmann, b.kretschmann));
        s.residual_order.push_back(convergence_order(a.residuals.l2_res, b.residuals.l2_res));
    }
    return s;
}

unsigned analysis_threads() {
    const char* env = std::getenv("NULLHORIZON_THREADS");
    if (!env || !*env) return 1;
    const std::string text(env);
    unsigned n = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || end != text.data() + text.size() || n == 0)
        throw ConfigError("NULLHORIZON_THREADS must be a positive integer, got \"" + text + "\"");
    return n;
}

namespace {

void run_tasks(std::vector<std::function<void()>>& tasks, unsigned threads) {
    if (threads <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    for (std::size_t i = 0; i < tasks.size(); i += threads) {
        std::vector<std::future<void>> batch;
        for (std::size_t k = i; k < std::min(tasks.size(), i + threads); ++k)
            batch.push_back(std::async(std::launch::async, tasks[k]));
        for (auto& f : batch) f.get();
    }
}

// r on row v between the two stored columns around U.
std::optional<double> radius_at(const GridSheet& sheet, double U, double v) {
    const auto& cols = sheet.columns;
    auto hi = std::lower_bound(cols.begin(), cols.end(), U, [](const Column& c, double x) { return c.U < x; });
    if (hi == cols.end() || hi == cols.begin()) return std::nullopt;
    auto lo = std::prev(hi);
    if (v > lo->v_end() || v > hi->v_end()) return std::nullopt;
    const double M = sheet.params.M;
    const double ra = interpolate_column(*lo, v, M).r;
    const double rb = interpolate_column(*hi, v, M).r;
    const double t = (U - lo->U) / (hi->U - lo->U);
    return ra + t * (rb - ra);
}

}  // namespace

std::optional<PowerLawFit> fit_horizon_approach(const CurveSample& ah, const GridSheet& sheet, double v_lo) {
    const double M = sheet.params.M;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : ah.points) {
        if (p.v < v_lo) continue;
        const auto r = radius_at(sheet, p.U, p.v);
        if (!r) continue;
        const double gap = std::abs(*r - 2 * M) / M;
        if (gap > 0) pts.emplace_back(p.v / M, gap);
    }
    try {
        return fit_power_law(pts, Window{v_lo / M, std::numeric_limits<double>::infinity()});
    } catch (const InsufficientData&) {
        return std::nullopt;
    }
}

RateReport build_rate_report(const GridSheet& sheet, std::span<const double> stations, const AuditOptions& audit,
                             unsigned threads) {
    RateReport rep;
    const std::vector<double> st(stations.begin(), stations.end());
    std::string limits_notice;
    std::vector<std::function<void()>> tasks;
    tasks.emplace_back([&] { rep.kretschmann = kretschmann_exponent_profile(sheet, st); });
    tasks.emplace_back([&] { rep.mass = mass_inflation_profile(sheet, st); });
    tasks.emplace_back([&] {
        try {
            rep.limits = extract_f1_f2(sheet);
        } catch (const InsufficientData& e) {
            limits_notice = std::string("gradient limits: ") + e.what();
        }
    });
    tasks.emplace_back([&] {
        rep.apparent_horizon = locate_apparent_horizon(sheet);
        const double v_lo = st.empty() ? sheet.params.v0 : st.front();
        rep.horizon_fit = fit_horizon_approach(rep.apparent_horizon, sheet, v_lo);
    });
    run_tasks(tasks, threads);
    if (!limits_notice.empty()) rep.notices.push_back(limits_notice);
    if (!rep.horizon_fit) rep.notices.push_back("apparent horizon: too few points past the first station");

    AuditOptions opts = audit;
    const ModelParams& p = sheet.params;
    opts.sigma_exponent = rep.mass.sigma_fit.slope;
    if (p.D1 > 0) opts.rho_exponent = rep.mass.rho_fit.slope / (p.D1 * p.D1);
    rep.audit = audit_estimates(sheet, p, opts);
    return rep;
}

namespace {

json origin_fit_json(const OriginFit& f, double exponent, const ExponentProfile& prof) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : prof.stations)
        if (s.fit) {
            lo = std::min(lo, s.station);
            hi = std::max(hi, s.station);
        }
    json window = lo <= hi ? json{lo, hi} : json(nullptr);
    return {{"exponent", exponent}, {"amplitude", f.slope}, {"stderr", f.std_error}, {"window", window}};
}

json optional_fit(const std::optional<PowerLawFit>& f) { return f ? to_json(*f) : json(nullptr); }

}  // namespace

json report_json(const RunConfig& config, const RateReport& rep) {
    const ModelParams& p = config.params;
    json stations = json::array();
    for (std::size_t i = 0; i < rep.kretschmann.stations.size(); ++i) {
        const StationFit& k = rep.kretschmann.stations[i];
        const StationFit& b = rep.mass.stations[i];
        json e = {{"v", k.station}};
        e["N"] = k.fit ? json(k.value) : json(nullptr);
        e["N_fit"] = optional_fit(k.fit);
        e["beta"] = b.fit ? json(b.value) : json(nullptr);
        e["beta_fit"] = optional_fit(b.fit);
        std::string notice = k.notice;
        if (!b.notice.empty() && b.notice != k.notice) notice += (notice.empty() ? "" : "; ") + b.notice;
        if (!notice.empty()) e["notice"] = notice;
        stations.push_back(e);
    }
    json fits = {
        {"N_minus_6_trend", optional_fit(rep.kretschmann.trend)},
        {"N_minus_6_sigma", origin_fit_json(rep.kretschmann.sigma_fit, -2 * p.p, rep.kretschmann)},
        {"N_minus_6_rho", origin_fit_json(rep.kretschmann.rho_fit, -2 * p.q, rep.kretschmann)},
        {"beta_trend", optional_fit(rep.mass.trend)},
        {"beta_sigma", origin_fit_json(rep.mass.sigma_fit, -2 * p.p, rep.mass)},
        {"beta_rho", origin_fit_json(rep.mass.rho_fit, -2 * p.q, rep.mass)},
        {"apparent_horizon_gap", optional_fit(rep.horizon_fit)},
        {"f1_decay", optional_fit(rep.limits.f1_decay)},
        {"f2_decay", optional_fit(rep.limits.f2_decay)},
    };
    json audits = to_json(rep.audit);
    json lim = to_json(rep.limits);
    lim.erase("f1_decay");
    lim.erase("f2_decay");
    audits["gradient_limits"] = lim;
    audits["notices"] = rep.notices;
    json params = to_json(p);
    params["stations"] = config.stations;
    return {{"params", params}, {"stations", stations}, {"fits", fits}, {"audits", audits}};
}

std::vector<Verdict> rate_verdicts(const RunConfig& config, const RateReport& rep) {
    const ModelParams& p = config.params;
    std::vector<Verdict> out;
    auto fmt = [](double x) {
        std::ostringstream s;
        s << std::setprecision(4) << x;
        return s.str();
    };

    bool above = !rep.kretschmann.stations.empty(), nonincreasing = above, beta_pos = above;
    double prev_N = std::numeric_limits<double>::infinity();
    std::string values;
    for (std::size_t i = 0; i < rep.kretschmann.stations.size(); ++i) {
        const StationFit& k = rep.kretschmann.stations[i];
        const StationFit& b = rep.mass.stations[i];
        if (!k.fit || !b.fit) {
            above = nonincreasing = beta_pos = false;
            continue;
        }
        values += (values.empty() ? "" : " ") + fmt(k.value - 6);
        above = above && k.value > 6;
        nonincreasing = nonincreasing && k.value <= prev_N + 2 * k.fit->std_error;
        prev_N = k.value;
        beta_pos = beta_pos && b.value > 0;
    }
    if (p.vacuum()) {
        bool six = !rep.kretschmann.stations.empty();
        for (const auto& k : rep.kretschmann.stations) six = six && k.fit && std::abs(k.value - 6) <= 1e-4;
        out.push_back({"N(v)=6", six, "N-6: " + values});
        return out;
    }
    out.push_back({"N(v)>6 at every station", above, "N-6: " + values});
    out.push_back({"N(v) nonincreasing", nonincreasing, ""});
    if (rep.kretschmann.trend) {
        const double slope = rep.kretschmann.trend->exponent;
        out.push_back({"N(v)-6 slope ~ -2p", std::abs(slope + 2 * p.p) <= 0.15 * 2 * p.p,
                       "slope " + fmt(slope) + " against " + fmt(-2 * p.p)});
    } else {
        out.push_back({"N(v)-6 slope ~ -2p", false, "fewer than three usable stations"});
    }
    out.push_back({"beta(v)>0", beta_pos, ""});
    if (rep.horizon_fit) {
        const double slope = rep.horizon_fit->exponent;
        out.push_back({"|r_A-2M| slope ~ -2p+1", std::abs(slope - (1 - 2 * p.p)) <= 0.3,
                       "slope " + fmt(slope) + " against " + fmt(1 - 2 * p.p)});
    } else {
        out.push_back({"|r_A-2M| slope ~ -2p+1", false, "no apparent horizon fit"});
    }
    for (const auto* d : {&rep.limits.f1_decay, &rep.limits.f2_decay}) {
        const std::string name = d == &rep.limits.f1_decay ? "f1" : "f2";
        if (*d) {
            const double rate = -(*d)->exponent;
            out.push_back({name + " decay exponent >= p-0.3", rate >= p.p - 0.3,
                           "exponent " + fmt(rate) + " (p=" + fmt(p.p) + ", 2p=" + fmt(2 * p.p) + ")"});
        } else {
            out.push_back({name + " decay exponent >= p-0.3", false, "no decay fit"});
        }
    }
    for (const auto& l : rep.audit.lines) {
        if (l.name != "r2_dvphi" && l.name != "r2_duphi") continue;
        const double ratio = l.scaled_max / l.scaled_min;
        out.push_back({l.name + " sandwich", l.positive && std::isfinite(ratio) && ratio <= 20,
                       "Cm/cm " + fmt(ratio)});
    }
    return out;
}

void write_column_csv(std::ostream& out, const Column& col, double M) {
    const auto old = out.precision(17);
    out << "U,u,v,r,w,sigma,omega2hat,phi,dUr,dvr,dUphi,dvphi,m,K,res_u,res_v\n";
    for (std::size_t j = 0; j < col.size(); ++j) {
        const CellState& s = col.cells[j];
        const double u = col.U > 0 ? u_from_U(col.U, M) : -std::numeric_limits<double>::infinity();
        out << col.U << ',' << u << ',' << s.v << ',' << s.r << ',' << s.w << ',' << s.sigma << ','
            << s.omega2hat() << ',' << s.phi << ',' << s.dU_r() << ',' << s.dv_r() << ',' << s.dU_phi << ','
            << s.dv_phi << ',' << hawking_mass(s) << ',' << kretschmann(s) << ',' << col.res_u[j] << ','
            << col.res_v[j] << '\n';
    }
    out.precision(old);
}

}  // namespace nullhorizon
