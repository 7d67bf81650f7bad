#include "nullhorizon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nullhorizon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double fit_max(const ModelParams& p, const ProfileOptions& o) { return o.r_fit_max > 0 ? o.r_fit_max : p.r0 / 4; }

bool singular_stop(StopReason s) { return s == StopReason::reached_rmin || s == StopReason::resolution_limit; }

// du/dU
double dU_per_du(double U, double M) { return U / (4 * M); }

}  // namespace

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples, Window window,
                          std::size_t min_samples) {
    std::vector<std::pair<double, double>> in;
    for (const auto& [x, y] : samples) {
        if (!window.contains(x)) continue;
        if (!(x > 0) || !(y > 0)) throw DomainError("fit_power_law: samples must be positive");
        in.emplace_back(std::log(x), std::log(y));
    }
    const std::size_t n = in.size();
    if (n < std::max<std::size_t>(min_samples, 2))
        throw InsufficientData("fit_power_law: " + std::to_string(n) + " samples in window, need " +
                               std::to_string(std::max<std::size_t>(min_samples, 2)));
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = 1;
        A(i, 1) = in[i].first;
        b(i) = in[i].second;
    }
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
    PowerLawFit fit;
    fit.amplitude = std::exp(coef(0));
    fit.exponent = coef(1);
    fit.window = window;
    fit.samples = n;
    if (n > 2) {
        const double rss = (A * coef - b).squaredNorm();
        const Eigen::Matrix2d cov = (A.transpose() * A).inverse() * (rss / static_cast<double>(n - 2));
        fit.std_error = std::sqrt(std::max(0.0, cov(1, 1)));
    }
    return fit;
}

OriginFit fit_through_origin(std::span<const std::pair<double, double>> samples) {
    if (samples.empty()) throw InsufficientData("fit_through_origin: no samples");
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : samples) {
        sxx += x * x;
        sxy += x * y;
    }
    if (!(sxx > 0)) throw DomainError("fit_through_origin: all abscissae are zero");
    OriginFit f;
    f.slope = sxy / sxx;
    if (samples.size() > 1) {
        double rss = 0;
        for (const auto& [x, y] : samples) rss += (y - f.slope * x) * (y - f.slope * x);
        f.std_error = std::sqrt(rss / static_cast<double>(samples.size() - 1) / sxx);
    }
    return f;
}

std::vector<RowSample> row_samples(const GridSheet& sheet, double v) {
    std::vector<RowSample> out;
    for (const auto& col : sheet.columns) {
        if (col.cells.empty() || v < col.cells.front().v || v > col.v_end()) continue;
        out.push_back({interpolate_column(col, v, sheet.params.M), interpolate_mass(col, v)});
    }
    return out;
}

namespace {

template <typename Sampler>
ExponentProfile station_profile(std::span<const double> stations, double lo, double hi, double sign,
                                Sampler&& sample) {
    ExponentProfile prof;
    for (double st : stations) {
        StationFit sf;
        sf.station = st;
        std::string notice;
        const auto pts = sample(st, notice);
        sf.notice = notice;
        try {
            const PowerLawFit fit = fit_power_law(pts, Window{lo, hi});
            sf.value = sign * fit.exponent;
            sf.fit = fit;
        } catch (const InsufficientData& e) {
            sf.notice = e.what();
        } catch (const DomainError& e) {
            sf.notice = e.what();
        }
        prof.stations.push_back(std::move(sf));
    }
    return prof;
}

void add_station_regressions(ExponentProfile& prof, const ModelParams& p, double offset) {
    std::vector<std::pair<double, double>> sp, sq, trend;
    for (const auto& s : prof.stations) {
        if (!s.fit) continue;
        const double x = s.station / p.M;
        const double excess = s.value - offset;
        sp.emplace_back(std::pow(x, -2 * p.p), excess);
        sq.emplace_back(std::pow(x, -2 * p.q), excess);
        if (excess > 0) trend.emplace_back(x, excess);
    }
    if (!sp.empty()) {
        prof.sigma_fit = fit_through_origin(sp);
        prof.rho_fit = fit_through_origin(sq);
    }
    if (trend.size() >= 3) {
        Window all{0, std::numeric_limits<double>::infinity()};
        prof.trend = fit_power_law(trend, all, 3);
    }
}

}  // namespace

ExponentProfile kretschmann_exponent_profile(const GridSheet& sheet, std::span<const double> v_stations,
                                             const ProfileOptions& opts) {
    const double lo = opts.r_fit_min, hi = fit_max(sheet.params, opts);
    auto prof = station_profile(v_stations, lo, hi, -1.0, [&](double v, std::string&) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& rs : row_samples(sheet, v)) {
            if (rs.cell.r < lo || rs.cell.r > hi) continue;
            const double K = opts.transported_mass ? kretschmann_from_mass(rs.cell, rs.mass) : kretschmann(rs.cell);
            pts.emplace_back(rs.cell.r, K);
        }
        return pts;
    });
    add_station_regressions(prof, sheet.params, 6.0);
    return prof;
}

ExponentProfile mass_inflation_profile(const GridSheet& sheet, std::span<const double> v_stations,
                                       const ProfileOptions& opts) {
    const double lo = opts.r_fit_min, hi = fit_max(sheet.params, opts);
    auto prof = station_profile(v_stations, lo, hi, -1.0, [&](double v, std::string& notice) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& rs : row_samples(sheet, v)) {
            if (rs.cell.r < lo || rs.cell.r > hi) continue;
            const double m = opts.transported_mass ? rs.mass : hawking_mass(rs.cell);
            if (!(m > 0)) {
                notice = "nonpositive mass in the fit window";
                continue;
            }
            pts.emplace_back(rs.cell.r, m);
        }
        return pts;
    });
    add_station_regressions(prof, sheet.params, 0.0);
    return prof;
}

ExponentProfile omega_exponent_profile(const GridSheet& sheet, std::span<const double> u_stations,
                                       const ProfileOptions& opts) {
    const double M = sheet.params.M;
    const double lo = opts.r_fit_min, hi = fit_max(sheet.params, opts);
    auto prof = station_profile(u_stations, lo, hi, 1.0, [&](double u, std::string& notice) {
        std::vector<std::pair<double, double>> pts;
        const double U = U_from_u(u, M);
        const Column* best = nullptr;
        for (const auto& col : sheet.columns)
            if (col.U > 0 && (!best || std::abs(std::log(col.U / U)) < std::abs(std::log(best->U / U)))) best = &col;
        if (!best) return pts;
        notice = "column u = " + std::to_string(u_from_U(best->U, M));
        for (const auto& c : best->cells) {
            if (c.r < lo || c.r > hi) continue;
            pts.emplace_back(c.r, c.r * omega2_from_gauge(c.omega2hat(), c.U, M));
        }
        return pts;
    });
    return prof;
}

std::pair<double, double> extrapolate_to_zero(std::span<const std::pair<double, double>> r_y) {
    const std::size_t n = r_y.size();
    if (n < 3) throw InsufficientData("extrapolate_to_zero: need at least 3 samples");
    double best_rss = std::numeric_limits<double>::infinity();
    std::pair<double, double> best{kNaN, kNaN};
    constexpr int kGrid = 100;
    for (int k = 0; k <= kGrid; ++k) {
        const double gamma = std::pow(10.0, -2.0 + 2.0 * k / kGrid);
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd b(n);
        for (std::size_t i = 0; i < n; ++i) {
            A(i, 0) = 1;
            A(i, 1) = std::pow(r_y[i].first, gamma);
            b(i) = r_y[i].second;
        }
        const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
        const double rss = (A * c - b).squaredNorm();
        if (rss < best_rss) {
            best_rss = rss;
            best = {c(0), gamma};
        }
    }
    return best;
}

GradientLimits extract_f1_f2(const GridSheet& sheet, const ProfileOptions& opts) {
    const double M = sheet.params.M;
    GradientLimits out;
    auto limit = [&](const std::vector<std::pair<double, double>>& decade, double r_end, LimitSample& s) {
        const auto [a, gamma] = extrapolate_to_zero(decade);
        s.value = a;
        s.gamma = gamma;
        std::vector<std::pair<double, double>> half;
        for (const auto& p : decade)
            if (p.first <= std::sqrt(10.0) * r_end) half.push_back(p);
        if (half.size() >= 3) {
            const double a2 = extrapolate_to_zero(half).first;
            s.flagged = std::abs(a - a2) > 0.1 * std::abs(a) + 1e-6 * M;
        }
    };
    for (const auto& col : sheet.columns) {
        if (!singular_stop(col.stop) || !(col.U > 0)) continue;
        const CellState& last = col.cells.back();
        if (!(last.dv_w < 0)) continue;
        const double r_end = last.r;
        const double r_top = std::min(10 * r_end, fit_max(sheet.params, opts));
        std::vector<std::pair<double, double>> y1, y2;
        for (const auto& c : col.cells) {
            if (c.r > r_top) continue;
            y1.emplace_back(c.r, c.r * c.dU_r() * dU_per_du(c.U, M) + M);
            y2.emplace_back(c.r, c.r * c.dv_r() + M);
        }
        if (y1.size() < 3) continue;
        LimitSample s1, s2;
        s1.u = s2.u = u_from_U(col.U, M);
        s1.v = s2.v = last.v + last.w / -last.dv_w;
        limit(y1, r_end, s1);
        limit(y2, r_end, s2);
        out.f1.push_back(s1);
        out.f2.push_back(s2);
    }
    if (out.f1.empty()) return out;
    out.u1 = out.f1.front().u;
    out.v_sing_u1 = out.f1.front().v;
    std::vector<std::pair<double, double>> d1, d2;
    for (std::size_t i = 0; i < out.f1.size(); ++i) {
        const auto& a = out.f1[i];
        const auto& b = out.f2[i];
        const double x = std::abs(a.u - out.u1 - out.v_sing_u1);
        if (!a.flagged && a.value != 0 && x > 0) d1.emplace_back(x / M, std::abs(a.value) / M);
        if (!b.flagged && b.value != 0) d2.emplace_back(b.v / M, std::abs(b.value) / M);
    }
    const Window all{0, std::numeric_limits<double>::infinity()};
    try { out.f1_decay = fit_power_law(d1, all); } catch (const InsufficientData&) {}
    try { out.f2_decay = fit_power_law(d2, all); } catch (const InsufficientData&) {}
    return out;
}

namespace {

struct Extremes {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    double min_or_nan() const { return std::isfinite(lo) ? lo : kNaN; }
    double max_or_nan() const { return std::isfinite(hi) ? hi : kNaN; }
};

struct LineAccumulator {
    AuditLine line;
    Extremes lower, upper, scaled;
    void finish(double D1_prime) {
        line.lower = lower.min_or_nan();
        line.upper = upper.max_or_nan();
        line.scaled_min = scaled.min_or_nan();
        line.scaled_max = scaled.max_or_nan();
        line.prefactor = D1_prime > 0 && std::isfinite(line.lower) ? line.lower / D1_prime : kNaN;
    }
};

}  // namespace

AuditReport audit_estimates(const GridSheet& sheet, const ModelParams& params, const AuditOptions& opts) {
    const double M = params.M;
    AuditReport rep;
    rep.D1_prime = (3 - 2 * std::sqrt(2.0)) * (params.D1 - opts.epsilon);
    auto make = [](const char* name, const char* region) {
        LineAccumulator a;
        a.line.name = name;
        a.line.region = region;
        return a;
    };
    LineAccumulator dur = make("r_dur_plus_M", "v >= v1");
    LineAccumulator dvr = make("r_dvr_plus_M", "v >= v1");
    LineAccumulator lapse = make("r_omega2", "v >= v1, r <= M/10");
    LineAccumulator mass = make("hawking_mass", "v >= v1");
    LineAccumulator dvphi = make("r2_dvphi", "v >= v1");
    LineAccumulator duphi = make("r2_duphi", "v >= v1, r <= M/10");
    LineAccumulator yphi = make("r_Yphi", "v >= v1, r > M/10");

    for (const auto& col : sheet.columns) {
        if (!(col.U > 0)) continue;
        const double gauge = dU_per_du(col.U, M);
        for (std::size_t j = 0; j < col.size(); ++j) {
            const CellState& c = col.cells[j];
            if (c.v < opts.v1 || !(c.w > 0)) continue;
            const double x = c.v / M;
            const double r_rel = c.r / M;
            const double tail_p = std::pow(x, -params.p);
            const double tail_q = std::pow(x, -params.q);
            const double floor_term = M * std::pow(r_rel, 0.01);

            auto limit_line = [&](LineAccumulator& a, double value) {
                ++a.line.samples;
                a.upper.add(std::max(0.0, std::abs(value + M) - floor_term) / (M * tail_p));
            };
            limit_line(dur, c.r * c.dU_r() * gauge);
            limit_line(dvr, c.r * c.dv_r());

            const double m = col.mass[j];
            ++mass.line.samples;
            mass.line.positive = mass.line.positive && m > 0;
            mass.lower.add(m / M * std::pow(r_rel, opts.rho_exponent * params.D1 * params.D1 * tail_q * tail_q));
            mass.upper.add(m / M * std::pow(r_rel, opts.sigma_exponent * tail_p * tail_p));

            auto field_line = [&](LineAccumulator& a, double value) {
                ++a.line.samples;
                a.line.positive = a.line.positive && value > 0;
                const double mag = std::abs(value);
                if (params.D1 > 0) a.lower.add(mag / (params.D1 * M * tail_q));
                a.upper.add(mag / (M * tail_p));
                a.scaled.add(mag / (M * tail_q));
            };
            field_line(dvphi, c.w * c.dv_phi);
            if (c.r <= M / 10) {
                field_line(duphi, c.w * c.dU_phi * gauge);
                const double rom = c.r * omega2_from_gauge(c.omega2hat(), c.U, M) / M;
                ++lapse.line.samples;
                lapse.lower.add(rom / std::pow(r_rel, opts.sigma_exponent * tail_p * tail_p));
                lapse.upper.add(rom / std::pow(r_rel, opts.rho_exponent * params.D1 * params.D1 * tail_q * tail_q));
            } else if (c.dU_r() < 0) {
                ++yphi.line.samples;
                const double value = c.r * y_derivative(c);
                yphi.line.positive = yphi.line.positive && value > 0;
                if (params.D1 > 0) yphi.lower.add(std::abs(value) / (params.D1 * tail_q));
                yphi.upper.add(std::abs(value) / tail_p);
                yphi.scaled.add(std::abs(value) / tail_q);
            }
        }
    }
    for (LineAccumulator* a : {&dur, &dvr, &lapse, &mass, &dvphi, &duphi, &yphi}) {
        a->finish(a == &dvphi || a == &duphi ? rep.D1_prime : 0);
        rep.lines.push_back(a->line);
    }
    return rep;
}

double exponential_integral(const std::function<double(double)>& f, double alpha, double a, double b, int sign) {
    if (!(alpha > 0) || !(b > a)) throw DomainError("exponential_integral: need alpha > 0 and b > a");
    if (sign != 1 && sign != -1) throw DomainError("exponential_integral: sign must be +1 or -1");
    // factor out the endpoint exponential so the integrand stays O(1)
    const double ref = sign > 0 ? b : a;
    auto g = [&](double x) { return std::exp(sign * alpha * (x - ref)) * f(x); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 20, 1e-13);
    return std::exp(sign * alpha * ref) * I;
}

double exponential_integral_constant(double alpha, double p, double a, int sign) {
    if (!(alpha > 0) || !(p > 0) || !(a > 0)) throw DomainError("exponential_integral_constant: parameters must be positive");
    if (sign < 0) return 1.0;
    // one integration by parts: I <= e^{alpha b} b^-p / alpha + (p / (alpha a)) I
    if (!(alpha * a > p)) throw DomainError("exponential_integral_constant: growing bound needs alpha a > p");
    return alpha * a / (alpha * a - p);
}

GronwallCheck verify_reverse_gronwall(std::span<const double> t, std::span<const double> psi,
                                      std::span<const double> beta, double A, double tol) {
    const std::size_t n = t.size();
    if (n < 2 || psi.size() != n || beta.size() != n) throw DomainError("verify_reverse_gronwall: mismatched samples");
    if (!(A > 0)) throw DomainError("verify_reverse_gronwall: A must be positive");
    GronwallCheck out;
    out.premise = true;
    out.conclusion = true;
    out.worst_margin = std::numeric_limits<double>::infinity();
    double int_bpsi = 0, int_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(psi[i] > 0) || !(beta[i] > 0)) throw DomainError("verify_reverse_gronwall: psi and beta must be positive");
        if (i > 0) {
            const double h = t[i] - t[i - 1];
            if (!(h > 0)) throw DomainError("verify_reverse_gronwall: t must increase");
            int_bpsi += 0.5 * h * (beta[i] * psi[i] + beta[i - 1] * psi[i - 1]);
            int_b += 0.5 * h * (beta[i] + beta[i - 1]);
        }
        const double need = A + int_bpsi;
        if (psi[i] < need * (1 - tol)) out.premise = false;
        const double bound = A * std::exp(int_b);
        if (psi[i] < bound * (1 - tol)) out.conclusion = false;
        out.worst_margin = std::min(out.worst_margin, psi[i] / bound - 1);
    }
    return out;
}

nlohmann::json to_json(const PowerLawFit& fit) {
    return {{"exponent", fit.exponent},
            {"amplitude", fit.amplitude},
            {"stderr", fit.std_error},
            {"window", {fit.window.lo, fit.window.hi}}};
}

nlohmann::json to_json(const ExponentProfile& profile, const char* station_key) {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : profile.stations) {
        nlohmann::json e = {{station_key, s.station}};
        if (s.fit) {
            e["value"] = s.value;
            e["fit"] = to_json(*s.fit);
        } else {
            e["value"] = nullptr;
        }
        if (!s.notice.empty()) e["notice"] = s.notice;
        st.push_back(e);
    }
    nlohmann::json j = {{"stations", st},
                        {"sigma_fit", {{"slope", profile.sigma_fit.slope}, {"stderr", profile.sigma_fit.std_error}}},
                        {"rho_fit", {{"slope", profile.rho_fit.slope}, {"stderr", profile.rho_fit.std_error}}}};
    j["trend"] = profile.trend ? to_json(*profile.trend) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const GradientLimits& limits) {
    auto samples = [](const std::vector<LimitSample>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& s : v)
            a.push_back({{"u", s.u}, {"v", s.v}, {"value", s.value}, {"gamma", s.gamma}, {"flagged", s.flagged}});
        return a;
    };
    return {{"u1", limits.u1},
            {"v_sing_u1", limits.v_sing_u1},
            {"f1_samples", samples(limits.f1)},
            {"f2_samples", samples(limits.f2)},
            {"f1_decay", limits.f1_decay ? to_json(*limits.f1_decay) : nlohmann::json(nullptr)},
            {"f2_decay", limits.f2_decay ? to_json(*limits.f2_decay) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const AuditReport& audit) {
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : audit.lines)
        lines.push_back({{"name", l.name},
                         {"region", l.region},
                         {"samples", l.samples},
                         {"lower", num(l.lower)},
                         {"upper", num(l.upper)},
                         {"scaled_min", num(l.scaled_min)},
                         {"scaled_max", num(l.scaled_max)},
                         {"prefactor", num(l.prefactor)},
                         {"positive", l.positive}});
    return {{"lines", lines}, {"D1_prime", audit.D1_prime}};
}

nlohmann::json to_json(const ModelParams& p) {
    return {{"M", p.M},   {"p", p.p},   {"q", p.q},   {"D1", p.D1},       {"D2", p.D2},
            {"D3", p.D3}, {"v0", p.v0}, {"U0", p.U0}, {"r_min", p.r_min}, {"r0", p.r0}};
}

}  // namespace nullhorizon
