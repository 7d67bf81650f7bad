#include "nullhorizon/initial_data.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hermite.hpp"
#include "nullhorizon/schwarzschild.hpp"

namespace nullhorizon {

HorizonProfile HorizonProfile::power_law(double D, double q, double M) {
    if (D < 0) throw DataError("horizon profile amplitude must be nonnegative");
    HorizonProfile p;
    p.kind_ = ProfileKind::power_law;
    p.M_ = M;
    p.amp_[0] = D;
    p.exp_[0] = q;
    return p;
}

HorizonProfile HorizonProfile::two_term(double D_slow, double p_exp, double D_fast, double q, double M) {
    if (D_slow < 0 || D_fast < 0) throw DataError("horizon profile amplitudes must be nonnegative");
    HorizonProfile p;
    p.kind_ = ProfileKind::two_term;
    p.M_ = M;
    p.amp_[0] = D_slow;
    p.exp_[0] = p_exp;
    p.amp_[1] = D_fast;
    p.exp_[1] = q;
    return p;
}

HorizonProfile HorizonProfile::table(std::vector<std::pair<double, double>> samples, double M) {
    if (samples.size() < 2) throw DataError("horizon table needs at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [v, y] = samples[i];
        if (!std::isfinite(v) || !std::isfinite(y)) throw DataError("horizon table: non-finite entry");
        if (!(v > 0)) throw DataError("horizon table: v must be positive");
        if (!(y > 0)) throw DataError("horizon table: r dv phi must be strictly positive (sign changes are not supported)");
        if (i > 0 && !(v > samples[i - 1].first)) throw DataError("horizon table: v must be strictly increasing");
    }
    HorizonProfile p;
    p.kind_ = ProfileKind::custom_table;
    p.M_ = M;
    p.samples_ = std::move(samples);
    const std::size_t n = p.samples_.size();
    p.lv_.resize(n);
    p.ly_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.lv_[i] = std::log(p.samples_[i].first);
        p.ly_[i] = std::log(p.samples_[i].second);
    }
    // Fritsch-Carlson slopes keep the interpolant monotone between samples.
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (p.ly_[i + 1] - p.ly_[i]) / (p.lv_[i + 1] - p.lv_[i]);
    p.slope_.assign(n, 0);
    p.slope_[0] = secant[0];
    p.slope_[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (secant[i - 1] * secant[i] <= 0) continue;
        const double h0 = p.lv_[i] - p.lv_[i - 1];
        const double h1 = p.lv_[i + 1] - p.lv_[i];
        const double w1 = 2 * h1 + h0;
        const double w2 = h1 + 2 * h0;
        p.slope_[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
    }
    return p;
}

HorizonProfile HorizonProfile::read_table(const std::filesystem::path& path, double M) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open horizon table " + path.string());
    std::vector<std::pair<double, double>> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double v, y;
        if (!(ls >> v)) continue;
        if (!(ls >> y)) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        samples.emplace_back(v, y);
    }
    return table(std::move(samples), M);
}

double HorizonProfile::operator()(double v) const {
    switch (kind_) {
        case ProfileKind::power_law:
            return amp_[0] * std::pow(v / M_, -exp_[0]);
        case ProfileKind::two_term:
            return amp_[0] * std::pow(v / M_, -exp_[0]) + amp_[1] * std::pow(v / M_, -exp_[1]);
        case ProfileKind::custom_table: {
            const double x = std::log(v);
            const std::size_t n = lv_.size();
            if (x <= lv_.front()) return std::exp(ly_.front() + slope_.front() * (x - lv_.front()));
            if (x >= lv_.back()) {
                const double tail = (ly_[n - 1] - ly_[n - 2]) / (lv_[n - 1] - lv_[n - 2]);
                return std::exp(ly_.back() + tail * (x - lv_.back()));
            }
            const auto it = std::upper_bound(lv_.begin(), lv_.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - lv_.begin()) - 1;
            const double h = lv_[i + 1] - lv_[i];
            return std::exp(detail::hermite(ly_[i], slope_[i], ly_[i + 1], slope_[i + 1], h, x - lv_[i]).value);
        }
    }
    return 0;
}

bool HorizonProfile::is_zero() const noexcept {
    return kind_ != ProfileKind::custom_table && amp_[0] == 0 && amp_[1] == 0;
}

double HorizonProfile::corridor_violation(const ModelParams& params, double a, double b) const {
    const int n = 400;
    double worst = 0;
    for (int i = 0; i <= n; ++i) {
        const double v = a * std::pow(b / a, static_cast<double>(i) / n);
        const double y = (*this)(v);
        const double lower = params.D1 * std::pow(v / params.M, -params.q);
        const double upper = params.D2 * std::pow(v / params.M, -params.p);
        const double tiny = std::numeric_limits<double>::min();
        if (y < lower) worst = std::max(worst, (lower - y) / std::max(lower, tiny));
        if (y > upper) worst = std::max(worst, upper > 0 ? (y - upper) / upper : std::numeric_limits<double>::infinity());
    }
    return worst;
}

IngoingProfile IngoingProfile::constant(double rYphi, double dUr0) {
    return IngoingProfile{{{0.0, rYphi}}, dUr0};
}

double IngoingProfile::rYphi(double U) const {
    if (samples.empty()) return 0;
    if (samples.size() == 1 || U <= samples.front().first) return samples.front().second;
    if (U >= samples.back().first) return samples.back().second;
    const auto it = std::upper_bound(samples.begin(), samples.end(), U,
                                     [](double x, const auto& s) { return x < s.first; });
    const auto& [U1, y1] = *it;
    const auto& [U0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (U - U0) / (U1 - U0);
}

double IngoingProfile::sup_abs() const {
    double s = 0;
    for (const auto& [U, y] : samples) s = std::max(s, std::abs(y));
    return s;
}

double gauge_on_H0(double v, const ModelParams& params) {
    if (v < params.v0) throw DomainError("gauge_on_H0: v below v0");
    return std::exp(-1 + v / (4 * params.M));
}

double gauge_on_Hbar0(double U, double r_at, const ModelParams& params) {
    if (!(r_at > 0)) throw DomainError("gauge_on_Hbar0: radius must be positive");
    if (U < 0) throw DomainError("gauge_on_Hbar0: U must be nonnegative");
    return schwarzschild_omega2hat(r_at, params.v0, params.M);
}

CellState HorizonData::cell(std::size_t j, double M) const {
    CellState s;
    s.U = 0;
    s.v = v[j];
    s.w = r[j] * r[j];
    s.sigma = -1 + v[j] / (4 * M);
    s.phi = phi[j];
    s.dU_w = 2 * r[j] * dUr[j];
    s.dv_w = 2 * r[j] * dvr[j];
    s.dU_phi = -dUr[j] * r2Yphi[j] / s.w;
    s.dv_phi = rdvphi[j] / r[j];
    s.dU_sigma = dUsigma[j];
    s.dv_sigma = 1 / (4 * M);
    return with_coordinates(s, M);
}

namespace {

template <typename F>
double tail_integral(F&& f, double a) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double t) { return f(a + t); }, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

HorizonData integrate_horizon_constraint(const HorizonProfile& profile, const IngoingProfile& ingoing,
                                         const ModelParams& params, double v_end, const HorizonOptions& opts) {
    const double M = params.M;
    const double v0 = params.v0;
    if (!(v_end > v0)) throw DomainError("integrate_horizon_constraint: v_end must exceed v0");
    if (ingoing.dUr0 > 0) throw DataError("dU r at the corner must be nonpositive");
    const bool source_free = profile.is_zero() && ingoing.sup_abs() == 0;
    if (ingoing.dUr0 == 0 && !source_free)
        throw DataError("dU r at the corner must be negative when scalar data are present");
    if (ingoing.sup_abs() + std::abs(ingoing.dUr0) > params.D3 * (1 + 1e-12))
        throw DataError("ingoing data exceed the D3 bound");
    const double anchor = v_end + opts.anchor_margin * M;
    if (double bad = profile.corridor_violation(params, v0, anchor); bad > 1e-9)
        throw DataError("horizon profile leaves the D1/D2 corridor (relative violation " + std::to_string(bad) + ")");

    // Substep h divides dv_out an even number of times; stiff corner coupling tightens it.
    double h_target = opts.h_max * M;
    const double om0 = gauge_on_H0(v0, params);
    const double r_corner_guess = 2 * M;
    if (!source_free) h_target = std::min(h_target, 2.0 * r_corner_guess * std::abs(ingoing.dUr0) / om0);
    const long n_out = static_cast<long>(std::ceil((v_end - v0) / opts.dv_out - 1e-9));
    const double dv_out = (v_end - v0) / n_out;  // samples land on v_end
    int n_sub = std::max(2, static_cast<int>(std::ceil(dv_out / h_target)));
    if (n_sub % 2) ++n_sub;
    const double h = dv_out / n_sub;
    const long K = static_cast<long>(std::ceil((anchor - v0) / h));
    const double va = v0 + K * h;

    auto psi = [&](double v) { return profile(v); };

    // Tail anchors with r = 2M beyond va.
    double dvr_a = 0, gap_a = 0, phi_a = 0;
    if (!profile.is_zero()) {
        dvr_a = tail_integral([&](double v) { double y = psi(v); return std::exp(-(v - va) / (4 * M)) * y * y; }, va) / (2 * M);
        gap_a = tail_integral([&](double v) { double y = psi(v); return -std::expm1(-(v - va) / (4 * M)) * y * y; }, va) * 2;
        phi_a = -tail_integral(psi, va) / (2 * M);
    }
    const double residual = gap_a / (2 * M);
    if (!(residual <= opts.anchor_tol))
        throw DataError("anchor residual " + std::to_string(residual) + " too large: increase v_max or the anchor margin");

    // Backward pass for (dv r, gap, phi) on v_k = v0 + k h.
    std::vector<double> dvr(K + 1), gap(K + 1), phi(K + 1);
    dvr[K] = dvr_a;
    gap[K] = gap_a;
    phi[K] = phi_a;
    using State = std::array<double, 3>;
    auto rhs = [&](double v, const State& y) -> State {
        const double r = 2 * M - y[1];
        if (!(r > 0)) throw DataError("horizon radius became nonpositive");
        const double s = psi(v);
        return {y[0] / (4 * M) - s * s / r, -y[0], s / r};
    };
    for (long k = K; k > 0; --k) {
        const double v = v0 + k * h;
        const State y{dvr[k], gap[k], phi[k]};
        auto axpy = [](const State& a, double c, const State& b) { return State{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]}; };
        const State k1 = rhs(v, y);
        const State k2 = rhs(v - h / 2, axpy(y, -h / 2, k1));
        const State k3 = rhs(v - h / 2, axpy(y, -h / 2, k2));
        const State k4 = rhs(v - h, axpy(y, -h, k3));
        for (int c = 0; c < 3; ++c) {
            const double inc = h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
            (c == 0 ? dvr : c == 1 ? gap : phi)[k - 1] = y[c] - inc;
        }
    }
    for (long k = 0; k <= K; ++k)
        if (gap[k] < 0 || dvr[k] < 0) throw DataError("horizon integration produced r > 2M or dv r < 0");

    // Forward pass for r^2 Y phi and dU sigma, step 2h using stored nodes as midpoints.
    const double r_corner = 2 * M - gap[0];
    const double rdUr_corner = r_corner * ingoing.dUr0;
    auto dUr_at = [&](double v, double r) {
        return (rdUr_corner - M * (std::exp(-1 + v / (4 * M)) - std::exp(-1 + v0 / (4 * M)))) / r;
    };
    auto fwd = [&](long k, const std::array<double, 2>& y) -> std::array<double, 2> {
        const double v = v0 + k * h;
        const double r = 2 * M - gap[k];
        const double w = r * r;
        const double s = psi(v);
        const double dUr = dUr_at(v, r);
        const double om = std::exp(-1 + v / (4 * M));
        double dZ = s;
        if (y[0] != 0) dZ += y[0] * (2 * dvr[k] / r - om / (4 * r * (-dUr)));
        const double dUphi = -dUr * y[0] / w;
        const double dvphi = s / r;
        const double dUs = -2 * dUphi * dvphi + om / (2 * w) + 2 * dUr * dvr[k] / w;
        return {dZ, dUs};
    };
    std::vector<double> Z(K + 1, 0), dUsig(K + 1, 0);
    Z[0] = r_corner * ingoing.rYphi(0);
    dUsig[0] = om0 / (2 * M);
    const long k_last = n_out * n_sub;
    for (long k = 0; k + 2 <= k_last; k += 2) {
        const double H = 2 * h;
        const std::array<double, 2> y{Z[k], dUsig[k]};
        const auto a1 = fwd(k, y);
        const auto a2 = fwd(k + 1, {y[0] + H / 2 * a1[0], y[1] + H / 2 * a1[1]});
        const auto a3 = fwd(k + 1, {y[0] + H / 2 * a2[0], y[1] + H / 2 * a2[1]});
        const auto a4 = fwd(k + 2, {y[0] + H * a3[0], y[1] + H * a3[1]});
        Z[k + 2] = y[0] + H / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0]);
        dUsig[k + 2] = y[1] + H / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1]);
    }

    HorizonData out;
    out.anchor_v = va;
    out.anchor_residual = residual;
    for (long j = 0; j <= n_out; ++j) {
        const long k = j * n_sub;
        const double v = v0 + k * h;
        const double r = 2 * M - gap[k];
        out.v.push_back(v);
        out.gap.push_back(gap[k]);
        out.r.push_back(r);
        out.dvr.push_back(dvr[k]);
        out.phi.push_back(phi[k]);
        out.rdvphi.push_back(psi(v));
        out.r2Yphi.push_back(Z[k]);
        out.dUr.push_back(j == 0 ? ingoing.dUr0 : dUr_at(v, r));
        out.dUsigma.push_back(dUsig[k]);
    }
    return out;
}

std::array<double, NullSlice::kComponents> NullSlice::interp(double U, std::array<double, kComponents>* dy) const {
    if (U < 0 || U > U_.back() * (1 + 1e-12)) throw DomainError("NullSlice: U outside the ingoing slice");
    std::size_t i = static_cast<std::size_t>(std::upper_bound(U_.begin(), U_.end(), U) - U_.begin());
    i = std::clamp<std::size_t>(i, 1, U_.size() - 1) - 1;
    const double h = U_[i + 1] - U_[i];
    std::array<double, kComponents> y{};
    for (int c = 0; c < kComponents; ++c) {
        const auto hv = detail::hermite(y_[i][c], dy_[i][c], y_[i + 1][c], dy_[i + 1][c], h, U - U_[i]);
        y[c] = hv.value;
        if (dy) (*dy)[c] = hv.slope;
    }
    return y;
}

namespace {

struct SliceGeometry {
    double om2hat;
    double dUsigma;
};

SliceGeometry slice_geometry(double U, const ModelParams& params) {
    const double M = params.M;
    double rS = 2 * M;
    if (U > 0) rS = solve_rS(u_from_U(U, M), params.v0, M).rS;
    const double om = gauge_on_Hbar0(U, rS, params);
    return {om, (om / 2) * (1 / rS + 1 / (2 * M))};
}

}  // namespace

CellState NullSlice::at(double U) const {
    const auto y = interp(U);
    const auto g = slice_geometry(U, params_);
    const double r = y[0];
    const double dUr = y[1] * g.om2hat;
    CellState s;
    s.U = U;
    s.v = params_.v0;
    s.w = r * r;
    s.sigma = std::log(g.om2hat);
    s.phi = y[2];
    s.dU_w = 2 * r * dUr;
    s.dv_w = 2 * y[3];
    s.dU_phi = -dUr * profile_.rYphi(U) / r;
    s.dv_phi = y[5] / r;
    s.dU_sigma = g.dUsigma;
    s.dv_sigma = y[4];
    return with_coordinates(s, params_.M);
}

double NullSlice::mass_at(double U) const { return interp(U)[6]; }

NullSlice build_ingoing_data(const IngoingProfile& profile, const HorizonData& horizon, const ModelParams& params,
                             int intervals) {
    const double M = params.M;
    if (params.U0 >= 4 * M * std::exp(-params.v0 / (4 * M)))
        throw DataError("U0 reaches the Schwarzschild singularity of the gauge on the ingoing slice");
    if (profile.sup_abs() + std::abs(profile.dUr0) > params.D3 * (1 + 1e-12))
        throw DataError("ingoing data exceed the D3 bound");
    for (const auto& [U, y] : profile.samples)
        if (y < 0) throw DataError("r Y phi on the ingoing slice must be nonnegative");
    if (horizon.size() == 0) throw DataError("horizon data are empty");
    if (std::abs(horizon.dUr.front() - profile.dUr0) > 0) throw DataError("corner dU r mismatch between horizon and ingoing data");

    using Y = std::array<double, NullSlice::kComponents>;
    auto rhs = [&](double U, const Y& y) -> Y {
        const auto g = slice_geometry(U, params);
        const double r = y[0];
        if (!(r > 0)) throw DataError("radius reached zero on the ingoing slice: U0 too large");
        const double dUr = y[1] * g.om2hat;
        const double dUphi = -dUr * profile.rYphi(U) / r;
        const double dvr = y[3] / r;
        const double dvphi = y[5] / r;
        const double w = r * r;
        return {dUr,
                -r * dUphi * dUphi / g.om2hat,
                dUphi,
                -g.om2hat / 4,
                -2 * dUphi * dvphi + g.om2hat / (2 * w) + 2 * dUr * dvr / w,
                -dvr * dUphi,
                -2 * w * dvr * dUphi * dUphi / g.om2hat};
    };

    NullSlice slice;
    slice.params_ = params;
    slice.profile_ = profile;
    const double r = horizon.r.front();
    const double om0 = gauge_on_H0(params.v0, params);
    const double P = profile.dUr0 / om0;
    Y y{r, P, horizon.phi.front(), r * horizon.dvr.front(), 1 / (4 * M), horizon.rdvphi.front(),
        r / 2 * (1 + 4 * P * horizon.dvr.front())};
    const double h = params.U0 / intervals;
    slice.U_.reserve(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
        const double U = i * h;
        const Y k1 = rhs(U, y);
        slice.U_.push_back(U);
        slice.y_.push_back(y);
        slice.dy_.push_back(k1);
        if (i == intervals) break;
        auto axpy = [](const Y& a, double c, const Y& b) {
            Y o;
            for (int j = 0; j < NullSlice::kComponents; ++j) o[j] = a[j] + c * b[j];
            return o;
        };
        const Y k2 = rhs(U + h / 2, axpy(y, h / 2, k1));
        const Y k3 = rhs(U + h / 2, axpy(y, h / 2, k2));
        const Y k4 = rhs(U + h, axpy(y, h, k3));
        for (int j = 0; j < NullSlice::kComponents; ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    for (std::size_t i = 1; i < slice.U_.size(); ++i)
        if (slice.y_[i][0] > slice.y_[i - 1][0])
            throw DataError("radius increasing along the ingoing slice");
    return slice;
}

}  // namespace nullhorizon
