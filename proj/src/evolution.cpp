#include "nullhorizon/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "hermite.hpp"

namespace nullhorizon {

CrossDerivatives rhs_cross_derivatives(const CellState& s) {
    if (!(s.w > 0)) throw DomainError("rhs_cross_derivatives: w must be positive (singularity contact)");
    const double om = std::exp(s.sigma);
    const double w = s.w;
    CrossDerivatives d;
    d.w = -om / 2;
    d.sigma = -2 * s.dU_phi * s.dv_phi + om / (2 * w) + s.dU_w * s.dv_w / (2 * w * w);
    d.phi = -(s.dU_w * s.dv_phi + s.dv_w * s.dU_phi) / (2 * w);
    return d;
}

namespace {

bool finite(const CellState& s) {
    return std::isfinite(s.w) && std::isfinite(s.sigma) && std::isfinite(s.phi) && std::isfinite(s.dU_w) &&
           std::isfinite(s.dv_w) && std::isfinite(s.dU_sigma) && std::isfinite(s.dv_sigma) &&
           std::isfinite(s.dU_phi) && std::isfinite(s.dv_phi);
}

}  // namespace

namespace {

// The lapse is updated through lr = ln(r * omega2hat), whose mixed derivative
// lacks the 1/w^2 term of sigma's and stays bounded along Schwarzschild.
struct Renormalized {
    double w, lr, phi, dU_w, dU_lr, dU_phi, dv_w, dv_lr, dv_phi;
};

Renormalized renormalize(const CellState& s) {
    const double hw = 0.5 / s.w;
    return {s.w, s.sigma + 0.5 * std::log(s.w), s.phi, s.dU_w, s.dU_sigma + hw * s.dU_w, s.dU_phi,
            s.dv_w, s.dv_sigma + hw * s.dv_w, s.dv_phi};
}

struct Source {
    double w, lr, phi;
};

Source source(const Renormalized& s) {
    if (!(s.w > 0)) throw DomainError("rhs_cross_derivatives: w must be positive (singularity contact)");
    const double om = std::exp(s.lr) / std::sqrt(s.w);
    Source f;
    f.w = -om / 2;
    f.lr = -2 * s.dU_phi * s.dv_phi + om / (4 * s.w);
    f.phi = -(s.dU_w * s.dv_phi + s.dv_w * s.dU_phi) / (2 * s.w);
    return f;
}

std::array<double, 9> fields(const Renormalized& s) {
    return {s.w, s.lr, s.phi, s.dU_w, s.dU_lr, s.dU_phi, s.dv_w, s.dv_lr, s.dv_phi};
}

bool finite(const Renormalized& s) {
    for (double x : fields(s))
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

DiamondResult diamond_step(const CellState& sw_in, const CellState& se_in, const CellState& nw_in, double dU,
                           double dv, double M, int max_iter) {
    DiamondResult out;
    if (dv == 0) {
        out.ne = nw_in;
        out.converged = true;
        return out;
    }
    const Renormalized sw = renormalize(sw_in), se = renormalize(se_in), nw = renormalize(nw_in);
    const Source Fsw = source(sw), Fse = source(se), Fnw = source(nw);
    Source Fne = Fsw;
    const double area = dU * dv;

    Renormalized ne{}, last{};
    const auto fse = fields(se), fnw = fields(nw);
    for (int it = 1; it <= max_iter; ++it) {
        const double cw = (Fsw.w + Fse.w + Fnw.w + Fne.w) / 4;
        const double clr = (Fsw.lr + Fse.lr + Fnw.lr + Fne.lr) / 4;
        const double cphi = (Fsw.phi + Fse.phi + Fnw.phi + Fne.phi) / 4;
        ne.w = nw.w + se.w - sw.w + cw * area;
        ne.lr = nw.lr + se.lr - sw.lr + clr * area;
        ne.phi = nw.phi + se.phi - sw.phi + cphi * area;
        ne.dU_w = se.dU_w + 0.5 * (Fse.w + Fne.w) * dv;
        ne.dU_lr = se.dU_lr + 0.5 * (Fse.lr + Fne.lr) * dv;
        ne.dU_phi = se.dU_phi + 0.5 * (Fse.phi + Fne.phi) * dv;
        ne.dv_w = nw.dv_w + 0.5 * (Fnw.w + Fne.w) * dU;
        ne.dv_lr = nw.dv_lr + 0.5 * (Fnw.lr + Fne.lr) * dU;
        ne.dv_phi = nw.dv_phi + 0.5 * (Fnw.phi + Fne.phi) * dU;
        out.iterations = it;
        if (!(ne.w > 0) || !finite(ne)) break;
        if (it > 1) {
            const auto a = fields(ne), b = fields(last);
            bool settled = true;
            for (std::size_t k = 0; k < a.size() && settled; ++k) {
                const double scale = std::abs(a[k]) + std::abs(fse[k]) + std::abs(fnw[k]);
                settled = std::abs(a[k] - b[k]) <= 1e-13 * scale;
            }
            if (settled) {
                out.converged = true;
                break;
            }
        }
        last = ne;
        Fne = source(ne);
    }
    CellState s;
    s.U = se_in.U;
    s.v = nw_in.v;
    s.w = ne.w;
    s.phi = ne.phi;
    s.dU_w = ne.dU_w;
    s.dv_w = ne.dv_w;
    s.dU_phi = ne.dU_phi;
    s.dv_phi = ne.dv_phi;
    if (ne.w > 0) {
        const double hw = 0.5 / ne.w;
        s.sigma = ne.lr - 0.5 * std::log(ne.w);
        s.dU_sigma = ne.dU_lr - hw * ne.dU_w;
        s.dv_sigma = ne.dv_lr - hw * ne.dv_w;
    } else {
        out.converged = false;
    }
    out.ne = with_coordinates(s, M);
    return out;
}

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::reached_vmax: return "reached_vmax";
        case StopReason::reached_rmin: return "reached_rmin";
        case StopReason::step_underflow: return "step_underflow";
        case StopReason::upstream_end: return "upstream_end";
        case StopReason::resolution_limit: return "resolution_limit";
    }
    return "unknown";
}

StepControls StepControls::refined(double factor) const {
    StepControls c = *this;
    c.base_dv /= factor;
    c.max_dw /= factor;
    c.max_dsigma /= factor;
    c.eta_u /= factor;
    c.du_max /= factor;
    c.store_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(store_stride * factor)));
    c.keep_head = static_cast<std::size_t>(std::llround(keep_head * factor));
    return c;
}

std::vector<double> GridSheet::U_nodes() const {
    std::vector<double> U;
    U.reserve(columns.size());
    for (const auto& c : columns) U.push_back(c.U);
    return U;
}

namespace {

// Column under construction or in the residual window, with cached mixed derivatives.
struct Work {
    Column col;
    std::vector<CrossDerivatives> F;
};

std::size_t bracket(const std::vector<CellState>& cells, double v) {
    auto it = std::upper_bound(cells.begin(), cells.end(), v, [](double x, const CellState& c) { return x < c.v; });
    std::size_t i = static_cast<std::size_t>(it - cells.begin());
    return std::clamp<std::size_t>(i, 1, cells.size() - 1) - 1;
}

CellState interpolate_pair(const CellState& a, const CellState& b, const CrossDerivatives& Fa,
                           const CrossDerivatives& Fb, double v, double M) {
    const double h = b.v - a.v;
    const double t = v - a.v;
    if (t == 0) return a;
    if (t == h) return b;
    CellState s;
    s.U = a.U;
    s.v = v;
    const auto w = detail::hermite(a.w, a.dv_w, b.w, b.dv_w, h, t);
    const auto sg = detail::hermite(a.sigma, a.dv_sigma, b.sigma, b.dv_sigma, h, t);
    const auto ph = detail::hermite(a.phi, a.dv_phi, b.phi, b.dv_phi, h, t);
    s.w = w.value;
    s.dv_w = w.slope;
    s.sigma = sg.value;
    s.dv_sigma = sg.slope;
    s.phi = ph.value;
    s.dv_phi = ph.slope;
    s.dU_w = detail::hermite(a.dU_w, Fa.w, b.dU_w, Fb.w, h, t).value;
    s.dU_sigma = detail::hermite(a.dU_sigma, Fa.sigma, b.dU_sigma, Fb.sigma, h, t).value;
    s.dU_phi = detail::hermite(a.dU_phi, Fa.phi, b.dU_phi, Fb.phi, h, t).value;
    return with_coordinates(s, M);
}

// Value at x of the cubic through four points.
double lagrange4(const double x[4], const double y[4], double at) {
    double sum = 0;
    for (int i = 0; i < 4; ++i) {
        double l = 1;
        for (int j = 0; j < 4; ++j)
            if (j != i) l *= (at - x[j]) / (x[i] - x[j]);
        sum += l * y[i];
    }
    return sum;
}

// As interpolate_cells, with the v-slopes taken from the cubic through the four
// surrounding nodes where they exist: the Hermite slope is a power of h less accurate.
CellState interpolate_node(const std::vector<CellState>& cells, const std::vector<CrossDerivatives>& F,
                           std::size_t i, double v, double M) {
    CellState s = interpolate_pair(cells[i], cells[i + 1], F[i], F[i + 1], v, M);
    if (i == 0 || i + 2 >= cells.size() || s.v == cells[i].v || s.v == cells[i + 1].v) return s;
    const CellState* c[4] = {&cells[i - 1], &cells[i], &cells[i + 1], &cells[i + 2]};
    double x[4], y[4];
    for (int k = 0; k < 4; ++k) x[k] = c[k]->v;
    for (int k = 0; k < 4; ++k) y[k] = c[k]->dv_w;
    s.dv_w = lagrange4(x, y, v);
    for (int k = 0; k < 4; ++k) y[k] = c[k]->dv_sigma;
    s.dv_sigma = lagrange4(x, y, v);
    for (int k = 0; k < 4; ++k) y[k] = c[k]->dv_phi;
    s.dv_phi = lagrange4(x, y, v);
    return s;
}

CellState interpolate_cells(const std::vector<CellState>& cells, const std::vector<CrossDerivatives>& F,
                            std::size_t i, double v, double M) {
    return interpolate_pair(cells[i], cells[i + 1], F[i], F[i + 1], v, M);
}

std::vector<CrossDerivatives> cross_all(const std::vector<CellState>& cells) {
    std::vector<CrossDerivatives> F;
    F.reserve(cells.size());
    for (const auto& c : cells) F.push_back(rhs_cross_derivatives(c));
    return F;
}

double mass_rate_v(const CellState& s) {
    // d_v m = -2 r^2 Omega^-2 d_U r (d_v phi)^2
    return -2 * s.w * std::exp(-s.sigma) * s.dU_r() * s.dv_phi * s.dv_phi;
}

// Derivative at x of the parabola through three points.
double lagrange_slope(const double x[3], const double y[3], double at) {
    double d = 0;
    for (int i = 0; i < 3; ++i) {
        double term = 0;
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            double prod = 1 / (x[i] - x[j]);
            for (int k = 0; k < 3; ++k)
                if (k != i && k != j) prod *= (at - x[k]) / (x[i] - x[k]);
            term += prod;
        }
        d += y[i] * term;
    }
    return d;
}

double normalized_defect(double second, double dsigma, double dr, double r, double dphi) {
    const double a = second;
    const double b = -dsigma * dr;
    const double c = r * dphi * dphi;
    const double norm = std::abs(a) + std::abs(b) + std::abs(c);
    if (norm == 0) return 0;
    return (a + b + c) / norm;
}

bool in_range(const Column& c, double v) { return v >= c.cells.front().v && v <= c.cells.back().v; }

double dUr_at(const Work& w, double v, double M) {
    const auto& cells = w.col.cells;
    const std::size_t i = bracket(cells, v);
    return interpolate_cells(cells, w.F, i, v, M).dU_r();
}

void fill_res_v(Column& col) {
    const auto& cells = col.cells;
    const std::size_t n = cells.size();
    col.res_v.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 3) return;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const std::size_t a = j - 1;
        const double x[3] = {cells[a].v, cells[a + 1].v, cells[a + 2].v};
        const double y[3] = {cells[a].dv_r(), cells[a + 1].dv_r(), cells[a + 2].dv_r()};
        const CellState& s = cells[j];
        const double second = lagrange_slope(x, y, s.v);
        col.res_v[j] = normalized_defect(second, s.dv_sigma, s.dv_r(), s.r, s.dv_phi);
    }
}

// Centered stencil (prev, self, next) where next covers v, else backward (prev2, prev, self),
// else forward for the first column.
void fill_res_u(Work& self, const Work* prev2, const Work* prev, const Work* next, const Work* next2, double M) {
    auto& col = self.col;
    col.res_u.assign(col.cells.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < col.cells.size(); ++j) {
        const CellState& s = col.cells[j];
        const Work* st[3] = {nullptr, nullptr, nullptr};
        if (prev && next && in_range(next->col, s.v) && in_range(prev->col, s.v)) {
            st[0] = prev; st[1] = &self; st[2] = next;
        } else if (prev2 && prev && in_range(prev2->col, s.v) && in_range(prev->col, s.v)) {
            st[0] = prev2; st[1] = prev; st[2] = &self;
        } else if (next && next2 && in_range(next2->col, s.v)) {
            st[0] = &self; st[1] = next; st[2] = next2;
        } else {
            continue;
        }
        double x[3], y[3];
        for (int k = 0; k < 3; ++k) {
            x[k] = st[k]->col.U;
            y[k] = st[k] == &self ? s.dU_r() : dUr_at(*st[k], s.v, M);
        }
        const double second = lagrange_slope(x, y, s.U);
        col.res_u[j] = normalized_defect(second, s.dU_sigma, s.dU_r(), s.r, s.dU_phi);
    }
}

double focus_floor(const StepControls& c, double v) {
    double f = c.w_floor;
    for (const auto& w : c.focus)
        if (std::abs(v - w.v_center) <= w.half_width) f = std::min(f, w.w_floor);
    return f;
}

bool in_focus(const StepControls& c, double v) {
    for (const auto& w : c.focus)
        if (std::abs(v - w.v_center) <= w.half_width) return true;
    return false;
}

double next_dU(const Column& prev, const StepControls& c, double M) {
    double dU = std::numeric_limits<double>::infinity();
    for (const auto& s : prev.cells) {
        const double floor = focus_floor(c, s.v);
        if (s.dU_w < 0) dU = std::min(dU, c.eta_u * std::max(s.w, floor) / -s.dU_w);
        const double dU_lr = s.dU_sigma + s.dU_w / (2 * s.w);
        if (s.w >= floor && dU_lr != 0) dU = std::min(dU, c.eta_u / std::abs(dU_lr));
    }
    if (prev.U > 0) {
        dU = std::min(dU, prev.U * std::expm1(c.du_max / (4 * M)));
        dU = std::max(dU, prev.U * std::expm1(c.du_min / (4 * M)));
    }
    return dU;
}

class Marcher {
public:
    Marcher(const ModelParams& p, const StepControls& c, GridSheet& sheet) : p_(p), c_(c), sheet_(sheet) {}

    Work march(const Work& prev, const NullSlice& ingoing, double U) {
        const double M = p_.M;
        const double w_stop = p_.r_min * p_.r_min;
        Work out;
        out.col.U = U;
        CellState se = ingoing.at(U);
        out.col.cells.push_back(se);
        out.col.mass.push_back(ingoing.mass_at(U));
        const double dU = U - prev.col.U;
        const auto& pc = prev.col.cells;

        std::size_t i = 0;     // pc[i].v <= current v < pc[i+1].v
        CellState sw = pc[0];
        out.col.stop = StopReason::reached_vmax;
        while (true) {
            const double v = se.v;
            if (v >= c_.v_max * (1 - 1e-15)) { out.col.stop = StopReason::reached_vmax; break; }
            while (i + 1 < pc.size() && pc[i + 1].v <= v) ++i;
            if (i + 1 >= pc.size()) { out.col.stop = StopReason::upstream_end; break; }
            const double target = std::min(pc[i + 1].v, c_.v_max);
            double dv = target - v;
            // slopes at both ends of the step: here and on the previous column at the target
            const CellState& ahead = pc[i + 1];
            const double slope_w = std::max(std::abs(se.dv_w), std::abs(ahead.dv_w));
            const double slope_sigma = std::max(std::abs(se.dv_sigma), std::abs(ahead.dv_sigma));
            const double allow = std::min(c_.max_dw / (slope_w + 1e-300), c_.max_dsigma / (slope_sigma + 1e-300));
            while (dv > allow && dv > c_.dv_min) dv /= 2;

            bool accepted = false;
            bool resolution_lost = false;
            const double v_rate = std::abs(se.dv_w) / se.w + std::abs(se.dv_sigma);
            CellState nw, ne;
            while (dv >= c_.dv_min) {
                const double vn = (dv == target - v) ? target : v + dv;
                nw = (vn == pc[i + 1].v) ? pc[i + 1] : interpolate_node(pc, prev.F, i, vn, M);
                const DiamondResult r = diamond_step(sw, se, nw, dU, vn - v, M);
                ++sheet_.cells_computed;
                ne = r.ne;
                const bool ok = r.converged && std::abs(ne.w - se.w) <= c_.max_dw &&
                                std::abs(ne.sigma - se.sigma) <= c_.max_dsigma;
                if (ok) { accepted = true; break; }
                if (r.converged && ne.w <= w_stop) { accepted = true; break; }
                ++sheet_.rejected_steps;
                // dv already resolves v here, so the U-step is what fails
                if (!r.converged && dv * v_rate <= 1e-3) { resolution_lost = true; break; }
                dv /= 2;
            }
            if (resolution_lost) { out.col.stop = StopReason::resolution_limit; break; }
            if (!accepted) { out.col.stop = StopReason::step_underflow; break; }
            if (ne.w <= w_stop) { out.col.stop = StopReason::reached_rmin; break; }
            // the previous column no longer resolves this radius
            if (nw.w - ne.w > c_.max_u_ratio * ne.w) { out.col.stop = StopReason::resolution_limit; break; }
            if (!finite(ne)) throw EvolutionError("non-finite state", ne.U, ne.v);
            const double m_prev = out.col.mass.back();
            out.col.mass.push_back(m_prev + 0.5 * (mass_rate_v(se) + mass_rate_v(ne)) * (ne.v - se.v));
            out.col.cells.push_back(ne);
            sw = nw;
            se = ne;
        }
        out.F = cross_all(out.col.cells);
        return out;
    }

private:
    const ModelParams& p_;
    const StepControls& c_;
    GridSheet& sheet_;
};

Work horizon_column(const HorizonData& h, const NullSlice& ingoing, const ModelParams& p, const StepControls& c) {
    Work w;
    w.col.U = 0;
    w.col.stop = StopReason::reached_vmax;
    for (std::size_t j = 0; j < h.size(); ++j) {
        CellState s = h.cell(j, p.M);
        const bool past = s.v > c.v_max * (1 + 1e-15);
        if (past && j > 0) {
            // end the column exactly at v_max
            const CellState& a = w.col.cells.back();
            s = interpolate_pair(a, s, rhs_cross_derivatives(a), rhs_cross_derivatives(s), c.v_max, p.M);
        }
        if (j == 0) {
            w.col.mass.push_back(ingoing.mass_at(0));
        } else {
            const CellState& a = w.col.cells.back();
            w.col.mass.push_back(w.col.mass.back() + 0.5 * (mass_rate_v(a) + mass_rate_v(s)) * (s.v - a.v));
        }
        w.col.cells.push_back(s);
        if (past) break;
    }
    if (w.col.cells.back().v < c.v_max * (1 - 1e-12)) throw DataError("horizon data end before v_max");
    w.F = cross_all(w.col.cells);
    return w;
}

}  // namespace

CellState interpolate_column(const Column& column, double v, double M) {
    if (!in_range(column, v)) throw DomainError("interpolate_column: v outside the column");
    if (column.size() == 1) return column.cells.front();
    const std::size_t i = bracket(column.cells, v);
    const CellState& a = column.cells[i];
    const CellState& b = column.cells[i + 1];
    if (v == a.v) return a;
    if (v == b.v) return b;
    return interpolate_pair(a, b, rhs_cross_derivatives(a), rhs_cross_derivatives(b), v, M);
}

double interpolate_mass(const Column& column, double v) {
    if (!in_range(column, v)) throw DomainError("interpolate_mass: v outside the column");
    if (column.size() == 1) return column.mass.front();
    const std::size_t i = bracket(column.cells, v);
    const CellState& a = column.cells[i];
    const CellState& b = column.cells[i + 1];
    return detail::hermite(column.mass[i], mass_rate_v(a), column.mass[i + 1], mass_rate_v(b), b.v - a.v, v - a.v)
        .value;
}

GridSheet evolve(const NullSlice& ingoing, const HorizonData& horizon, const ModelParams& params,
                 const StepControls& controls, const ColumnObserver& observer) {
    params.validate();
    const double M = params.M;
    if (!(controls.v_max > params.v0)) throw DomainError("evolve: v_max must exceed v0");
    GridSheet sheet;
    sheet.params = params;
    sheet.controls = controls;
    Marcher marcher(params, controls, sheet);

    std::deque<Work> window;
    auto keep = [&](const Column& c, bool last) {
        if (last || c.index < controls.keep_head || c.index % controls.store_stride == 0) return true;
        return in_focus(controls, c.v_end());
    };
    // Finalize window[k]: residuals from its neighbours, then store or drop.
    auto finalize = [&](std::size_t k, bool last) {
        Work& self = window[k];
        const Work* prev2 = k >= 2 ? &window[k - 2] : nullptr;
        const Work* prev = k >= 1 ? &window[k - 1] : nullptr;
        const Work* next = k + 1 < window.size() ? &window[k + 1] : nullptr;
        const Work* next2 = k + 2 < window.size() ? &window[k + 2] : nullptr;
        fill_res_u(self, prev2, prev, next, next2, M);
        fill_res_v(self.col);
        if (observer) observer(self.col);
        if (keep(self.col, last)) sheet.columns.push_back(self.col);
    };

    window.push_back(horizon_column(horizon, ingoing, params, controls));
    window.back().col.index = 0;
    std::size_t computed = 1;
    std::size_t pending = 0;  // next column index to finalize
    double U = 0;
    while (U < params.U0 && computed < controls.max_columns) {
        const Work& prev = window.back();
        const double dU = next_dU(prev.col, controls, M);
        const double left = params.U0 - U;
        // split the last two steps evenly rather than leave a sliver column
        double Un = left <= dU ? params.U0 : (left < 2 * dU ? U + left / 2 : U + dU);
        if (params.U0 - Un < 1e-3 * dU) Un = params.U0;
        if (!(Un > U)) break;
        Work w = marcher.march(prev, ingoing, Un);
        w.col.index = computed++;
        window.push_back(std::move(w));
        U = Un;
        // a column is complete once two later columns exist
        while (pending + 2 < computed) {
            finalize(pending - window.front().col.index, false);
            ++pending;
        }
        while (window.size() > 5) window.pop_front();
    }
    while (pending < computed) {
        finalize(pending - window.front().col.index, pending + 1 == computed);
        ++pending;
    }
    sheet.columns_computed = computed;
    return sheet;
}

ResidualSummary summarize_residuals(const GridSheet& sheet, double r_floor) {
    ResidualSummary s;
    double sum = 0;
    for (const auto& c : sheet.columns) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (c.cells[j].r < r_floor) continue;
            const double ru = c.res_u[j];
            const double rv = c.res_v[j];
            if (std::isfinite(ru)) s.max_res_u = std::max(s.max_res_u, std::abs(ru));
            if (std::isfinite(rv)) s.max_res_v = std::max(s.max_res_v, std::abs(rv));
            if (std::isfinite(ru) && std::isfinite(rv)) {
                sum += ru * ru + rv * rv;
                ++s.samples;
            }
        }
    }
    s.l2_res = s.samples ? std::sqrt(sum / s.samples) : 0;
    return s;
}

double convergence_order(double coarse_error, double fine_error, double ratio) {
    if (!(coarse_error > 0) || !(fine_error > 0)) throw DomainError("convergence_order: errors must be positive");
    return std::log(coarse_error / fine_error) / std::log(ratio);
}

ResidualSummary with_order(ResidualSummary coarse, const ResidualSummary& fine, double ratio) {
    coarse.order_estimate = convergence_order(coarse.l2_res, fine.l2_res, ratio);
    return coarse;
}

}  // namespace nullhorizon
