#pragma once

#include <cmath>
#include <limits>

#include "nullhorizon/core.hpp"

namespace nullhorizon {

// Interior Schwarzschild point. gap = 2M - rS is carried separately so that
// the lapse survives near the horizon where rS rounds to 2M.
template <typename Scalar>
struct SchwarzschildPoint {
    Scalar rS;
    Scalar gap;
    Scalar omega2S;
    Scalar durS;
    Scalar dvrS;
};

template <typename Scalar>
Scalar tortoise(const Scalar& rS, const Scalar& M) {
    using std::log;
    if (!(rS > 0) || !(rS < 2 * M)) throw DomainError("tortoise: rS outside (0, 2M)");
    return rS + 2 * M * log((2 * M - rS) / (2 * M));
}

namespace detail {

// Tortoise coordinate written in y = ln((2M - r)/2M), y < 0.
template <typename Scalar>
Scalar tortoise_of_y(const Scalar& y, const Scalar& M) {
    using std::exp;
    return 2 * M * (1 - exp(y) + y);
}

template <typename Scalar>
Scalar epsilon_of() {
    return std::numeric_limits<Scalar>::epsilon();
}

// x + ln(1 - x), summed as a series for small x where the two terms cancel.
template <typename Scalar>
Scalar x_plus_log1m(const Scalar& x) {
    using std::abs;
    using std::log;
    if (x > Scalar(0.1)) return x + log(1 - x);
    Scalar sum = 0, term = x;
    for (int k = 2; k < 400; ++k) {
        term *= x;
        const Scalar add = term / k;
        sum -= add;
        if (abs(add) <= epsilon_of<Scalar>() * abs(sum)) break;
    }
    return sum;
}

}  // namespace detail

// Inverts the tortoise map: finds rS with tortoise(rS) = (u+v)/2.
// Near the horizon the unknown is ln(gap); elsewhere it is rS itself.
template <typename Scalar>
SchwarzschildPoint<Scalar> solve_rS_from_tortoise(const Scalar& s, const Scalar& M) {
    using std::abs;
    using std::exp;
    using std::log;
    using std::sqrt;
    if (!(s < 0)) throw DomainError("solve_rS: v+u must be negative");
    const Scalar eps = detail::epsilon_of<Scalar>();
    const Scalar two_m = 2 * M;
    const Scalar s_mid = tortoise(Scalar(M), M);  // r = M splits the branches
    const int max_iter = 200;

    if (s <= s_mid) {
        // Horizon branch, r in [M, 2M): h(y) = tortoise_of_y(y) - s, increasing in y.
        Scalar lo = s / two_m - 2;      // h(lo) < 0
        Scalar hi = log(Scalar(0.5));   // r = M, h(hi) >= 0
        Scalar y = s / two_m - 1;       // gap ~ 2M e^{s/2M - 1}
        if (!(y > lo && y < hi)) y = (lo + hi) / 2;
        for (int it = 0; it < max_iter; ++it) {
            const Scalar h = detail::tortoise_of_y(y, M) - s;
            if (h > 0) hi = y; else lo = y;
            const Scalar dh = two_m * (1 - exp(y));
            Scalar next = y - h / dh;
            if (!(next > lo && next < hi)) next = (lo + hi) / 2;
            const Scalar step = abs(next - y);
            y = next;
            if (step <= 4 * eps * (1 + abs(y)) || hi - lo <= 4 * eps * (1 + abs(y))) break;
        }
        const Scalar gap = two_m * exp(y);
        const Scalar r = two_m - gap;
        const Scalar om = gap / r;
        return {r, gap, om, -om / 2, -om / 2};
    }

    // Singular branch, r in (0, M): g(r) = tortoise(r) - s, decreasing in r.
    Scalar lo = 0;
    Scalar hi = M;
    Scalar r = 2 * sqrt(M * (-s));  // s ~ -r^2/4M near the singularity
    if (!(r > lo && r < hi)) r = (lo + hi) / 2;
    for (int it = 0; it < max_iter; ++it) {
        const Scalar g = two_m * detail::x_plus_log1m(r / two_m) - s;
        if (g > 0) lo = r; else hi = r;
        const Scalar dg = -r / (two_m - r);
        Scalar next = r - g / dg;
        if (!(next > lo && next < hi)) next = (lo + hi) / 2;
        const Scalar step = abs(next - r);
        r = next;
        if (step <= 4 * eps * r || hi - lo <= 4 * eps * r) break;
    }
    const Scalar gap = two_m - r;
    const Scalar om = gap / r;
    return {r, gap, om, -om / 2, -om / 2};
}

template <typename Scalar>
SchwarzschildPoint<Scalar> solve_rS(const Scalar& u, const Scalar& v, const Scalar& M) {
    if (!(v + u < 0)) throw DomainError("solve_rS: v+u must be negative");
    return solve_rS_from_tortoise<Scalar>((u + v) / 2, M);
}

template <typename Scalar>
Scalar schwarzschild_kretschmann(const Scalar& rS, const Scalar& M) {
    if (!(rS > 0)) throw DomainError("schwarzschild_kretschmann: rS must be positive");
    const Scalar r3 = rS * rS * rS;
    return 48 * M * M / (r3 * r3);
}

// Regular-gauge lapse of the interior: (2M/r) e^{-r/2M} e^{v/4M}.
template <typename Scalar>
Scalar schwarzschild_omega2hat(const Scalar& rS, const Scalar& v, const Scalar& M) {
    using std::exp;
    return (2 * M / rS) * exp(-rS / (2 * M) + v / (4 * M));
}

// Exact interior state at (U, v) in the regular gauge; U = 0 is the horizon.
CellState schwarzschild_cell(double U, double v, double M);

}  // namespace nullhorizon
