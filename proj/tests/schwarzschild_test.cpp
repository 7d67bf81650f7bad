#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "nullhorizon/diagnostics.hpp"
#include "nullhorizon/schwarzschild.hpp"

using namespace nullhorizon;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// r with r + 2M ln((2M - r)/2M) = s, by plain bisection at 50 digits.
Big bisect_tortoise(const Big& s, const Big& M) {
    Big lo = 0, hi = 2 * M;
    for (int i = 0; i < 400; ++i) {
        const Big mid = (lo + hi) / 2;
        const Big g = mid + 2 * M * boost::multiprecision::log((2 * M - mid) / (2 * M));
        if (g > s) lo = mid; else hi = mid;
    }
    return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("u and U coordinates") {
    CHECK(u_from_U(4.0, 1.0) == 0.0);
    CHECK(u_from_U(4.0 * std::exp(1.0), 1.0) == doctest::Approx(4.0).epsilon(1e-15));
    const Big oracle = 4 * boost::multiprecision::log(Big(0.5));
    CHECK(u_from_U(2.0, 1.0) == doctest::Approx(oracle.convert_to<double>()).epsilon(1e-15));
    for (double U : {1e-9, 1e-3, 0.3, 7.0}) CHECK(U_from_u(u_from_U(U, 1.5), 1.5) == doctest::Approx(U).epsilon(1e-14));
    CHECK_THROWS_AS(u_from_U(0.0, 1.0), DomainError);
}

TEST_CASE("singular-gauge lapse") {
    CHECK(omega2_from_gauge(1.0, 4.0, 1.0) == 1.0);
    CHECK(omega2_from_gauge(2.0, 2.0, 1.0) == 1.0);
    const double om = std::exp(-1 + 30.0 / 4);
    CHECK(omega2_from_gauge(om, 1e-300, 1.0) < 1e-295);
}

TEST_CASE("tortoise coordinate") {
    CHECK(tortoise(1e-12, 1.0) == doctest::Approx(0.0).epsilon(1e-11));
    const Big oracle = 1 - 2 * boost::multiprecision::log(Big(2));
    CHECK(tortoise(1.0, 1.0) == doctest::Approx(oracle.convert_to<double>()).epsilon(1e-15));
    CHECK(tortoise(2.0 - 1e-12, 1.0) < tortoise(2.0 - 1e-6, 1.0));
    CHECK_THROWS_AS(tortoise(2.0, 1.0), DomainError);
}

TEST_CASE("inverse tortoise agrees with a 50-digit bisection") {
    const double M = 1.0;
    for (double s : {-1e-6, -0.01, -0.386, -1.0, -3.0, -10.0, -40.0, -120.0}) {
        const auto pt = solve_rS_from_tortoise(s, M);
        const Big r = bisect_tortoise(Big(s), Big(M));
        const Big gap = 2 * M - r;
        CAPTURE(s);
        CHECK(pt.rS == doctest::Approx(r.convert_to<double>()).epsilon(1e-14));
        CHECK(pt.gap == doctest::Approx(gap.convert_to<double>()).epsilon(1e-12));
        CHECK(pt.omega2S == doctest::Approx((gap / r).convert_to<double>()).epsilon(1e-12));
    }
    const auto mid = solve_rS(0.0, 2 * (1 - 2 * std::log(2.0)), 1.0);
    CHECK(mid.rS == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mid.omega2S == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(solve_rS(-1e-12, 0.0, 1.0).rS < 1e-5);
    CHECK(solve_rS(-200.0, 0.0, 1.0).gap < 1e-20);
    CHECK_THROWS_AS(solve_rS(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("the long-double instantiation agrees with double") {
    for (double s : {-0.2, -5.0, -60.0}) {
        const auto d = solve_rS_from_tortoise(s, 1.0);
        const auto l = solve_rS_from_tortoise<long double>(s, 1.0L);
        CHECK(d.gap == doctest::Approx(static_cast<double>(l.gap)).epsilon(1e-13));
    }
}

TEST_CASE("Schwarzschild curvature") {
    CHECK(schwarzschild_kretschmann(2.0, 1.0) == doctest::Approx(0.75));
    CHECK(schwarzschild_kretschmann(1.0, 1.0) == doctest::Approx(48.0));
    for (double M : {0.5, 1.0, 3.0})
        for (double r : {0.01, 0.3, 1.7}) {
            const double r3 = r * r * r;
            CHECK(schwarzschild_kretschmann(r, M) * r3 * r3 / (M * M) == doctest::Approx(48.0).epsilon(1e-14));
        }
}

TEST_CASE("exact interior cells carry mass M and curvature 48 M^2 / r^6") {
    for (double M : {1.0, 2.5})
        for (double U : {0.0, 1e-8, 0.01, 0.2})
            for (double v : {10.0, 14.0, 30.0}) {
                const double vs = v * M;
                const double Us = U * M;
                if (Us > 0 && u_from_U(Us, M) + vs >= -0.05 * M) continue;
                const CellState s = schwarzschild_cell(Us, vs, M);
                CAPTURE(M);
                CAPTURE(U);
                CAPTURE(v);
                CHECK(hawking_mass(s) == doctest::Approx(M).epsilon(1e-10));
                CHECK(kretschmann(s) == doctest::Approx(48 * M * M / std::pow(s.r, 6)).epsilon(1e-9));
                CHECK(s.dU_r() < 0);
            }
}

TEST_CASE("exact interior cells satisfy the cross-derivative equations") {
    // Richardson-extrapolated centered differences of the closed form
    const double M = 1.0;
    for (auto [U, v] : {std::pair{0.05, 11.0}, {0.1, 11.0}, {0.01, 20.0}}) {
        auto mixed = [&](double h, auto field) {
            const double hU = h * U;
            auto at = [&](double dU, double dv) { return field(schwarzschild_cell(U + dU, v + dv, M)); };
            return (at(hU, h) - at(hU, -h) - at(-hU, h) + at(-hU, -h)) / (4 * hU * h);
        };
        auto extrapolated = [&](auto field) {
            const double h = 1e-2;
            return (4 * mixed(h / 2, field) - mixed(h, field)) / 3;
        };
        const auto rhs = rhs_cross_derivatives(schwarzschild_cell(U, v, M));
        CAPTURE(U);
        CHECK(rhs.w == doctest::Approx(extrapolated([](const CellState& s) { return s.w; })).epsilon(1e-7));
        CHECK(rhs.sigma == doctest::Approx(extrapolated([](const CellState& s) { return s.sigma; })).epsilon(1e-7));
        CHECK(rhs.phi == 0.0);
    }
}
