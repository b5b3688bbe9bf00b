#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>

namespace oracle {

/// Bessel J_n(x) from its power series, summed until the terms vanish.
inline double bessel_j(int n, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / k;
    double sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= -half * half / (static_cast<double>(m) * (m + n));
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

/// Plain bisection on a bracketing interval.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
    double flo = f(lo);
    for (int i = 0; i < 400 && hi - lo > tol * std::max(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Lumped ladder dispersion from the series impedance and shunt admittance of
/// one cell: cos k = 1 + Z Y / 2. Returns k in (0, pi].
inline double ladder_wavevector(double omega, double L, double C_shunt, double C_J) {
    const std::complex<double> j(0.0, 1.0);
    const auto Zs = 1.0 / (1.0 / (j * omega * L) + j * omega * C_J);
    const auto Y = j * omega * C_shunt;
    const double c = (1.0 + 0.5 * Zs * Y).real();
    return std::acos(std::clamp(c, -1.0, 1.0));
}

using Vec2 = std::array<std::complex<double>, 2>;

/// Classical fourth-order Runge-Kutta for y' = f(x, y), fixed step.
inline Vec2 rk4(const std::function<Vec2(double, const Vec2&)>& f, Vec2 y, double x0, double x1, int steps) {
    const double h = (x1 - x0) / steps;
    auto axpy = [](const Vec2& a, double s, const Vec2& b) {
        return Vec2{a[0] + s * b[0], a[1] + s * b[1]};
    };
    double x = x0;
    for (int i = 0; i < steps; ++i) {
        const Vec2 k1 = f(x, y);
        const Vec2 k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1));
        const Vec2 k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2));
        const Vec2 k4 = f(x + h, axpy(y, h, k3));
        for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        x += h;
    }
    return y;
}

/// Shooting solution of the counterpropagating pair eps_S' = i c_s w,
/// w' = i c_i eps_S + i kappa w with eps_S(0) = 1 and w(L) = 0. Linear in the
/// unknown w(0), so two shots determine it. Returns |eps_S(L)|.
inline double shooting_transmission(std::complex<double> c_s, std::complex<double> c_i, double kappa, double L,
                                    int steps = 4000) {
    const std::complex<double> j(0.0, 1.0);
    auto f = [&](double, const Vec2& y) { return Vec2{j * c_s * y[1], j * c_i * y[0] + j * kappa * y[1]}; };
    const Vec2 a = rk4(f, {1.0, 0.0}, 0.0, L, steps);
    const Vec2 b = rk4(f, {0.0, 1.0}, 0.0, L, steps);
    // w(L) = a1 + t b1 = 0
    const std::complex<double> t = -a[1] / b[1];
    return std::abs(a[0] + t * b[0]);
}

/// Seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::uint64_t bits() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

}  // namespace oracle
