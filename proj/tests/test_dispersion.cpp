#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "ctwpc/device.hpp"
#include "ctwpc/dispersion.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"
#include "oracles.hpp"

using namespace ctwpc;
using Catch::Approx;

namespace {

const CellParams kCell = presets::fitted_cell();

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("long-wavelength limit recovers the mode velocity", "[dispersion]") {
    const auto d = derive_constants(kCell);
    for (auto [mode, co, v] : {std::tuple{Mode::Sigma, d.omega_sigma_co, d.v_sigma0},
                               std::tuple{Mode::Delta, d.omega_delta_co, d.v_delta0}}) {
        const double w = 1e-4 * co;
        const double k = wavevector(mode, w, kCell);
        CHECK(std::fabs(k * v * kGiga / w - 1.0) < 1e-6);
    }
}

TEST_CASE("wavevector reaches pi at the cutoff", "[dispersion]") {
    for (Mode mode : {Mode::Sigma, Mode::Delta}) {
        CHECK(wavevector(mode, cutoff(mode, kCell), kCell) == Approx(kPi).margin(1e-6));
        CHECK(kind_of([&] { wavevector(mode, 1.001 * cutoff(mode, kCell), kCell); }) == ErrorKind::AboveCutoff);
    }
    CHECK(kind_of([&] { wavevector(Mode::Sigma, 0.0, kCell); }) == ErrorKind::AboveCutoff);
}

TEST_CASE("Sigma wavevector at 8 GHz matches a bisection of the ladder relation", "[dispersion]") {
    const double w = ghz_to_rad(8.0);
    const double L = kCell.L_J;
    // 1 - cos k = C L w^2 / (2 (1 - C_J L w^2)), solved for k by bisection.
    const double rhs = kCell.C_g * L * w * w / (2.0 * (1.0 - kCell.C_J * L * w * w));
    const double k_ref = oracle::bisect([&](double k) { return 1.0 - std::cos(k) - rhs; }, 0.0, kPi, 1e-16);
    CHECK(std::fabs(wavevector(Mode::Sigma, w, kCell) - k_ref) < 1e-10);
    // Same answer from the cell impedance and admittance.
    CHECK(std::fabs(oracle::ladder_wavevector(w, L, kCell.C_g, kCell.C_J) - k_ref) < 1e-10);
}

TEST_CASE("dispersion agrees with the ladder oracle across both bands", "[dispersion][property]") {
    oracle::Gen g(21);
    for (int trial = 0; trial < 400; ++trial) {
        const Mode mode = trial % 2 ? Mode::Sigma : Mode::Delta;
        const double w = g.uniform(0.01, 0.97) * cutoff(mode, kCell);
        const double ref = oracle::ladder_wavevector(w, kCell.L_J, mode_capacitance(mode, kCell), kCell.C_J);
        CHECK(wavevector(mode, w, kCell) == Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("k increases and phase velocity decreases with frequency", "[dispersion][property]") {
    for (Mode mode : {Mode::Sigma, Mode::Delta}) {
        const double co = cutoff(mode, kCell);
        double k_prev = 0.0, v_prev = 1e300;
        for (int i = 1; i < 1000; ++i) {
            const double w = co * i / 1000.0;
            const double k = wavevector(mode, w, kCell);
            const double v = phase_velocity(mode, w, kCell);
            CHECK(k > k_prev);
            CHECK(v < v_prev);
            k_prev = k;
            v_prev = v;
        }
    }
}

TEST_CASE("group velocity is the slope of the dispersion", "[dispersion]") {
    for (Mode mode : {Mode::Sigma, Mode::Delta}) {
        const double co = cutoff(mode, kCell);
        for (double frac : {0.05, 0.3, 0.6, 0.9}) {
            const double w = frac * co;
            const double h = 1e-5 * w;
            const double dk = (wavevector(mode, w + h, kCell) - wavevector(mode, w - h, kCell)) / (2.0 * h);
            CHECK(group_velocity(mode, w, kCell) == Approx(1.0 / dk / kGiga).epsilon(1e-7));
        }
    }
}

TEST_CASE("SPM inductance", "[dispersion]") {
    const double L = kCell.L_J;
    CHECK(spm_inductance(L, 0.0, 1.0) == L);

    const double x = 4.0 * 0.1 * std::sin(kPi / 4.0);
    const double ref = x / (2.0 * oracle::bessel_j(1, x));
    CHECK(spm_inductance(L, 0.1, kPi / 2.0) / L == Approx(ref).epsilon(1e-12));
    CHECK(std::fabs(spm_inductance(L, 0.1, kPi / 2.0) / L - 1.0100) < 1e-4);

    for (double ka : {0.3, 1.0, 2.5}) {
        const double eps = 1e-3;
        const double lead = (spm_inductance(L, eps, ka) / L - 1.0) / (eps * eps);
        CHECK(lead == Approx(2.0 * std::pow(std::sin(ka / 2.0), 2)).epsilon(1e-5));
    }
}

TEST_CASE("XPM inductance", "[dispersion]") {
    const double L = kCell.L_J;
    CHECK(xpm_inductance(L, 0.0, 1.0) == L);

    const double x = 4.0 * 0.1 * std::sin(kPi / 4.0);
    CHECK(xpm_inductance(L, 0.1, kPi / 2.0) / L == Approx(1.0 / oracle::bessel_j(0, x)).epsilon(1e-12));
    CHECK(std::fabs(xpm_inductance(L, 0.1, kPi / 2.0) / L - 1.020304) < 1e-4);

    // Cross modulation is twice the self modulation to leading order.
    for (double eps : {1e-3, 3e-3, 1e-2}) {
        const double ka = 1.2;
        const double spm = spm_inductance(L, eps, ka) - L;
        const double xpm = xpm_inductance(L, eps, ka) - L;
        CHECK(std::fabs(xpm - 2.0 * spm) / L < 20.0 * std::pow(eps, 4));
    }
}

TEST_CASE("Bessel validity bounds", "[dispersion]") {
    const double xs = spm_argument_bound();
    const double x0 = xpm_argument_bound();
    CHECK(2.0 * oracle::bessel_j(1, xs) / xs == Approx(0.5).margin(1e-12));
    CHECK(oracle::bessel_j(0, x0) == Approx(0.5).margin(1e-12));

    const double ka = kPi;  // sin(ka/2) = 1
    CHECK_NOTHROW(spm_inductance(kCell.L_J, 0.99 * xs / 4.0, ka));
    CHECK(kind_of([&] { spm_inductance(kCell.L_J, 1.01 * xs / 4.0, ka); }) == ErrorKind::AmplitudeOutOfRange);
    CHECK(kind_of([&] { xpm_inductance(kCell.L_J, 1.01 * x0 / 4.0, ka); }) == ErrorKind::AmplitudeOutOfRange);
}

TEST_CASE("renormalized wavevectors", "[dispersion][property]") {
    const double w = ghz_to_rad(6.0);
    const PumpContext none{0.0, 1.0, Mode::Delta};
    for (Mode mode : {Mode::Sigma, Mode::Delta}) {
        CHECK(same_bits(wavevector(mode, w, kCell, none), wavevector(mode, w, kCell)));
    }
    oracle::Gen g(22);
    for (int trial = 0; trial < 200; ++trial) {
        const PumpContext pump{g.uniform(1e-4, 0.3), g.uniform(0.1, 3.0), trial % 2 ? Mode::Delta : Mode::Sigma};
        const double wl = g.uniform(0.05, 0.5) * cutoff(Mode::Delta, kCell);
        for (Mode mode : {Mode::Sigma, Mode::Delta}) {
            CHECK(wavevector(mode, wl, kCell, pump) > wavevector(mode, wl, kCell));
        }
    }
}

TEST_CASE("flux and amplitude conversions", "[dispersion][property]") {
    CHECK(flux_from_amplitude(0.0, 1.3) == 0.0);
    CHECK(quanta_to_reduced(0.12) == Approx(0.24 * kPi).epsilon(1e-15));
    oracle::Gen g(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const double eps = g.uniform(0.0, 0.5);
        const double k = g.uniform(1e-3, kPi - 1e-3);
        CHECK(amplitude_from_flux(flux_from_amplitude(eps, k), k) == Approx(eps).epsilon(1e-14).margin(1e-300));
        const double q = g.uniform(0.0, 0.3);
        CHECK(reduced_to_quanta(quanta_to_reduced(q)) == Approx(q).epsilon(1e-15));
    }
}

TEST_CASE("self-consistent pump wavevector", "[dispersion]") {
    const double w = ghz_to_rad(4.5);
    const double eps = 0.1;
    const double k = self_consistent_wavevector(Mode::Delta, w, eps, kCell);
    // Fixed point: k equals the dispersion with the SPM inductance evaluated at k.
    const double L = spm_inductance(kCell.L_J, eps, k);
    CHECK(wavevector_with_inductance(Mode::Delta, w, kCell, L) == Approx(k).epsilon(1e-12));
    CHECK(k > wavevector(Mode::Delta, w, kCell));
    CHECK(self_consistent_wavevector(Mode::Delta, w, 0.0, kCell) == wavevector(Mode::Delta, w, kCell));
    CHECK(kind_of([&] { self_consistent_wavevector(Mode::Delta, ghz_to_rad(12.0), 0.01, kCell); }) ==
          ErrorKind::PumpAboveCutoff);
}
