#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <map>

#include "ctwpc/device.hpp"
#include "ctwpc/dispersion.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/phase_matching.hpp"
#include "ctwpc/units.hpp"
#include "oracles.hpp"

using namespace ctwpc;
using Catch::Approx;

namespace {

const CellParams kCell = presets::fitted_cell();

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

/// Linear-dispersion grid scan: the grid frequency with the smallest |residual|.
double scan_minimum(auto&& residual, double lo_ghz, double hi_ghz, double step_ghz) {
    double best = lo_ghz, best_r = 1e300;
    for (double f = lo_ghz; f <= hi_ghz; f += step_ghz) {
        const double r = std::fabs(residual(f));
        if (r < best_r) {
            best_r = r;
            best = f;
        }
    }
    return best;
}

/// Bare ladder wavevector of one mode, independent of the library.
double k_bare(Mode mode, double omega) {
    return oracle::ladder_wavevector(omega, kCell.L_J, mode == Mode::Sigma ? kCell.C_g : kCell.C_g + 2.0 * kCell.C_i,
                                     kCell.C_J);
}

/// Sign changes of f on a 1 MHz grid, each refined by bisection.
std::vector<double> bracketed_roots(auto&& f, double lo_ghz, double hi_ghz) {
    std::vector<double> roots;
    const double step = 0.001;
    double prev = lo_ghz, fprev = f(prev);
    for (double x = lo_ghz + step; x <= hi_ghz; x += step) {
        const double fx = f(x);
        if ((fx < 0.0) != (fprev < 0.0)) {
            roots.push_back(oracle::bisect([&](double y) { return f(y); }, prev, x, 1e-15));
        }
        prev = x;
        fprev = fx;
    }
    return roots;
}

}  // namespace

TEST_CASE("linear circulation point: general and simplified forms agree", "[phase]") {
    oracle::Gen g(31);
    for (int trial = 0; trial < 100; ++trial) {
        const double vd = g.uniform(5.0, 60.0);
        const double vs = vd * g.uniform(1.05, 6.0);
        const double wp = ghz_to_rad(g.uniform(0.5, 6.0));
        const auto [ws, wi] = circulation_point_lowfreq(wp, vs, vd);
        CHECK(ws == Approx(wp * (vs / vd - 1.0)).epsilon(1e-12));
        CHECK(wi == ws + 2.0 * wp);
    }
}

TEST_CASE("linear circulation point for the fitted velocity ratio", "[phase]") {
    const double wp = ghz_to_rad(3.0);
    const auto [ws, wi] = circulation_point_lowfreq(wp, 3.104, 1.0);
    CHECK(rad_to_ghz(ws) == Approx(6.312).epsilon(1e-12));
    CHECK(rad_to_ghz(wi) == Approx(12.312).epsilon(1e-12));

    // Brute-force scan of k_S + k_I - 2 k_P with k = w / v.
    const double f = scan_minimum([](double fs) { return fs / 3.104 + (fs + 6.0) / 3.104 - 2.0 * 3.0; }, 0.0, 20.0,
                                  0.001);
    CHECK(f == Approx(6.312).margin(0.001));

    const auto [w0, w0i] = circulation_point_lowfreq(wp, 2.0, 2.0);
    CHECK(w0 == 0.0);
    CHECK(w0i == 2.0 * wp);
}

TEST_CASE("linear coupler point", "[phase]") {
    const double wp = ghz_to_rad(2.6);
    CHECK(rad_to_ghz(coupler_point_lowfreq(wp, 3.104, 1.0)) == Approx(8.0704).epsilon(1e-12));
    const double f = scan_minimum([](double fs) { return fs / 3.104 - 2.6 / 1.0; }, 0.0, 20.0, 0.001);
    CHECK(f == Approx(8.07).margin(0.001));
    CHECK(coupler_point_lowfreq(0.0, 3.104, 1.0) == 0.0);

    oracle::Gen g(32);
    for (int trial = 0; trial < 100; ++trial) {
        const double vd = g.uniform(5.0, 60.0);
        const double vs = vd * g.uniform(1.05, 6.0);
        const double w = ghz_to_rad(g.uniform(0.5, 6.0));
        CHECK(coupler_point_lowfreq(w, vs, vd) - circulation_point_lowfreq(w, vs, vd).first ==
              Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("corrected roots approach the linear estimate at low pump frequency", "[phase]") {
    const auto d = derive_constants(kCell);
    const auto deviation = [&](double fp) {
        const double wp = ghz_to_rad(fp);
        const auto roots = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.0, kCell);
        REQUIRE(!roots.empty());
        return roots.front().omega_s / circulation_point_lowfreq(wp, d.v_sigma0, d.v_delta0).first - 1.0;
    };
    for (double fp : {0.05, 0.1, 0.2, 0.3}) CHECK(std::fabs(deviation(fp)) < 1e-3);
    // The lattice correction is quadratic in frequency.
    CHECK(deviation(0.4) / deviation(0.2) == Approx(4.0).epsilon(1e-3));
    CHECK(deviation(0.2) / deviation(0.1) == Approx(4.0).epsilon(1e-3));

    // Cubic expansion of the ladder: k = (w/v)(1 + L w^2 (C_J/2 + C/24)).
    const auto k3 = [&](double w, double C) {
        return std::sqrt(kCell.L_J * C) * w * (1.0 + kCell.L_J * w * w * (kCell.C_J / 2.0 + C / 24.0));
    };
    const double wp = ghz_to_rad(0.5);
    const double Cd = kCell.C_g + 2.0 * kCell.C_i;
    const double ws = oracle::bisect(
        [&](double w) { return k3(w, kCell.C_g) + k3(w + 2.0 * wp, kCell.C_g) - 2.0 * k3(wp, Cd); }, 0.1 * wp, 10.0 * wp);
    const auto roots = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.0, kCell);
    CHECK(roots.front().omega_s == Approx(ws).epsilon(2e-5));
}

TEST_CASE("unpumped roots match a bisection oracle on the bare ladder dispersion", "[phase]") {
    const double sigma_co = rad_to_ghz(cutoff(Mode::Sigma, kCell));
    for (double fp : {2.0, 3.0, 4.0, 4.63}) {
        const double wp = ghz_to_rad(fp);
        const double kp = k_bare(Mode::Delta, wp);
        // Circulation: k(w_S) + k(w_S + 2 w_P) - 2 k_P on the Sigma mode.
        const auto circ = [&](double fs) {
            return k_bare(Mode::Sigma, ghz_to_rad(fs)) + k_bare(Mode::Sigma, ghz_to_rad(fs + 2.0 * fp)) - 2.0 * kp;
        };
        const auto ref = bracketed_roots(circ, 0.001, sigma_co - 2.0 * fp - 1e-6);
        const auto got = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.0, kCell);
        REQUIRE(ref.size() == got.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(rad_to_ghz(got[i].omega_s) == Approx(ref[i]).margin(1e-8));
            CHECK(std::fabs(got[i].kappa) < 1e-10);
        }
        // Coupler: k(w_S) - k_P.
        const auto coup = [&](double fs) { return k_bare(Mode::Sigma, ghz_to_rad(fs)) - kp; };
        const auto cref = bracketed_roots(coup, 0.001, sigma_co - 1e-6);
        const auto cgot = solve_corrected(ProcessKind::TunableCoupling, Direction::Forward, wp, 0.0, kCell);
        REQUIRE(cref.size() == cgot.size());
        CHECK(rad_to_ghz(cgot[0].omega_s) == Approx(cref[0]).margin(1e-8));
    }
}

TEST_CASE("pumped roots: residual and bisection on a 1 MHz grid", "[phase]") {
    const double eps = 0.05;
    for (auto kind : {ProcessKind::Circulation, ProcessKind::TunableCoupling}) {
        for (double fp : {2.5, 3.5, 4.5}) {
            const double wp = ghz_to_rad(fp);
            const auto pump = make_pump(Mode::Delta, wp, eps, kCell);
            const auto got = solve_corrected(kind, Direction::Forward, wp, eps, kCell);
            const double hi = rad_to_ghz(signal_band_limit(kind, wp, pump, kCell));
            const auto ref = bracketed_roots(
                [&](double fs) { return momentum_residual(kind, ghz_to_rad(fs), wp, pump, kCell); }, 0.001, hi - 1e-9);
            REQUIRE(ref.size() == got.size());
            for (std::size_t i = 0; i < ref.size(); ++i) {
                CHECK(std::fabs(momentum_residual(kind, got[i].omega_s, wp, pump, kCell)) < 1e-10);
                CHECK(rad_to_ghz(got[i].omega_s) == Approx(ref[i]).margin(1e-7));
            }
        }
    }
}

TEST_CASE("dispersion pulls the circulation gap below the linear estimate", "[phase]") {
    const auto d = derive_constants(kCell);
    const double wp = ghz_to_rad(4.63);
    const auto roots = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.0, kCell);
    REQUIRE(!roots.empty());
    CHECK(roots.front().omega_s < circulation_point_lowfreq(wp, d.v_sigma0, d.v_delta0).first);
}

TEST_CASE("match points conserve energy exactly", "[phase][property]") {
    oracle::Gen g(33);
    for (int trial = 0; trial < 60; ++trial) {
        const double wp = ghz_to_rad(g.uniform(1.0, 5.0));
        const double eps = g.uniform(0.0, 0.1);
        const auto kind = trial % 2 ? ProcessKind::Circulation : ProcessKind::TunableCoupling;
        for (const auto& p : solve_corrected(kind, Direction::Forward, wp, eps, kCell)) {
            if (kind == ProcessKind::Circulation) {
                CHECK(p.omega_i == p.omega_s + 2.0 * p.omega_p);
            } else {
                CHECK(p.omega_i == p.omega_s);
            }
            CHECK(std::fabs(p.kappa) < 1e-10);
            CHECK(p.k_s > 0.0);
        }
    }
}

TEST_CASE("roots move continuously with the pump frequency", "[phase][property]") {
    oracle::Gen g(34);
    for (int trial = 0; trial < 30; ++trial) {
        const double wp = ghz_to_rad(g.uniform(1.5, 4.5));
        const double dw = kTwoPi * 1e3;
        const auto a = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.02, kCell);
        const auto b = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp + dw, 0.02, kCell);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(b[i].omega_s - a[i].omega_s) < kTwoPi * 1e6);
    }
}

TEST_CASE("raising the pump amplitude shifts roots one way", "[phase][property]") {
    for (auto kind : {ProcessKind::Circulation, ProcessKind::TunableCoupling}) {
        for (double fp : {2.0, 3.0, 4.0}) {
            const double wp = ghz_to_rad(fp);
            std::vector<double> roots;
            for (double eps = 0.0; eps <= 0.1001; eps += 0.01) {
                roots.push_back(solve_corrected(kind, Direction::Forward, wp, eps, kCell).front().omega_s);
            }
            int up = 0, down = 0;
            for (std::size_t i = 1; i < roots.size(); ++i) {
                up += roots[i] > roots[i - 1];
                down += roots[i] < roots[i - 1];
            }
            INFO(to_string(kind) << " at " << fp << " GHz");
            CHECK((up == 0 || down == 0));
            CHECK(up + down == static_cast<int>(roots.size()) - 1);
        }
    }
}

TEST_CASE("solver errors", "[phase]") {
    // Delta cutoff of the fitted cell is 9.2 GHz.
    CHECK(kind_of([] { solve_corrected(ProcessKind::Circulation, Direction::Forward, ghz_to_rad(10.0), 0.0, kCell); }) ==
          ErrorKind::PumpAboveCutoff);
    CHECK(kind_of([] {
              solve_corrected(ProcessKind::CirculationAliased, Direction::Forward, ghz_to_rad(2.5), 0.05, kCell);
          }) == ErrorKind::NoSolutionInBand);
}

TEST_CASE("gap map: direction relations and budget", "[phase]") {
    std::vector<double> pumps;
    for (int i = 0; i <= 300; ++i) pumps.push_back(2.0 + 0.01 * i);
    const auto t0 = std::chrono::steady_clock::now();
    const auto curves = gap_map(all_gap_curves(), pumps, kCell, 0.02);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(seconds < 10.0);

    std::map<std::string, std::map<double, double>> by_name;
    for (const auto& c : curves) {
        for (auto [fp, fs] : c.points) by_name[c.name()].emplace(fp, fs);
    }
    const auto curve = [&](ProcessKind k, Direction d) {
        GapCurve c;
        c.kind = k;
        c.direction = d;
        return by_name.at(c.name());
    };
    const auto ci_fw = curve(ProcessKind::Circulation, Direction::Forward);
    const auto ci_bw = curve(ProcessKind::Circulation, Direction::Backward);
    REQUIRE(ci_fw.size() > 250);
    REQUIRE(ci_fw.size() == ci_bw.size());
    for (auto [fp, fs] : ci_fw) CHECK(ci_bw.at(fp) == Approx(fs + 2.0 * fp).epsilon(1e-12));

    const auto co_fw = curve(ProcessKind::TunableCoupling, Direction::Forward);
    const auto co_bw = curve(ProcessKind::TunableCoupling, Direction::Backward);
    CHECK(co_fw == co_bw);
    CHECK(co_fw.size() == pumps.size());
}
