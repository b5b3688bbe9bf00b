#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "ctwpc/coupled_mode.hpp"
#include "ctwpc/device.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/pipelines.hpp"
#include "ctwpc/units.hpp"
#include "oracles.hpp"

using namespace ctwpc;
using Catch::Approx;

namespace {

const CellParams kCell = presets::fitted_cell();

ProcessConfig circulation(cplx pump_bw, double length = 400.0) {
    ProcessConfig c;
    c.kind = ProcessKind::Circulation;
    c.pump_bw = pump_bw;
    c.length = length;
    return c;
}

// Representative wavevectors of a matched circulation point.
const SignedWavevectors kK{0.35, -0.62, 0.485};

double alpha_of(cplx pump) { return attenuation_constant(circulation(pump), kK.k_s, kK.k_i, kK.k_p); }

/// Pump amplitude giving a requested alpha L on a 400-cell line.
cplx pump_for(double alpha_length, double phase = 0.0) {
    const double unit = alpha_of(1.0);
    return std::polar(std::sqrt(alpha_length / 400.0 / unit), phase);
}

// Coupling coefficients of eps_S' = i c_s w, w' = i c_i eps_S + i kappa w.
std::pair<cplx, cplx> coefficients(cplx product, const SignedWavevectors& k) {
    const double g = 0.25 * k.k_p * k.k_p;
    return {g * std::conj(product) * k.k_i, g * product * k.k_s};
}

double db(double amplitude) { return 20.0 * std::log10(amplitude); }

}  // namespace

TEST_CASE("attenuation constant scaling", "[coupled]") {
    CHECK(alpha_of(0.0) == 0.0);
    CHECK(alpha_of(0.06) == Approx(4.0 * alpha_of(0.03)).epsilon(1e-14));
    CHECK(alpha_of(0.03) == Approx(0.25 * kK.k_p * kK.k_p * std::sqrt(-kK.k_i * kK.k_s) * 0.03 * 0.03).epsilon(1e-14));

    ProcessConfig coupler;
    coupler.kind = ProcessKind::TunableCoupling;
    coupler.pump_fw = 0.03;
    coupler.pump_bw = 0.03;
    CHECK(attenuation_constant(coupler, kK.k_s, kK.k_i, kK.k_p) == Approx(2.0 * alpha_of(0.03)).epsilon(1e-14));

    try {
        attenuation_constant(circulation(0.03), 0.3, 0.6, 0.5);
        FAIL("expected WrongPropagationSigns");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::WrongPropagationSigns);
    }
}

TEST_CASE("uniform solution: boundary values and closed forms", "[coupled]") {
    const auto cfg = circulation(pump_for(1.7, 0.4));
    const cplx eps0{0.3, -0.1};
    const auto sol = solve_uniform(cfg, kK, eps0);
    const double aL = sol.alpha * cfg.length;
    CHECK(aL == Approx(1.7).epsilon(1e-12));
    CHECK(std::abs(sol.eps_s.front() - eps0) < 1e-15);
    CHECK(std::abs(sol.eps_i.back()) < 1e-15);
    CHECK(std::abs(sol.eps_s.back() / eps0) == Approx(sol.total_attenuation).epsilon(1e-13));
    const double e2 = std::exp(-2.0 * aL);
    CHECK(std::abs(sol.eps_i.front()) ==
          Approx(std::abs(eps0) * std::sqrt(kK.k_s / -kK.k_i) * (1.0 - e2) / (1.0 + e2)).epsilon(1e-13));
}

TEST_CASE("uniform solution: idler phase follows twice the pump phase", "[coupled]") {
    for (double phase : {0.0, 0.7, -2.1, 3.0}) {
        const auto sol = solve_uniform(circulation(pump_for(1.0, phase)), kK, 1.0);
        const cplx expected = -cplx(0.0, 1.0) * std::polar(1.0, 2.0 * phase);
        for (std::size_t j = 0; j + 1 < sol.x.size(); j += 50) {
            CHECK(std::abs(sol.eps_i[j] / std::abs(sol.eps_i[j]) - expected) < 1e-12);
        }
    }
}

TEST_CASE("total attenuation examples", "[coupled]") {
    CHECK(total_attenuation(0.0) == 1.0);
    const auto zero = solve_uniform(circulation(0.0), kK, 1.0);
    CHECK(zero.total_attenuation == 1.0);
    for (const auto& e : zero.eps_i) CHECK(std::abs(e) == 0.0);

    const double aL = std::log(10.0) / 2.0;
    CHECK(total_attenuation(aL) == Approx(0.5749).margin(1e-4));
    CHECK(db(total_attenuation(aL)) == Approx(-4.81).margin(0.005));
    // Independent Runge-Kutta shooting on the first-order system.
    const auto [cs, ci] = coefficients(pump_for(aL) * pump_for(aL), kK);
    CHECK(oracle::shooting_transmission(cs, ci, 0.0, 400.0) == Approx(total_attenuation(aL)).epsilon(1e-9));

    CHECK(std::fabs(total_attenuation(5.0) / (2.0 * std::exp(-5.0)) - 1.0) < 1e-4);
}

TEST_CASE("total attenuation is bounded and decreasing", "[coupled][property]") {
    double prev = 1.0;
    for (int i = 1; i <= 2000; ++i) {
        const double t = total_attenuation(0.01 * i);
        CHECK(t > 0.0);
        CHECK(t <= 1.0);
        CHECK(t < prev);
        prev = t;
    }
}

TEST_CASE("detuned solver equals the uniform solution at zero mismatch", "[coupled]") {
    const auto cfg = circulation(pump_for(2.3, 1.1));
    for (int n : {51, 401, 1601}) {
        const auto u = solve_uniform(cfg, kK, 1.0, Direction::Forward, n);
        const auto d = solve_detuned(cfg, kK, 0.0, 1.0, Direction::Forward, n);
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(u.eps_s[j] - d.eps_s[j]) < 1e-8);
            CHECK(std::abs(u.eps_i[j] - d.eps_i[j]) < 1e-8);
        }
        CHECK(d.total_attenuation == Approx(u.total_attenuation).margin(1e-8));
    }
}

TEST_CASE("detuned solver agrees with Runge-Kutta shooting", "[coupled][property]") {
    oracle::Gen g(41);
    for (int trial = 0; trial < 40; ++trial) {
        const double aL = g.uniform(0.1, 3.0);
        const cplx pump = pump_for(aL, g.uniform(-kPi, kPi));
        const auto cfg = circulation(pump);
        const double alpha = aL / 400.0;
        const double kappa = g.uniform(-5.0, 5.0) * alpha;
        const auto d = solve_detuned(cfg, kK, kappa, 1.0);
        const auto [cs, ci] = coefficients(pump * pump, kK);
        CHECK(d.total_attenuation == Approx(oracle::shooting_transmission(cs, ci, kappa, 400.0)).epsilon(1e-8));
    }
}

TEST_CASE("attenuation is even in the mismatch", "[coupled][property]") {
    const auto cfg = circulation(pump_for(2.0, 0.3));
    const double alpha = 2.0 / 400.0;
    for (int i = 0; i <= 40; ++i) {
        const double kappa = 0.15 * i * alpha;
        CHECK(solve_detuned(cfg, kK, kappa, 1.0).total_attenuation ==
              Approx(solve_detuned(cfg, kK, -kappa, 1.0).total_attenuation).epsilon(1e-12));
    }
}

TEST_CASE("mismatch beyond twice alpha leaves the evanescent regime", "[coupled]") {
    const auto cfg = circulation(pump_for(4.0));
    const double alpha = 4.0 / 400.0;
    const auto monotone = [](const EnvelopeSolution& s) {
        for (std::size_t j = 1; j < s.eps_s.size(); ++j) {
            if (std::abs(s.eps_s[j]) > std::abs(s.eps_s[j - 1]) + 1e-14) return false;
        }
        return true;
    };
    CHECK(monotone(solve_detuned(cfg, kK, 0.0, 1.0)));
    CHECK(monotone(solve_detuned(cfg, kK, 1.0 * alpha, 1.0)));
    CHECK_FALSE(monotone(solve_detuned(cfg, kK, 6.0 * alpha, 1.0)));
    // Deep inside the gap the probe is blocked; far outside it passes.
    CHECK(solve_detuned(cfg, kK, 0.0, 1.0).total_attenuation < 0.04);
    CHECK(solve_detuned(cfg, kK, 30.0 * alpha, 1.0).total_attenuation > 0.95);
    // Transmission rises through the edge.
    CHECK(solve_detuned(cfg, kK, 2.0 * alpha, 1.0).total_attenuation >
          solve_detuned(cfg, kK, 1.0 * alpha, 1.0).total_attenuation);
}

TEST_CASE("photon flux balance along the line", "[coupled][property]") {
    oracle::Gen g(42);
    for (int trial = 0; trial < 100; ++trial) {
        const SignedWavevectors k{g.uniform(0.05, 2.0), -g.uniform(0.05, 3.0), g.uniform(0.05, 2.0)};
        ProcessConfig cfg = circulation(std::polar(g.uniform(0.0, 0.15), g.uniform(-kPi, kPi)));
        const cplx eps0 = std::polar(g.uniform(0.1, 2.0), g.uniform(-kPi, kPi));
        const double kappa = trial % 2 ? 0.0 : g.uniform(-0.02, 0.02);
        const auto sol = kappa == 0.0 ? solve_uniform(cfg, k, eps0) : solve_detuned(cfg, k, kappa, eps0);
        const auto flux = [&](std::size_t j) {
            return k.k_s * std::norm(sol.eps_s[j]) + k.k_i * std::norm(sol.eps_i[j]);
        };
        const double ref = flux(0);
        for (std::size_t j = 0; j < sol.x.size(); ++j) {
            CHECK(std::fabs(flux(j) - ref) <= 1e-9 * k.k_s * std::norm(eps0));
        }
    }
}

TEST_CASE("bandwidth estimate", "[coupled]") {
    const double wp = ghz_to_rad(4.5);
    auto match = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, 0.0, kCell).front();
    auto cfg = circulation(0.0);
    CHECK(bandwidth_estimate(cfg, match) == 0.0);

    cfg.pump_bw = 0.05;
    const auto k = wavevectors_of(match);
    const double alpha = attenuation_constant(cfg, k.k_s, k.k_i, k.k_p);
    const double B = bandwidth_estimate(cfg, match);
    CHECK(B == Approx(2.0 * alpha * std::sqrt(match.omega_i * match.omega_s) / std::sqrt(-k.k_i * k.k_s))
                   .epsilon(1e-12));
    cfg.pump_bw = 0.1;
    CHECK(bandwidth_estimate(cfg, match) == Approx(4.0 * B).epsilon(1e-12));

    // At the critical junction flux the estimate is within a decade of 200 MHz.
    const double kp = self_consistent_wavevector(Mode::Delta, wp, 0.0, kCell);
    const double eps_crit = amplitude_from_flux(quanta_to_reduced(0.12), kp);
    match = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, eps_crit, kCell).front();
    cfg.pump_bw = eps_crit;
    const double mhz = bandwidth_estimate(cfg, match) / kTwoPi / 1e6;
    CHECK(std::fabs(std::log10(mhz / 200.0)) < 1.0);
}

TEST_CASE("two sections with an identity boundary equal one uniform section", "[coupled]") {
    const cplx pump = pump_for(2.0, 0.6);
    auto cfg = circulation(pump);
    const double base = solve_uniform(cfg, kK, 1.0).total_attenuation;
    const auto one = solve_with_defect(cfg, kK, {}, {});
    CHECK(one.forward == Approx(base).epsilon(1e-10));
    CHECK(one.backward == Approx(1.0).epsilon(1e-12));

    // Split at 165.5: phasors refer to each section's left end, and the
    // backward carrier is e^{i k x}.
    const double b = 165.5;
    const cplx left = pump;
    const cplx right = pump * std::exp(cplx(0.0, kK.k_p * b));
    cfg.sections = {Section{0.0, b, 0.0, left}, Section{b, 400.0, 0.0, right}};
    const auto id = DefectScattering::identity();
    const auto two = solve_with_defect(cfg, kK, {id}, {id});
    CHECK(two.forward == Approx(base).epsilon(1e-10));
    CHECK(two.backward == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("an unpumped second section only adds the defect insertion loss", "[coupled]") {
    const double b = 200.5;
    auto cfg = circulation(0.0);
    const cplx pump = std::sqrt(std::polar(1.0, 0.2) * 1.5 / b / alpha_of(1.0));
    cfg.sections = {Section{0.0, b, 0.0, pump}, Section{b, 400.0, 0.0, 0.0}};
    DefectScattering d;
    d.r_left = d.r_right = cplx(0.0, 0.6);
    d.t_lr = d.t_rl = 0.8;
    const auto r = solve_with_defect(cfg, kK, {d}, {d});
    CHECK(r.forward == Approx(total_attenuation(alpha_of(pump) * b) * 0.8).epsilon(1e-10));
}

TEST_CASE("sections must tile the line", "[coupled]") {
    auto cfg = circulation(0.03);
    cfg.sections = {Section{0.0, 150.0, 0.0, 0.03}, Section{160.0, 400.0, 0.0, 0.03}};
    const auto id = DefectScattering::identity();
    CHECK_THROWS_AS(solve_with_defect(cfg, kK, {id}, {id}), Error);
    try {
        solve_with_defect(cfg, kK, {id}, {id});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SectionMismatch);
    }
    cfg.sections = {Section{0.0, 150.0, 0.0, 0.03}, Section{150.0, 390.0, 0.0, 0.03}};
    CHECK_THROWS_AS(solve_with_defect(cfg, kK, {id}, {id}), Error);
    cfg.sections = {Section{0.0, 150.0, 0.0, 0.03}, Section{150.0, 400.0, 0.0, 0.03}};
    CHECK_THROWS_AS(solve_with_defect(cfg, kK, {}, {}), Error);
}

TEST_CASE("one-sided pump without defect leaves the backward probe untouched", "[coupled][property]") {
    oracle::Gen g(43);
    const auto spec = presets::uniform_line(kCell);
    for (int trial = 0; trial < 10; ++trial) {
        const double fp = g.uniform(2.0, 4.5);
        const double amp = g.uniform(0.01, 0.08);
        const auto p = isolation_with_defect(spec, ProcessKind::Circulation, ghz_to_rad(fp), amp);
        CHECK(std::fabs(p.backward_db) < 1e-9);
        CHECK(p.forward_db < 0.0);
    }
}

TEST_CASE("attenuation grows with the square of the pump amplitude on the device", "[coupled]") {
    // Matched point re-solved at each amplitude, including the pump renormalization.
    const double wp = ghz_to_rad(4.63);
    std::vector<double> lx, ly;
    for (double eps = 0.01; eps <= 0.0801; eps += 0.01) {
        const auto m = solve_corrected(ProcessKind::Circulation, Direction::Forward, wp, eps, kCell).front();
        const auto k = wavevectors_of(m);
        lx.push_back(std::log(eps));
        ly.push_back(std::log(attenuation_constant(circulation(eps), k.k_s, k.k_i, k.k_p)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    CHECK(std::fabs(sxy / sxx - 2.0) < 0.1);
}

TEST_CASE("section scattering stays bounded for long sections", "[coupled]") {
    const auto [cs, ci] = coefficients(pump_for(1.0) * pump_for(1.0), kK);
    const auto s = section_scattering(cs, ci, 0.0, 400.0 * 500.0);
    CHECK(std::isfinite(std::abs(s.t_s)));
    CHECK(std::abs(s.t_s) < 1e-200);
    CHECK(std::isfinite(std::abs(s.r_si)));
}
