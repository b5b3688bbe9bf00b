#include "ctwpc/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

const char* to_string(Mode mode) { return mode == Mode::Sigma ? "Sigma" : "Delta"; }

double mode_capacitance(Mode mode, const CellParams& cell) {
    return mode == Mode::Sigma ? cell.sigma_capacitance() : cell.delta_capacitance();
}

double cutoff(Mode mode, const CellParams& cell, double inductance) {
    return 2.0 / std::sqrt(inductance * (mode_capacitance(mode, cell) + 4.0 * cell.C_J));
}

double cutoff(Mode mode, const CellParams& cell) { return cutoff(mode, cell, cell.L_J); }

namespace {

[[noreturn]] void throw_above_cutoff(Mode mode, double omega, double co) {
    std::ostringstream msg;
    msg << to_string(mode) << " mode: f = " << rad_to_ghz(omega) << " GHz is above cutoff "
        << rad_to_ghz(co) << " GHz";
    throw Error(ErrorKind::AboveCutoff, msg.str());
}

double bisect(double lo, double hi, auto&& f) {
    double flo = f(lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double wavevector_with_inductance(Mode mode, double omega, const CellParams& cell, double L) {
    const double co = cutoff(mode, cell, L);
    // A relative slack of 1e-12 absorbs rounding when a caller sums frequencies up to the band edge.
    if (!(omega > 0.0) || omega > co * (1.0 + 1e-12)) {
        if (omega > 0.0) throw_above_cutoff(mode, omega, co);
        throw Error(ErrorKind::AboveCutoff, "wavevector requires a strictly positive frequency");
    }
    // 1 - cos(ka) = C L w^2 / (2 (1 - C_J L w^2)); the half-angle form keeps
    // full precision in the long-wavelength limit.
    const double w2 = omega * omega;
    const double delta = mode_capacitance(mode, cell) * L * w2 / (2.0 * (1.0 - cell.C_J * L * w2));
    const double s = std::sqrt(0.5 * delta);
    if (!(s <= 1.0 + 1e-12)) throw_above_cutoff(mode, omega, co);
    return 2.0 * std::asin(std::fmin(s, 1.0));
}

double renormalized_inductance(Mode mode, const CellParams& cell, const PumpContext& pump) {
    if (pump.epsilon_p == 0.0) return cell.L_J;
    return mode == pump.mode ? spm_inductance(cell.L_J, pump.epsilon_p, pump.k_p)
                             : xpm_inductance(cell.L_J, pump.epsilon_p, pump.k_p);
}

double wavevector(Mode mode, double omega, const CellParams& cell, const std::optional<PumpContext>& renorm) {
    const double L = renorm ? renormalized_inductance(mode, cell, *renorm) : cell.L_J;
    return wavevector_with_inductance(mode, omega, cell, L);
}

double phase_velocity(Mode mode, double omega, const CellParams& cell) {
    return omega / wavevector(mode, omega, cell) / kGiga;
}

double group_velocity(Mode mode, double omega, const CellParams& cell) {
    // d(1 - cos k)/dw = C L w / (1 - C_J L w^2)^2
    const double k = wavevector(mode, omega, cell);
    const double L = cell.L_J;
    const double r = 1.0 - cell.C_J * L * omega * omega;
    return std::sin(k) * r * r / (mode_capacitance(mode, cell) * L * omega) / kGiga;
}

double spm_argument_bound() {
    static const double bound =
        bisect(1.0, 3.5, [](double x) { return 2.0 * std::cyl_bessel_j(1.0, x) / x - 0.5; });
    return bound;
}

double xpm_argument_bound() {
    static const double bound = bisect(0.5, 2.4, [](double x) { return std::cyl_bessel_j(0.0, x) - 0.5; });
    return bound;
}

namespace {

double renorm_argument(double epsilon, double ka, double bound, const char* what) {
    const double x = std::fabs(4.0 * epsilon * std::sin(0.5 * ka));
    if (!(x <= bound)) {
        std::ostringstream msg;
        msg << what << " renormalization argument " << x << " exceeds validity bound " << bound;
        throw Error(ErrorKind::AmplitudeOutOfRange, msg.str());
    }
    return x;
}

}  // namespace

double spm_inductance(double L_J, double epsilon, double ka) {
    const double x = renorm_argument(epsilon, ka, spm_argument_bound(), "SPM");
    if (x == 0.0) return L_J;
    return L_J * x / (2.0 * std::cyl_bessel_j(1.0, x));
}

double xpm_inductance(double L_J, double epsilon, double ka) {
    const double x = renorm_argument(epsilon, ka, xpm_argument_bound(), "XPM");
    if (x == 0.0) return L_J;
    return L_J / std::cyl_bessel_j(0.0, x);
}

double flux_from_amplitude(double epsilon_p, double k_p) { return 4.0 * epsilon_p * std::sin(0.5 * k_p); }

double amplitude_from_flux(double flux, double k_p) { return flux / (4.0 * std::sin(0.5 * k_p)); }

double reduced_to_quanta(double flux) { return flux / kTwoPi; }
double quanta_to_reduced(double flux_quanta) { return flux_quanta * kTwoPi; }

double self_consistent_wavevector(Mode mode, double omega, double epsilon, const CellParams& cell) {
    const auto pump_error = [&](const Error& e) {
        std::ostringstream msg;
        msg << "pump at " << rad_to_ghz(omega) << " GHz does not propagate on the " << to_string(mode)
            << " mode: " << e.what();
        return Error(ErrorKind::PumpAboveCutoff, msg.str());
    };
    double k = 0.0;
    try {
        k = wavevector(mode, omega, cell);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::AboveCutoff) throw pump_error(e);
        throw;
    }
    if (epsilon == 0.0) return k;
    // Fixed point k = k(w; L_spm(eps, k)); the map is a contraction for
    // amplitudes inside the validity bound.
    for (int it = 0; it < 200; ++it) {
        double next = 0.0;
        try {
            next = wavevector_with_inductance(mode, omega, cell, spm_inductance(cell.L_J, epsilon, k));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::AboveCutoff) throw pump_error(e);
            throw;
        }
        if (std::fabs(next - k) < 1e-14) return next;
        k = next;
    }
    throw NonConvergence(200, 0.0, "self-consistent pump wavevector did not converge");
}

PumpContext make_pump(Mode mode, double omega, double epsilon, const CellParams& cell) {
    return PumpContext{epsilon, self_consistent_wavevector(mode, omega, epsilon, cell), mode};
}

}  // namespace ctwpc
