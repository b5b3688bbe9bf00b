#include "ctwpc/phase_matching.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

const char* to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::Circulation: return "Ci";
        case ProcessKind::CirculationAliased: return "Al";
        case ProcessKind::TunableCoupling: return "Co";
    }
    return "?";
}

const char* to_string(Direction direction) { return direction == Direction::Forward ? "forward" : "backward"; }

std::string GapCurve::name() const { return std::string(to_string(kind)) + "_" + to_string(direction); }

std::pair<double, double> circulation_point_lowfreq(double omega_p, double v_sigma, double v_delta) {
    const double vS = v_sigma;
    const double vI = -v_sigma;
    const double vP = -v_delta;
    const double ws = 2.0 * omega_p * (1.0 / vI - 1.0 / vP) / (1.0 / vS - 1.0 / vI);
    return {ws, ws + 2.0 * omega_p};
}

double coupler_point_lowfreq(double omega_p, double v_sigma, double v_delta) {
    return omega_p * std::fabs(v_sigma / v_delta);
}

double idler_frequency(ProcessKind kind, double omega_s, double omega_p) {
    return kind == ProcessKind::TunableCoupling ? omega_s : omega_s + 2.0 * omega_p;
}

double probe_frequency(ProcessKind kind, Direction direction, double omega_s, double omega_p) {
    switch (kind) {
        case ProcessKind::Circulation:
            return direction == Direction::Forward ? omega_s : omega_s + 2.0 * omega_p;
        case ProcessKind::CirculationAliased:
            // The pump co-propagates with the signal, so a forward probe sits on the idler branch.
            return direction == Direction::Forward ? omega_s + 2.0 * omega_p : omega_s;
        case ProcessKind::TunableCoupling:
            return omega_s;
    }
    return omega_s;
}

namespace {

double residual_from(ProcessKind kind, const ProcessWavevectors& k) {
    switch (kind) {
        case ProcessKind::Circulation: return k.k_s + k.k_i - 2.0 * k.k_p;
        case ProcessKind::CirculationAliased: return k.k_s + k.k_i + 2.0 * k.k_p - kTwoPi;
        case ProcessKind::TunableCoupling: return k.k_s - k.k_p;
    }
    return 0.0;
}

}  // namespace

ProcessWavevectors process_wavevectors(ProcessKind kind, double omega_s, double omega_p,
                                       const PumpContext& pump, const CellParams& cell) {
    const double L_sigma = renormalized_inductance(Mode::Sigma, cell, pump);
    ProcessWavevectors k;
    k.k_p = pump.k_p;
    k.k_s = wavevector_with_inductance(Mode::Sigma, omega_s, cell, L_sigma);
    k.k_i = kind == ProcessKind::TunableCoupling
                ? k.k_s
                : wavevector_with_inductance(Mode::Sigma, omega_s + 2.0 * omega_p, cell, L_sigma);
    return k;
}

double momentum_residual(ProcessKind kind, double omega_s, double omega_p, const PumpContext& pump,
                         const CellParams& cell) {
    return residual_from(kind, process_wavevectors(kind, omega_s, omega_p, pump, cell));
}

double signal_band_limit(ProcessKind kind, double omega_p, const PumpContext& pump, const CellParams& cell) {
    const double co = cutoff(Mode::Sigma, cell, renormalized_inductance(Mode::Sigma, cell, pump));
    return kind == ProcessKind::TunableCoupling ? co : co - 2.0 * omega_p;
}

std::vector<MatchPoint> solve_corrected(ProcessKind kind, Direction direction, double omega_p, double epsilon_p,
                                        const CellParams& cell) {
    const PumpContext pump = make_pump(Mode::Delta, omega_p, epsilon_p, cell);
    const auto wavevectors = [&](double ws) { return process_wavevectors(kind, ws, omega_p, pump, cell); };
    const auto residual = [&](double ws) { return residual_from(kind, wavevectors(ws)); };
    const double upper = signal_band_limit(kind, omega_p, pump, cell);

    std::vector<MatchPoint> roots;
    const double step = ghz_to_rad(0.010);
    const auto make_point = [&](double ws) {
        const auto k = wavevectors(ws);
        MatchPoint p;
        p.kind = kind;
        p.direction = direction;
        p.omega_s = ws;
        p.omega_i = idler_frequency(kind, ws, omega_p);
        p.omega_p = omega_p;
        p.k_s = k.k_s;
        p.k_i = -k.k_i;
        p.k_p = kind == ProcessKind::CirculationAliased ? k.k_p : -k.k_p;
        p.kappa = residual_from(kind, k);
        return p;
    };
    const auto refine = [&](double lo, double hi, double flo) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = residual(mid);
            if (std::fabs(fm) < 1e-10 && hi - lo < 1e-6 * mid) return mid;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        }
        return 0.5 * (lo + hi);
    };

    if (upper > step) {
        double prev_w = step;
        double prev_f = residual(prev_w);
        if (prev_f == 0.0) roots.push_back(make_point(prev_w));
        for (double w = 2.0 * step;; w += step) {
            const bool last = w >= upper;
            const double wc = last ? upper : w;
            const double f = residual(wc);
            if (f == 0.0) {
                roots.push_back(make_point(wc));
            } else if (prev_f != 0.0 && (f < 0.0) != (prev_f < 0.0)) {
                roots.push_back(make_point(refine(prev_w, wc, prev_f)));
            }
            prev_w = wc;
            prev_f = f;
            if (last) break;
        }
    }
    if (roots.empty()) {
        std::ostringstream msg;
        msg << to_string(kind) << " process has no phase-matched signal below cutoff for f_P = "
            << rad_to_ghz(omega_p) << " GHz";
        throw Error(ErrorKind::NoSolutionInBand, msg.str());
    }
    return roots;
}

std::vector<GapCurve> gap_map(const std::vector<std::pair<ProcessKind, Direction>>& curves,
                              const std::vector<double>& pump_ghz, const CellParams& cell, double epsilon_p) {
    std::vector<GapCurve> out;
    for (const auto& [kind, direction] : curves) {
        GapCurve curve{kind, direction, {}};
        for (const double fp : pump_ghz) {
            const double wp = ghz_to_rad(fp);
            try {
                for (const auto& p : solve_corrected(kind, direction, wp, epsilon_p, cell)) {
                    curve.points.emplace_back(fp, rad_to_ghz(probe_frequency(kind, direction, p.omega_s, wp)));
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoSolutionInBand && e.kind() != ErrorKind::PumpAboveCutoff) throw;
            }
        }
        out.push_back(std::move(curve));
    }
    return out;
}

std::vector<std::pair<ProcessKind, Direction>> all_gap_curves() {
    return {{ProcessKind::Circulation, Direction::Forward},
            {ProcessKind::Circulation, Direction::Backward},
            {ProcessKind::CirculationAliased, Direction::Forward},
            {ProcessKind::CirculationAliased, Direction::Backward},
            {ProcessKind::TunableCoupling, Direction::Forward},
            {ProcessKind::TunableCoupling, Direction::Backward}};
}

}  // namespace ctwpc
