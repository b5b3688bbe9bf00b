#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctwpc/device.hpp"
#include "ctwpc/dispersion.hpp"

namespace ctwpc {

enum class ProcessKind { Circulation, CirculationAliased, TunableCoupling };
enum class Direction { Forward, Backward };

const char* to_string(ProcessKind kind);
const char* to_string(Direction direction);

/// A phase-matched (or nearly matched) triplet. Wavevectors are signed in the
/// frame where the signal travels forward, so the idler is negative.
/// omega_i is built from omega_s and omega_p, so energy balance holds exactly.
struct MatchPoint {
    ProcessKind kind = ProcessKind::Circulation;
    Direction direction = Direction::Forward;
    double omega_s = 0.0;
    double omega_i = 0.0;
    double omega_p = 0.0;
    double k_s = 0.0;
    double k_i = 0.0;
    double k_p = 0.0;
    double kappa = 0.0;  // momentum residual, rad/cell
    double delta = 0.0;  // detuning from the matched signal frequency, rad/s
};

/// Linear-dispersion circulation point: w_S = 2 w_P (1/v_I - 1/v_P)/(1/v_S - 1/v_I)
/// with v_S = v_sigma, v_I = -v_sigma, v_P = -v_delta. Returns (w_S, w_I).
std::pair<double, double> circulation_point_lowfreq(double omega_p, double v_sigma, double v_delta);

/// Linear-dispersion coupler point w_S = w_P |v_sigma / v_delta|.
double coupler_point_lowfreq(double omega_p, double v_sigma, double v_delta);

/// Idler frequency of a process for a signal at omega_s.
double idler_frequency(ProcessKind kind, double omega_s, double omega_p);

/// Frequency at which a probe sees the gap when launched in `direction`.
double probe_frequency(ProcessKind kind, Direction direction, double omega_s, double omega_p);

/// Renormalized magnitudes entering the momentum balance.
struct ProcessWavevectors {
    double k_s = 0.0;
    double k_i = 0.0;
    double k_p = 0.0;
};

ProcessWavevectors process_wavevectors(ProcessKind kind, double omega_s, double omega_p,
                                       const PumpContext& pump, const CellParams& cell);

/// Momentum mismatch (rad/cell) for a signal at omega_s:
///   circulation  k_S + k_I - 2 k_P
///   aliased      k_S + k_I + 2 k_P - 2 pi
///   coupling     k_S - k_P
double momentum_residual(ProcessKind kind, double omega_s, double omega_p, const PumpContext& pump,
                         const CellParams& cell);

/// Largest signal frequency for which both signal and idler propagate.
double signal_band_limit(ProcessKind kind, double omega_p, const PumpContext& pump, const CellParams& cell);

/// All matched signal frequencies in (0, Sigma cutoff), ascending, each refined
/// to |residual| < 1e-10 rad/cell. Throws NoSolutionInBand or PumpAboveCutoff.
std::vector<MatchPoint> solve_corrected(ProcessKind kind, Direction direction, double omega_p,
                                        double epsilon_p, const CellParams& cell);

struct GapCurve {
    ProcessKind kind = ProcessKind::Circulation;
    Direction direction = Direction::Forward;
    std::vector<std::pair<double, double>> points;  // (f_pump GHz, f_probe GHz)

    [[nodiscard]] std::string name() const;
};

/// One curve per (kind, direction). Pump frequencies without a solution are skipped.
std::vector<GapCurve> gap_map(const std::vector<std::pair<ProcessKind, Direction>>& curves,
                              const std::vector<double>& pump_ghz, const CellParams& cell, double epsilon_p);

/// The six curves overlaid on the transmission maps.
std::vector<std::pair<ProcessKind, Direction>> all_gap_curves();

}  // namespace ctwpc
