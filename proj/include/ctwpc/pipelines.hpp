#pragma once

// Multi-module workflows shared by the command line and the acceptance suite.

#include <optional>

#include "ctwpc/coupled_mode.hpp"
#include "ctwpc/nld.hpp"
#include "ctwpc/tdr.hpp"

namespace ctwpc {

DefectScattering to_defect_scattering(const ModeTwoPort& two_port);

/// Incident Delta-mode amplitude whose linear wave produces a junction flux
/// of `flux_quanta` (in flux quanta) at omega_p.
double delta_amplitude_for_flux(double omega_p, double flux_quanta, const CellParams& cell);

struct IsolationPoint {
    double pump_amplitude = 0.0;  // incident reduced flux amplitude
    double omega_s = 0.0;
    double kappa = 0.0;
    double forward_db = 0.0;   // signal launched from the left, against the pump
    double backward_db = 0.0;  // signal launched from the right
};

/// Pump phasors on both sides of a defect at `boundary` for pumps entering
/// from the left (forward) and from the right (backward) Delta ports.
std::vector<Section> pump_sections_two_sided(double length, double boundary, double k_p, cplx from_left,
                                             cplx from_right, const DefectScattering& defect_at_pump);

/// Signal transmission of the envelope model on a line whose pump enters from
/// the right Delta port, plus `left_ratio` times that amplitude from the left.
/// The first defect of `spec` (if any) splits the line: it scatters the pump
/// and signal/idler. Without omega_s the signal sits on the matched point of
/// `kind` for this pump amplitude.
IsolationPoint isolation_with_defect(const LineSpec& spec, ProcessKind kind, double omega_p, double pump_amplitude,
                                     double left_ratio = 0.0, std::optional<double> omega_s = std::nullopt);

/// One S(out, in) trace of linear_scattering on a uniform grid.
FrequencySweep scattering_sweep(const ChainNetwork& net, int out_port, int in_port, double f_min_ghz,
                                double f_max_ghz, int points);

/// Power fractions for a wave entering on the left port of `mode`.
struct ModeFractions {
    double transmitted = 0.0;     // same mode, other end
    double reflected = 0.0;       // same mode, same end
    double leaked_forward = 0.0;  // other mode, other end
    double leaked_backward = 0.0; // other mode, same end
};

ModeFractions mode_fractions(const SMatrix& s, Mode mode);

}  // namespace ctwpc
