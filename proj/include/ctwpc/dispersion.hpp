#pragma once

#include <optional>

#include "ctwpc/device.hpp"

namespace ctwpc {

enum class Mode { Sigma, Delta };

const char* to_string(Mode mode);

/// A strong wave travelling on `mode` with reduced amplitude epsilon_p and
/// wavevector k_p (rad/cell). Weak waves on the other mode see cross phase
/// modulation; waves on the same mode see self phase modulation.
struct PumpContext {
    double epsilon_p = 0.0;
    double k_p = 0.0;
    Mode mode = Mode::Delta;
};

/// Ground capacitance per cell seen by a mode.
double mode_capacitance(Mode mode, const CellParams& cell);

/// Cutoff angular frequency 2/sqrt(L (C + 4 C_J)) for an inductance L.
double cutoff(Mode mode, const CellParams& cell, double inductance);
double cutoff(Mode mode, const CellParams& cell);

/// Wavevector of the lumped line, in (0, pi]. Throws AboveCutoff past the band edge.
double wavevector(Mode mode, double omega, const CellParams& cell,
                  const std::optional<PumpContext>& renorm = std::nullopt);

/// Same dispersion with an explicit junction inductance.
double wavevector_with_inductance(Mode mode, double omega, const CellParams& cell, double inductance);

/// Inductance the weak wave on `mode` experiences in presence of the strong wave.
double renormalized_inductance(Mode mode, const CellParams& cell, const PumpContext& pump);

double phase_velocity(Mode mode, double omega, const CellParams& cell);  // cell/ns
double group_velocity(Mode mode, double omega, const CellParams& cell);  // cell/ns

/// L_J x / (2 J1(x)), x = 4 eps sin(ka/2).
double spm_inductance(double L_J, double epsilon, double ka);
/// L_J / J0(x), x = 4 eps sin(ka/2).
double xpm_inductance(double L_J, double epsilon, double ka);

/// Largest x = 4 eps sin(ka/2) for which the single-harmonic renormalization is trusted:
/// where 2 J1(x)/x (resp. J0(x)) has dropped to one half.
double spm_argument_bound();
double xpm_argument_bound();

/// Peak junction flux 4 eps sin(k/2), in units of the reduced flux quantum.
double flux_from_amplitude(double epsilon_p, double k_p);
double amplitude_from_flux(double flux, double k_p);

/// Conversions between reduced flux (units of hbar/2e) and flux quanta.
double reduced_to_quanta(double flux);
double quanta_to_reduced(double flux_quanta);

/// Pump wavevector solved self-consistently with its own SPM renormalization.
/// Throws PumpAboveCutoff when no propagating solution exists.
double self_consistent_wavevector(Mode mode, double omega, double epsilon, const CellParams& cell);

/// Convenience: a PumpContext with the self-consistent pump wavevector.
PumpContext make_pump(Mode mode, double omega, double epsilon, const CellParams& cell);

}  // namespace ctwpc
