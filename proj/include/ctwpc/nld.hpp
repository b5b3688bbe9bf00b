#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "ctwpc/device.hpp"
#include "ctwpc/dispersion.hpp"

namespace ctwpc {

/// Port order used everywhere: Sigma-left, Delta-left, Sigma-right, Delta-right.
enum Port : int { SigmaLeft = 0, DeltaLeft = 1, SigmaRight = 2, DeltaRight = 3 };
inline constexpr int kPorts = 4;

const char* port_name(int port);

enum class PortImpedance {
    Fixed,  // constant reference impedances per mode
    Bloch,  // image impedance of the uniform lumped line; reflectionless for a uniform chain
};

struct PortConfig {
    PortImpedance kind = PortImpedance::Fixed;
    double z_sigma = 0.0;  // Ohm, used by Fixed and as fallback above cutoff
    double z_delta = 0.0;
};

/// Lumped two-electrode chain: nodes 0..N on electrodes a and b, junctions
/// (L, C_J) between consecutive nodes, C_g to ground and C_i between electrodes.
/// End nodes carry half shunt capacitances so that every cell is a symmetric pi.
struct ChainNetwork {
    int n_cells = 0;
    CellParams cell;               // nominal values (L_J is the normalization inductance)
    std::vector<double> l_a;       // per-cell junction inductance, electrode a; +inf when open
    std::vector<double> l_b;
    PortConfig ports;

    [[nodiscard]] int n_nodes() const { return 2 * (n_cells + 1); }
    static int node_a(int n) { return 2 * n; }
    static int node_b(int n) { return 2 * n + 1; }
};

/// Reference impedance of a port at angular frequency omega (|omega| for negative frequencies).
double port_impedance(const ChainNetwork& net, int port, double omega);

/// Image impedance sqrt(Z_s / (Y (1 + Z_s Y / 4))) of the uniform line, or
/// nullopt-like 0 when the mode does not propagate.
double bloch_impedance(Mode mode, const CellParams& cell, double omega);

ChainNetwork build_chain(const LineSpec& spec, PortConfig ports = {});

/// Default ports: Fixed at the nominal mode impedances.
PortConfig nominal_ports(const CellParams& cell);
PortConfig matched_ports(const CellParams& cell);  // Bloch
PortConfig taper_ports();                            // Fixed, 89 / 28 Ohm

using SMatrix = Eigen::Matrix<std::complex<double>, kPorts, kPorts>;

/// Small-signal 4x4 power-wave scattering matrix, S(out, in).
SMatrix linear_scattering(const ChainNetwork& net, double omega);

/// Linear node flux phasors (normalized by the amplitude of the incident wave)
/// for a unit incident wave on `port`.
Eigen::VectorXcd linear_node_response(const ChainNetwork& net, double omega, int port);

struct WaveProfile {
    std::vector<double> sigma_fw, sigma_bw, delta_fw, delta_bw;  // per cell, |amplitude| / incident
};

/// Forward/backward travelling amplitudes per cell and mode, in square-root
/// power units relative to the incident wave. Throws DecompositionIllConditioned
/// when |sin(k)| < 1e-3 for a propagating mode.
WaveProfile wave_amplitude_profile(const ChainNetwork& net, int drive_port, double omega);

struct HarmonicBasis {
    int M = 3;                 // odd harmonics 1, 3, ..., 2M-1
    bool include_even = false; // when true: every harmonic 1..2M-1

    [[nodiscard]] std::vector<int> harmonics() const;
};

struct Drive {
    int port = DeltaRight;
    double amplitude = 0.0;  // reduced flux amplitude of the incident mode wave
    double phase = 0.0;
};

struct PumpOptions {
    double tolerance = 1e-10;    // relative residual
    int max_iterations = 50;
    int samples = 64;            // time samples per pump period
    double ceiling_quanta = 0.3; // largest junction flux accepted, in flux quanta
    int ramp_steps = 5;           // first continuation step is 1/ramp_steps of the drive
};

struct PumpSolution {
    double omega_p = 0.0;
    HarmonicBasis basis;
    std::vector<int> harmonics;
    std::vector<Drive> drives;
    Eigen::VectorXcd flux;  // node-major: flux[node * H + h_index], reduced units
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;  // of the final (full amplitude) Newton run
    int samples = 64;

    [[nodiscard]] int n_harmonics() const { return static_cast<int>(harmonics.size()); }
    [[nodiscard]] std::complex<double> node_flux(int node, int h_index) const {
        return flux[node * n_harmonics() + h_index];
    }
    /// Junction flux phasor across cell n on electrode a (b), harmonic index h.
    [[nodiscard]] std::complex<double> junction_flux(int cell, bool electrode_b, int h_index) const;
};

PumpSolution pump_harmonic_balance(const ChainNetwork& net, double omega_p, const std::vector<Drive>& drives,
                                   const HarmonicBasis& basis = {}, const PumpOptions& options = {});

/// Relative power (|b|^2 over the total incident drive power) leaving each port
/// at each harmonic of the pump solution. result[port][h_index].
std::vector<std::vector<double>> pump_harmonics_at_ports(const ChainNetwork& net, const PumpSolution& pump);

struct SignalScattering {
    double omega_probe = 0.0;
    double omega_p = 0.0;
    int n_sidebands = 2;
    std::vector<double> frequencies;  // omega_probe + 2 n omega_p, n = -N..N
    std::vector<int> inputs;          // ports driven at omega_probe
    /// s[input_index](out_port, sideband_index)
    std::vector<Eigen::Matrix<std::complex<double>, kPorts, Eigen::Dynamic>> s;
    bool truncation_warning = false;
    double outer_power_fraction = 0.0;

    [[nodiscard]] std::complex<double> at(int out_port, int in_port, int n = 0) const;
};

SignalScattering signal_sidebands(const ChainNetwork& net, const PumpSolution& pump, double omega_probe,
                                  int n_sidebands = 2,
                                  const std::vector<int>& inputs = {SigmaLeft, SigmaRight});

/// Zero-pump solution usable with signal_sidebands (reduces to linear_scattering).
PumpSolution zero_pump(const ChainNetwork& net, double omega_p, const HarmonicBasis& basis = {});

struct TransmissionMap {
    std::vector<double> pump_ghz;
    std::vector<double> probe_ghz;
    /// forward_db[i_pump][i_probe]: Sigma-left to Sigma-right; NaN where the pump failed.
    std::vector<std::vector<double>> forward_db;
    std::vector<std::vector<double>> backward_db;
    std::vector<bool> pump_converged;
};

struct MapOptions {
    std::vector<Drive> drives_template;  // used as given at every pump frequency
    /// When set, replaces the template: drives for a given pump angular frequency.
    std::function<std::vector<Drive>(double omega_p)> drives_at;
    HarmonicBasis basis;
    PumpOptions pump;
    int n_sidebands = 2;
    int threads = 1;
};

TransmissionMap transmission_map(const ChainNetwork& net, const std::vector<double>& pump_ghz,
                                 const std::vector<double>& probe_ghz, const MapOptions& options);

/// Two-port view of a defect cell on one mode, de-embedded by one uniform cell
/// so that a defect-free cell maps to the identity (t = 1, r = 0).
struct ModeTwoPort {
    std::complex<double> r_left, t_lr, t_rl, r_right;
};

ModeTwoPort defect_two_port(const CellParams& cell, Mode mode, double omega, bool open_junction = true);

}  // namespace ctwpc
