#pragma once

#include <complex>
#include <vector>

#include "ctwpc/phase_matching.hpp"

namespace ctwpc {

using cplx = std::complex<double>;

/// A stretch of line with uniform pump amplitudes. Pump phasors are the
/// physical complex amplitudes at the section's left end (carriers
/// e^{i(w t - k x)} forward, e^{i(w t + k x)} backward).
struct Section {
    double start = 0.0;  // cells
    double end = 0.0;    // cells
    cplx pump_fw{};
    cplx pump_bw{};

    [[nodiscard]] double length() const { return end - start; }
};

struct ProcessConfig {
    ProcessKind kind = ProcessKind::Circulation;
    double omega_p = 0.0;
    double omega_s = 0.0;
    cplx pump_fw{};
    cplx pump_bw{};
    double length = 400.0;          // cells
    std::vector<Section> sections;  // empty: one uniform section with pump_fw / pump_bw
};

/// Signed wavevectors (rad/cell) in the frame where the signal travels forward.
/// k_s > 0 and k_i < 0 for the counterpropagating processes handled here.
struct SignedWavevectors {
    double k_s = 0.0;
    double k_i = 0.0;
    double k_p = 0.0;  // magnitude
};

SignedWavevectors wavevectors_of(const MatchPoint& point);

struct EnvelopeSolution {
    std::vector<double> x;
    std::vector<cplx> eps_s;
    std::vector<cplx> eps_i;
    double alpha = 0.0;
    double total_attenuation = 1.0;  // |eps_S(L) / eps_S(0)|
    double kappa = 0.0;
};

/// Pump product entering the coupled equations for a signal launched in
/// `direction`: eps_P^2 for circulation (the pump travelling against the
/// signal), 2 eps_bw eps_fw^* for the coupler.
cplx pump_product(ProcessKind kind, cplx pump_fw, cplx pump_bw, Direction direction);

/// alpha = (a^2/4) k_P^2 sqrt(-k_I k_S) |pump product|. Throws WrongPropagationSigns unless k_I k_S < 0.
double attenuation_constant(const ProcessConfig& config, double k_s, double k_i, double k_p,
                            Direction direction = Direction::Forward);

/// Matched-line amplitude transmission 2 e^{-aL} / (1 + e^{-2aL}) = 1/cosh(aL).
double total_attenuation(double alpha_length);

/// Closed-form envelopes of a uniform, phase-matched line with eps_I(L) = 0.
EnvelopeSolution solve_uniform(const ProcessConfig& config, const SignedWavevectors& k, cplx eps_s0,
                               Direction direction = Direction::Forward, int n_points = 401);

/// Envelopes with a momentum mismatch kappa (rad/cell), solved as a two-point
/// boundary problem with the exact section propagator.
EnvelopeSolution solve_detuned(const ProcessConfig& config, const SignedWavevectors& k, double kappa,
                               cplx eps_s0, Direction direction = Direction::Forward, int n_points = 401);

/// B = (a^2/2) k_P^2 |pump product| sqrt(w_I w_S), in rad/s.
double bandwidth_estimate(const ProcessConfig& config, const MatchPoint& match);

/// Envelope-level scattering of one section for the pair (signal entering
/// left, idler entering right). Amplitudes are envelopes, carrier phases excluded.
struct SectionScattering {
    cplx t_s;   // eps_S(l) from eps_S(0)
    cplx t_i;   // w(0) from w(l)
    cplx r_si;  // w(0) from eps_S(0)
    cplx r_is;  // eps_S(l) from w(l)
};

/// Coupled system eps_S' = i c_s w, w' = i c_i eps_S + i kappa w over a length l,
/// where w = eps_I e^{i kappa x}. Evaluated with bounded ratios for any alpha l.
SectionScattering section_scattering(cplx c_s, cplx c_i, double kappa, double length);

/// Two-port amplitude scattering of a zero-length defect on the Sigma mode at
/// one frequency (physical wave amplitudes).
struct DefectScattering {
    cplx r_left{0.0, 0.0};   // incident from the left, reflected to the left
    cplx t_lr{1.0, 0.0};     // left to right
    cplx t_rl{1.0, 0.0};     // right to left
    cplx r_right{0.0, 0.0};  // incident from the right, reflected to the right

    static DefectScattering identity() { return {}; }
};

struct DefectResult {
    double forward = 1.0;   // |amplitude| transmission for a signal launched from the left
    double backward = 1.0;  // |amplitude| transmission for a signal launched from the right
};

/// Signal transmission through sections separated by defects. defects_s[j]
/// and defects_i[j] sit between section j and j+1, at the signal and idler
/// frequencies. Idler power leaving the line and Delta-mode leakage are lost.
/// Throws SectionMismatch unless the sections tile [0, length] contiguously.
DefectResult solve_with_defect(const ProcessConfig& config, const SignedWavevectors& k,
                               const std::vector<DefectScattering>& defects_s,
                               const std::vector<DefectScattering>& defects_i, double kappa = 0.0);

/// Pump phasors on both sides of a defect at `boundary` for a pump of
/// amplitude eps_in launched backward from the right end. The right section
/// carries the incident and reflected waves, the left one the transmitted wave.
std::vector<Section> pump_sections_backward(double length, double boundary, double k_p, cplx eps_in,
                                            const DefectScattering& defect_at_pump);

}  // namespace ctwpc
