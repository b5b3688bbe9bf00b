#include "ctwpc/pipelines.hpp"

#include <cmath>

#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

DefectScattering to_defect_scattering(const ModeTwoPort& t) { return {t.r_left, t.t_lr, t.t_rl, t.r_right}; }

double delta_amplitude_for_flux(double omega_p, double flux_quanta, const CellParams& cell) {
    return amplitude_from_flux(quanta_to_reduced(flux_quanta), wavevector(Mode::Delta, omega_p, cell));
}

std::vector<Section> pump_sections_two_sided(double length, double boundary, double k_p, cplx from_left,
                                             cplx from_right, const DefectScattering& d) {
    const cplx f_b = from_left * std::exp(cplx(0.0, -k_p * boundary));
    const cplx g_b = from_right * std::exp(cplx(0.0, -k_p * (length - boundary)));
    const cplx left_out = d.r_left * f_b + d.t_rl * g_b;
    const cplx right_out = d.t_lr * f_b + d.r_right * g_b;
    Section left{0.0, boundary, from_left, left_out * std::exp(cplx(0.0, -k_p * boundary))};
    Section right{boundary, length, right_out, g_b};
    return {left, right};
}

IsolationPoint isolation_with_defect(const LineSpec& line, ProcessKind kind, double omega_p, double eps_in,
                                     double left_ratio, std::optional<double> omega_s) {
    const LineSpec spec = checked(line);
    const CellParams& cell = spec.cell;
    const double length = spec.n_cells;

    IsolationPoint out;
    out.pump_amplitude = eps_in;
    const PumpContext pump = make_pump(Mode::Delta, omega_p, eps_in, cell);
    if (omega_s) {
        out.omega_s = *omega_s;
        out.kappa = momentum_residual(kind, *omega_s, omega_p, pump, cell);
    } else {
        out.omega_s = solve_corrected(kind, Direction::Forward, omega_p, eps_in, cell).front().omega_s;
    }
    const auto pw = process_wavevectors(kind, out.omega_s, omega_p, pump, cell);
    const SignedWavevectors k{pw.k_s, -pw.k_i, pw.k_p};
    const double omega_i = idler_frequency(kind, out.omega_s, omega_p);

    ProcessConfig config;
    config.kind = kind;
    config.omega_p = omega_p;
    config.omega_s = out.omega_s;
    config.length = length;
    const cplx from_left = left_ratio * eps_in;
    std::vector<DefectScattering> ds, di;
    if (spec.defects.empty()) {
        config.sections = {Section{0.0, length, from_left, eps_in * std::exp(cplx(0.0, -pw.k_p * length))}};
    } else {
        // The defect cell is a uniform cell followed by a zero-length scatterer; place it mid-cell.
        const double boundary = spec.defects.front().cell_index + 0.5;
        const auto dp = to_defect_scattering(defect_two_port(cell, Mode::Delta, omega_p));
        config.sections = pump_sections_two_sided(length, boundary, pw.k_p, from_left, eps_in, dp);
        ds.push_back(to_defect_scattering(defect_two_port(cell, Mode::Sigma, out.omega_s)));
        di.push_back(to_defect_scattering(defect_two_port(cell, Mode::Sigma, omega_i)));
    }
    const auto r = solve_with_defect(config, k, ds, di, out.kappa);
    out.forward_db = 20.0 * std::log10(r.forward);
    out.backward_db = 20.0 * std::log10(r.backward);
    return out;
}

FrequencySweep scattering_sweep(const ChainNetwork& net, int out_port, int in_port, double f_min_ghz,
                                double f_max_ghz, int points) {
    if (points < 2 || !(f_max_ghz > f_min_ghz) || !(f_min_ghz > 0.0))
        throw Error(ErrorKind::InvalidSpec, "sweep needs f_min > 0, f_max > f_min and at least 2 points");
    FrequencySweep sweep;
    for (int i = 0; i < points; ++i) {
        const double f = f_min_ghz + (f_max_ghz - f_min_ghz) * i / (points - 1);
        sweep.freq_hz.push_back(f * kGiga);
        sweep.s.push_back(linear_scattering(net, ghz_to_rad(f))(out_port, in_port));
    }
    return sweep;
}

ModeFractions mode_fractions(const SMatrix& s, Mode mode) {
    const bool sigma = mode == Mode::Sigma;
    const int in = sigma ? SigmaLeft : DeltaLeft;
    const int same_far = sigma ? SigmaRight : DeltaRight;
    const int other_near = sigma ? DeltaLeft : SigmaLeft;
    const int other_far = sigma ? DeltaRight : SigmaRight;
    return {std::norm(s(same_far, in)), std::norm(s(in, in)), std::norm(s(other_far, in)),
            std::norm(s(other_near, in))};
}

}  // namespace ctwpc
