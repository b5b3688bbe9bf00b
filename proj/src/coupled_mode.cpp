#include "ctwpc/coupled_mode.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "ctwpc/errors.hpp"

namespace ctwpc {

namespace {

constexpr cplx kI{0.0, 1.0};

// Lattice constant a = 1 cell.
double coupling_scale(double k_p) { return 0.25 * k_p * k_p; }

// 1/cosh(s l) and tanh(s l)/s, written with e^{-2 s l} once Re(s l) is large
// so that every section ratio stays bounded.
struct Hyperbolic {
    cplx sech;
    cplx th;
};

Hyperbolic hyperbolic(cplx s, double length) {
    const cplx z = s * length;
    Hyperbolic h;
    if (std::abs(z) < 1e-4) {
        const cplx z2 = z * z;
        h.sech = 1.0 / (1.0 + 0.5 * z2 + z2 * z2 / 24.0);
        h.th = length * (1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0);
        return h;
    }
    if (z.real() > 1.0) {
        const cplx e2 = std::exp(-2.0 * z);
        h.sech = 2.0 * std::exp(-z) / (1.0 + e2);
        h.th = (1.0 - e2) / (1.0 + e2) / s;
    } else {
        h.sech = 1.0 / std::cosh(z);
        h.th = std::tanh(z) / s;
    }
    return h;
}

}  // namespace

SignedWavevectors wavevectors_of(const MatchPoint& point) {
    return SignedWavevectors{point.k_s, point.k_i, std::fabs(point.k_p)};
}

cplx pump_product(ProcessKind kind, cplx pump_fw, cplx pump_bw, Direction direction) {
    if (kind == ProcessKind::TunableCoupling) {
        return direction == Direction::Forward ? 2.0 * pump_bw * std::conj(pump_fw)
                                               : 2.0 * pump_fw * std::conj(pump_bw);
    }
    const cplx p = direction == Direction::Forward ? pump_bw : pump_fw;
    return p * p;
}

double attenuation_constant(const ProcessConfig& config, double k_s, double k_i, double k_p, Direction direction) {
    if (!(k_s * k_i < 0.0)) {
        std::ostringstream msg;
        msg << "signal and idler must counterpropagate (k_s = " << k_s << ", k_i = " << k_i << ")";
        throw Error(ErrorKind::WrongPropagationSigns, msg.str());
    }
    const cplx c = pump_product(config.kind, config.pump_fw, config.pump_bw, direction);
    return coupling_scale(k_p) * std::sqrt(-k_i * k_s) * std::abs(c);
}

double total_attenuation(double alpha_length) {
    const double e = std::exp(-alpha_length);
    return 2.0 * e / (1.0 + e * e);
}

EnvelopeSolution solve_uniform(const ProcessConfig& config, const SignedWavevectors& k, cplx eps_s0,
                               Direction direction, int n_points) {
    EnvelopeSolution sol;
    const double L = config.length;
    const double alpha = attenuation_constant(config, k.k_s, k.k_i, k.k_p, direction);
    const cplx c = pump_product(config.kind, config.pump_fw, config.pump_bw, direction);
    const cplx idler_phase = -kI * std::polar(1.0, std::arg(c));
    const double ratio = std::sqrt(k.k_s / -k.k_i);
    const double denom = 1.0 + std::exp(-2.0 * alpha * L);
    sol.alpha = alpha;
    sol.kappa = 0.0;
    sol.total_attenuation = total_attenuation(alpha * L);
    const int n = std::max(n_points, 2);
    sol.x.resize(n);
    sol.eps_s.resize(n);
    sol.eps_i.resize(n);
    for (int j = 0; j < n; ++j) {
        const double x = L * j / (n - 1);
        const double a = std::exp(-alpha * x);
        const double b = std::exp(-alpha * (2.0 * L - x));
        sol.x[j] = x;
        sol.eps_s[j] = eps_s0 * (a + b) / denom;
        sol.eps_i[j] = idler_phase * eps_s0 * ratio * (a - b) / denom;
    }
    return sol;
}

SectionScattering section_scattering(cplx c_s, cplx c_i, double kappa, double length) {
    // Eigenvalues of A = [[0, i c_s], [i c_i, i kappa]] are i kappa/2 +- s.
    cplx s = std::sqrt(-0.25 * kappa * kappa - c_s * c_i);
    if (s.real() < 0.0) s = -s;
    const Hyperbolic h = hyperbolic(s, length);
    const cplx d = 1.0 + 0.5 * kI * kappa * h.th;
    SectionScattering out;
    out.t_s = std::exp(0.5 * kI * kappa * length) * h.sech / d;
    out.t_i = std::exp(-0.5 * kI * kappa * length) * h.sech / d;
    out.r_si = -kI * c_i * h.th / d;
    out.r_is = kI * c_s * h.th / d;
    return out;
}

namespace {

struct Coefficients {
    cplx c_s;
    cplx c_i;
};

Coefficients coefficients(cplx product, const SignedWavevectors& k) {
    const double g = coupling_scale(k.k_p);
    return {g * std::conj(product) * k.k_i, g * product * k.k_s};
}

}  // namespace

EnvelopeSolution solve_detuned(const ProcessConfig& config, const SignedWavevectors& k, double kappa,
                               cplx eps_s0, Direction direction, int n_points) {
    EnvelopeSolution sol;
    const double L = config.length;
    sol.alpha = attenuation_constant(config, k.k_s, k.k_i, k.k_p, direction);
    sol.kappa = kappa;
    const auto [c_s, c_i] = coefficients(pump_product(config.kind, config.pump_fw, config.pump_bw, direction), k);
    const auto whole = section_scattering(c_s, c_i, kappa, L);
    sol.total_attenuation = std::abs(whole.t_s);
    const int n = std::max(n_points, 2);
    sol.x.resize(n);
    sol.eps_s.resize(n);
    sol.eps_i.resize(n);
    for (int j = 0; j < n; ++j) {
        const double x = L * j / (n - 1);
        // Split at x: the signal reaching x is the left section's transmission,
        // dressed by idler round trips against the right section.
        const auto left = section_scattering(c_s, c_i, kappa, x);
        const auto right = section_scattering(c_s, c_i, kappa, L - x);
        const cplx a = left.t_s * eps_s0 / (1.0 - left.r_is * right.r_si);
        const cplx w = right.r_si * a;
        sol.x[j] = x;
        sol.eps_s[j] = a;
        sol.eps_i[j] = w * std::exp(-kI * kappa * x);
    }
    return sol;
}

double bandwidth_estimate(const ProcessConfig& config, const MatchPoint& match) {
    const cplx c = pump_product(config.kind, config.pump_fw, config.pump_bw, match.direction);
    return 0.5 * match.k_p * match.k_p * std::abs(c) * std::sqrt(match.omega_i * match.omega_s);
}

namespace {

// Physical two-port of one coupled pair within a section of length l: the
// "signal" channel enters at the local origin, the "idler" channel enters at l.
struct PairPort {
    cplx sig_out_from_sig;  // signal at l from signal at 0
    cplx sig_out_from_idl;  // signal at l from idler at l
    cplx idl_out_from_sig;  // idler at 0 from signal at 0
    cplx idl_out_from_idl;  // idler at 0 from idler at l
};

PairPort pair_port(cplx product, const SignedWavevectors& k, double kappa, double l) {
    const auto [c_s, c_i] = coefficients(product, k);
    const auto s = section_scattering(c_s, c_i, kappa, l);
    const cplx sig_carrier = std::exp(-kI * k.k_s * l);
    const cplx idl_carrier = std::exp(kI * (k.k_i + kappa) * l);
    return {sig_carrier * s.t_s, sig_carrier * s.r_is * idl_carrier, s.r_si, s.t_i * idl_carrier};
}

}  // namespace

DefectResult solve_with_defect(const ProcessConfig& config, const SignedWavevectors& k,
                               const std::vector<DefectScattering>& defects_s,
                               const std::vector<DefectScattering>& defects_i, double kappa) {
    std::vector<Section> sections = config.sections;
    if (sections.empty()) sections.push_back(Section{0.0, config.length, config.pump_fw, config.pump_bw});
    const auto nsec = sections.size();
    {
        std::ostringstream msg;
        if (std::fabs(sections.front().start) > 1e-12) msg << "first section must start at 0; ";
        if (std::fabs(sections.back().end - config.length) > 1e-9) msg << "last section must end at the line length; ";
        for (std::size_t j = 0; j < nsec; ++j) {
            if (!(sections[j].length() >= 0.0)) msg << "section " << j << " has negative length; ";
            if (j > 0 && std::fabs(sections[j].start - sections[j - 1].end) > 1e-9)
                msg << "sections " << j - 1 << " and " << j << " do not abut; ";
        }
        const bool coupler = config.kind == ProcessKind::TunableCoupling;
        if (defects_s.size() != nsec - 1 || (!coupler && defects_i.size() != nsec - 1))
            msg << "need one defect matrix per internal boundary; ";
        if (!msg.str().empty()) throw Error(ErrorKind::SectionMismatch, msg.str());
    }

    const bool coupler = config.kind == ProcessKind::TunableCoupling;
    // Channels: 0 fS, 1 bS, 2 fI, 3 bI (idlers only for circulation).
    const int nch = coupler ? 2 : 4;
    const auto var = [&](std::size_t sec, int ch, int side) { return static_cast<int>((sec * nch + ch) * 2 + side); };
    const int n = static_cast<int>(nsec) * nch * 2;

    const auto solve = [&](bool forward_input) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
        int row = 0;
        // out - sum(coeff * in) = 0
        const auto pair_rows = [&](const PairPort& p, int sig_in, int sig_out, int idl_in, int idl_out) {
            m(row, sig_out) = 1.0;
            m(row, sig_in) -= p.sig_out_from_sig;
            m(row, idl_in) -= p.sig_out_from_idl;
            ++row;
            m(row, idl_out) = 1.0;
            m(row, sig_in) -= p.idl_out_from_sig;
            m(row, idl_in) -= p.idl_out_from_idl;
            ++row;
        };
        for (std::size_t j = 0; j < nsec; ++j) {
            const Section& sec = sections[j];
            const double l = sec.length();
            if (coupler) {
                const SignedWavevectors kc{k.k_s, -k.k_s, k.k_p};
                const auto p = pair_port(pump_product(config.kind, sec.pump_fw, sec.pump_bw, Direction::Forward), kc,
                                         kappa, l);
                pair_rows(p, var(j, 0, 0), var(j, 0, 1), var(j, 1, 1), var(j, 1, 0));
            } else {
                const auto p1 = pair_port(sec.pump_bw * sec.pump_bw, k, kappa, l);
                pair_rows(p1, var(j, 0, 0), var(j, 0, 1), var(j, 3, 1), var(j, 3, 0));
                // Mirror image: backward signal and forward idler see the forward pump,
                // whose phasor is referenced at the section's right end.
                const cplx fw_right = sec.pump_fw * std::exp(-kI * k.k_p * l);
                const auto p2 = pair_port(fw_right * fw_right, k, kappa, l);
                pair_rows(p2, var(j, 1, 1), var(j, 1, 0), var(j, 2, 0), var(j, 2, 1));
            }
        }
        const auto defect_rows = [&](const DefectScattering& d, std::size_t j, int fwd, int bwd) {
            // backward wave leaving to the left of the boundary
            m(row, var(j, bwd, 1)) = 1.0;
            m(row, var(j, fwd, 1)) -= d.r_left;
            m(row, var(j + 1, bwd, 0)) -= d.t_rl;
            ++row;
            m(row, var(j + 1, fwd, 0)) = 1.0;
            m(row, var(j, fwd, 1)) -= d.t_lr;
            m(row, var(j + 1, bwd, 0)) -= d.r_right;
            ++row;
        };
        for (std::size_t j = 0; j + 1 < nsec; ++j) {
            defect_rows(defects_s[j], j, 0, 1);
            if (!coupler) defect_rows(defects_i[j], j, 2, 3);
        }
        // Line ends: only the probe enters, everything else is absorbed by matched loads.
        for (int ch = 0; ch < nch; ++ch) {
            const bool fwd = ch == 0 || ch == 2;
            m(row, fwd ? var(0, ch, 0) : var(nsec - 1, ch, 1)) = 1.0;
            if (ch == 0 && forward_input) rhs(row) = 1.0;
            if (ch == 1 && !forward_input) rhs(row) = 1.0;
            ++row;
        }
        const Eigen::VectorXcd sol = m.partialPivLu().solve(rhs);
        return forward_input ? std::abs(sol(var(nsec - 1, 0, 1))) : std::abs(sol(var(0, 1, 0)));
    };
    return DefectResult{solve(true), solve(false)};
}

std::vector<Section> pump_sections_backward(double length, double boundary, double k_p, cplx eps_in,
                                            const DefectScattering& defect_at_pump) {
    const cplx bw_at_boundary = eps_in * std::exp(-kI * k_p * (length - boundary));
    Section right{boundary, length, defect_at_pump.r_right * bw_at_boundary, bw_at_boundary};
    const cplx transmitted = defect_at_pump.t_rl * bw_at_boundary;
    Section left{0.0, boundary, cplx{}, transmitted * std::exp(-kI * k_p * boundary)};
    return {left, right};
}

}  // namespace ctwpc
