#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "assembly.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

std::complex<double> SignalScattering::at(int out_port, int in_port, int n) const {
    const auto it = std::find(inputs.begin(), inputs.end(), in_port);
    if (it == inputs.end()) throw Error(ErrorKind::InvalidSpec, "port was not driven in this sideband solve");
    if (n < -n_sidebands || n > n_sidebands) throw Error(ErrorKind::InvalidSpec, "sideband index out of range");
    return s[it - inputs.begin()](out_port, n + n_sidebands);
}

namespace {

using detail::cplx;

/// Fourier coefficients c_m of cos(psi(t)) for one junction, m = 0..m_max.
std::vector<cplx> cos_coefficients(const PumpSolution& pump, const detail::Junction& jn, int m_max) {
    const int K = std::max(pump.samples, 4 * m_max + 4);
    const int H = pump.n_harmonics();
    std::vector<cplx> d(H);
    for (int hi = 0; hi < H; ++hi) d[hi] = pump.node_flux(jn.p, hi) - pump.node_flux(jn.q, hi);
    std::vector<double> cos_psi(K);
    for (int k = 0; k < K; ++k) {
        const double theta = kTwoPi * k / K;
        cplx s{};
        for (int hi = 0; hi < H; ++hi) s += d[hi] * std::polar(1.0, pump.harmonics[hi] * theta);
        cos_psi[k] = std::cos(2.0 * s.real());
    }
    std::vector<cplx> c(m_max + 1);
    for (int m = 0; m <= m_max; ++m) {
        cplx acc{};
        for (int k = 0; k < K; ++k) acc += cos_psi[k] * std::polar(1.0, -kTwoPi * m * k / K);
        c[m] = acc / static_cast<double>(K);
    }
    return c;
}

}  // namespace

SignalScattering signal_sidebands(const ChainNetwork& net, const PumpSolution& pump, double omega_probe,
                                  int n_sidebands, const std::vector<int>& inputs) {
    if (!(omega_probe > 0.0)) throw Error(ErrorKind::InvalidSpec, "probe frequency must be positive");
    if (n_sidebands < 0) throw Error(ErrorKind::InvalidSpec, "sideband count must be >= 0");
    const int N = n_sidebands;
    const int S = 2 * N + 1;
    const int nodes = net.n_nodes();
    const int dim = nodes * S;

    SignalScattering out;
    out.omega_probe = omega_probe;
    out.omega_p = pump.omega_p;
    out.n_sidebands = N;
    out.inputs = inputs;
    for (int n = -N; n <= N; ++n) out.frequencies.push_back(omega_probe + 2.0 * n * pump.omega_p);

    std::vector<detail::Triplet> t;
    for (int si = 0; si < S; ++si) {
        const double w = out.frequencies[si];
        detail::stamp_linear(net, w, false, S, si, t);
        if (std::fabs(w) < 1e-9 * omega_probe) {
            // A sideband sitting at DC has no capacitive or port loading; ground it weakly.
            for (int node = 0; node < nodes; ++node) t.emplace_back(node * S + si, node * S + si, cplx(1e-9, 0.0));
        }
    }
    // Parametric coupling through the pump-modulated junction inductance.
    for (const auto& jn : detail::junctions(net)) {
        const auto c = cos_coefficients(pump, jn, 4 * N);
        for (int si = 0; si < S; ++si) {
            for (int sj = 0; sj < S; ++sj) {
                const int m = 2 * (si - sj);
                const cplx y = jn.inv_l * (m >= 0 ? c[m] : std::conj(c[-m]));
                const int p_i = jn.p * S + si, q_i = jn.q * S + si;
                const int p_j = jn.p * S + sj, q_j = jn.q * S + sj;
                t.emplace_back(p_i, p_j, y);
                t.emplace_back(q_i, q_j, y);
                t.emplace_back(p_i, q_j, -y);
                t.emplace_back(q_i, p_j, -y);
            }
        }
    }
    Eigen::SparseMatrix<cplx> a(dim, dim);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu(a);
    if (lu.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "sideband network is singular at f_S = " << rad_to_ghz(omega_probe) << " GHz";
        throw Error(ErrorKind::SingularNetwork, msg.str());
    }

    for (int in : inputs) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
        const auto [a_in, b_in] = detail::port_nodes(net, in);
        const auto [ja, jb] = detail::port_injection(net, in, omega_probe, 1.0);
        rhs(a_in * S + N) += ja;
        rhs(b_in * S + N) += jb;
        const Eigen::VectorXcd x = lu.solve(rhs);
        const double z_in = port_impedance(net, in, omega_probe);

        Eigen::Matrix<cplx, kPorts, Eigen::Dynamic> s(kPorts, S);
        double total = 0.0, outer = 0.0;
        for (int port = 0; port < kPorts; ++port) {
            const auto [a, b] = detail::port_nodes(net, port);
            for (int si = 0; si < S; ++si) {
                const double w = out.frequencies[si];
                cplx m = detail::mode_flux(port, x(a * S + si), x(b * S + si));
                if (port == in && si == N) m -= 1.0;
                // Power waves scale with w * flux / sqrt(Z).
                s(port, si) = (w / omega_probe) * m * std::sqrt(z_in / port_impedance(net, port, w));
                const double p = std::norm(s(port, si));
                total += p;
                if (N > 0 && (si == 0 || si == S - 1)) outer += p;
            }
        }
        const double fraction = total > 0.0 ? outer / total : 0.0;
        out.outer_power_fraction = std::max(out.outer_power_fraction, fraction);
        out.s.push_back(std::move(s));
    }
    out.truncation_warning = out.outer_power_fraction > 0.01;
    return out;
}

}  // namespace ctwpc
