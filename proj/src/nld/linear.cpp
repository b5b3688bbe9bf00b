#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "assembly.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

namespace {

using detail::cplx;
using SparseC = Eigen::SparseMatrix<cplx>;

struct LinearSolve {
    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
};

void factorize(const ChainNetwork& net, double omega, LinearSolve& solver) {
    if (!(omega > 0.0)) throw Error(ErrorKind::InvalidSpec, "linear scattering needs omega > 0");
    std::vector<detail::Triplet> t;
    detail::stamp_linear(net, omega, true, 1, 0, t);
    SparseC y(net.n_nodes(), net.n_nodes());
    y.setFromTriplets(t.begin(), t.end());
    y.makeCompressed();
    solver.lu.compute(y);
    if (solver.lu.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "nodal matrix is singular at f = " << rad_to_ghz(omega) << " GHz";
        throw Error(ErrorKind::SingularNetwork, msg.str());
    }
}

Eigen::VectorXcd injection(const ChainNetwork& net, double omega, int port) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(net.n_nodes());
    const auto [a, b] = detail::port_nodes(net, port);
    const auto [ja, jb] = detail::port_injection(net, port, omega, 1.0);
    rhs(a) += ja;
    rhs(b) += jb;
    return rhs;
}

}  // namespace

Eigen::VectorXcd linear_node_response(const ChainNetwork& net, double omega, int port) {
    LinearSolve solver;
    factorize(net, omega, solver);
    return solver.lu.solve(injection(net, omega, port));
}

SMatrix linear_scattering(const ChainNetwork& net, double omega) {
    LinearSolve solver;
    factorize(net, omega, solver);
    SMatrix s;
    for (int in = 0; in < kPorts; ++in) {
        const Eigen::VectorXcd x = solver.lu.solve(injection(net, omega, in));
        const double z_in = port_impedance(net, in, omega);
        for (int out = 0; out < kPorts; ++out) {
            const auto [a, b] = detail::port_nodes(net, out);
            // b_out / a_in = (X_out - delta) sqrt(Z_in / Z_out) for a unit incident flux wave.
            const cplx m = detail::mode_flux(out, x(a), x(b)) - (out == in ? 1.0 : 0.0);
            s(out, in) = m * std::sqrt(z_in / port_impedance(net, out, omega));
        }
    }
    return s;
}

WaveProfile wave_amplitude_profile(const ChainNetwork& net, int drive_port, double omega) {
    const Eigen::VectorXcd x = linear_node_response(net, omega, drive_port);
    const double z_in = port_impedance(net, drive_port, omega);
    WaveProfile profile;
    for (Mode mode : {Mode::Sigma, Mode::Delta}) {
        auto& fw = mode == Mode::Sigma ? profile.sigma_fw : profile.delta_fw;
        auto& bw = mode == Mode::Sigma ? profile.sigma_bw : profile.delta_bw;
        fw.assign(net.n_cells, 0.0);
        bw.assign(net.n_cells, 0.0);
        if (omega >= cutoff(mode, net.cell)) continue;  // evanescent: nothing travels
        const double k = wavevector(mode, omega, net.cell);
        const double sk = std::sin(k);
        if (std::fabs(sk) < 1e-3) {
            throw Error(ErrorKind::DecompositionIllConditioned,
                        "travelling-wave decomposition is ill-conditioned this close to cutoff");
        }
        const double scale = std::sqrt(z_in / bloch_impedance(mode, net.cell, omega));
        const cplx e = std::polar(1.0, k);
        const int port = mode == Mode::Sigma ? SigmaLeft : DeltaLeft;
        const auto node_mode = [&](int n) {
            return detail::mode_flux(port, x(ChainNetwork::node_a(n)), x(ChainNetwork::node_b(n)));
        };
        for (int n = 0; n < net.n_cells; ++n) {
            // X_n = F + B and X_{n+1} = F e^{-jk} + B e^{jk}
            const cplx xn = node_mode(n);
            const cplx xn1 = node_mode(n + 1);
            const cplx f = (xn * e - xn1) / cplx(0.0, 2.0 * sk);
            fw[n] = std::abs(f) * scale;
            bw[n] = std::abs(xn - f) * scale;
        }
    }
    return profile;
}

ModeTwoPort defect_two_port(const CellParams& cell, Mode mode, double omega, bool open_junction) {
    LineSpec spec = presets::uniform_line(cell, 1);
    if (open_junction) spec.defects = {Defect{0, DefectKind::OpenJunction}};
    const ChainNetwork net = build_chain(spec, matched_ports(cell));
    const SMatrix s = linear_scattering(net, omega);
    const int l = mode == Mode::Sigma ? SigmaLeft : DeltaLeft;
    const int r = mode == Mode::Sigma ? SigmaRight : DeltaRight;
    const cplx deembed = omega < cutoff(mode, cell) ? std::polar(1.0, wavevector(mode, omega, cell)) : cplx(1.0);
    return ModeTwoPort{s(l, l) * deembed, s(r, l) * deembed, s(l, r) * deembed, s(r, r) * deembed};
}

}  // namespace ctwpc
