#include <cmath>

#include "assembly.hpp"
#include "ctwpc/errors.hpp"

namespace ctwpc {

const char* port_name(int port) {
    switch (port) {
        case SigmaLeft: return "sigma_left";
        case DeltaLeft: return "delta_left";
        case SigmaRight: return "sigma_right";
        case DeltaRight: return "delta_right";
        default: return "?";
    }
}

double bloch_impedance(Mode mode, const CellParams& cell, double omega) {
    const double w = std::fabs(omega);
    if (w == 0.0) return std::sqrt(cell.L_J / mode_capacitance(mode, cell));
    // Z_s / Y = L / (C (1 - w^2 L C_J)),  Z_s Y = -w^2 L C / (1 - w^2 L C_J)
    const double r = 1.0 - w * w * cell.L_J * cell.C_J;
    const double C = mode_capacitance(mode, cell);
    const double zy = -w * w * cell.L_J * C / r;
    const double ratio = cell.L_J / (C * r);
    const double q = 1.0 + 0.25 * zy;
    if (!(r > 0.0) || !(q > 0.0)) return 0.0;
    return std::sqrt(ratio / q);
}

double port_impedance(const ChainNetwork& net, int port, double omega) {
    const bool sigma = port == SigmaLeft || port == SigmaRight;
    const double nominal = sigma ? net.ports.z_sigma : net.ports.z_delta;
    if (net.ports.kind == PortImpedance::Fixed) return nominal;
    const double z = bloch_impedance(sigma ? Mode::Sigma : Mode::Delta, net.cell, omega);
    return z > 0.0 ? z : nominal;
}

PortConfig nominal_ports(const CellParams& cell) {
    const auto d = derive_constants(cell);
    return PortConfig{PortImpedance::Fixed, d.Z_sigma, d.Z_delta};
}

PortConfig matched_ports(const CellParams& cell) {
    auto p = nominal_ports(cell);
    p.kind = PortImpedance::Bloch;
    return p;
}

PortConfig taper_ports() { return PortConfig{PortImpedance::Fixed, 89.0, 28.0}; }

ChainNetwork build_chain(const LineSpec& spec, PortConfig ports) {
    const LineSpec s = checked(spec);
    ChainNetwork net;
    net.n_cells = s.n_cells;
    net.cell = s.cell;
    const auto table = sample_disorder(s);
    net.l_a = table.electrode_a;
    net.l_b = table.electrode_b;
    if (ports.z_sigma <= 0.0 || ports.z_delta <= 0.0) {
        const auto d = derive_constants(s.cell);
        if (ports.z_sigma <= 0.0) ports.z_sigma = d.Z_sigma;
        if (ports.z_delta <= 0.0) ports.z_delta = d.Z_delta;
    }
    net.ports = ports;
    return net;
}

std::vector<int> HarmonicBasis::harmonics() const {
    if (M < 1) throw Error(ErrorKind::InvalidSpec, "harmonic basis needs M >= 1");
    std::vector<int> h;
    for (int n = 1; n <= 2 * M - 1; ++n) {
        if (include_even || n % 2 == 1) h.push_back(n);
    }
    return h;
}

namespace detail {

std::vector<Junction> junctions(const ChainNetwork& net) {
    std::vector<Junction> out;
    out.reserve(2 * static_cast<std::size_t>(net.n_cells));
    const double L0 = net.cell.L_J;
    for (int n = 0; n < net.n_cells; ++n) {
        if (!is_open(net.l_a[n])) out.push_back({ChainNetwork::node_a(n), ChainNetwork::node_a(n + 1), L0 / net.l_a[n]});
        if (!is_open(net.l_b[n])) out.push_back({ChainNetwork::node_b(n), ChainNetwork::node_b(n + 1), L0 / net.l_b[n]});
    }
    return out;
}

bool is_sigma(int port) { return port == SigmaLeft || port == SigmaRight; }

std::pair<int, int> port_nodes(const ChainNetwork& net, int port) {
    const int n = (port == SigmaLeft || port == DeltaLeft) ? 0 : net.n_cells;
    return {ChainNetwork::node_a(n), ChainNetwork::node_b(n)};
}

cplx port_conductance(const ChainNetwork& net, int port, double omega) {
    return cplx(0.0, omega * net.cell.L_J / port_impedance(net, port, omega));
}

std::pair<cplx, cplx> port_injection(const ChainNetwork& net, int port, double omega, cplx incident) {
    // A Thevenin source 2 V+ behind Z injects 2 G (V+ / (j w phi0)) on the mode,
    // spread as (1, 1) for Sigma and (1, -1) for Delta.
    const cplx j = 2.0 * port_conductance(net, port, omega) * incident;
    return is_sigma(port) ? std::pair<cplx, cplx>{j, j} : std::pair<cplx, cplx>{j, -j};
}

cplx mode_flux(int port, cplx flux_a, cplx flux_b) {
    return is_sigma(port) ? 0.5 * (flux_a + flux_b) : 0.5 * (flux_a - flux_b);
}

void stamp_linear(const ChainNetwork& net, double omega, bool with_inductance, int stride, int offset,
                  std::vector<Triplet>& out) {
    const double L0 = net.cell.L_J;
    const double w2 = omega * omega;
    const auto idx = [&](int node) { return offset + node * stride; };
    const auto branch = [&](int p, int q, cplx y) {
        out.emplace_back(idx(p), idx(p), y);
        out.emplace_back(idx(q), idx(q), y);
        out.emplace_back(idx(p), idx(q), -y);
        out.emplace_back(idx(q), idx(p), -y);
    };
    const auto shunt = [&](int p, cplx y) { out.emplace_back(idx(p), idx(p), y); };
    const cplx yg(-w2 * L0 * net.cell.C_g, 0.0);
    const cplx yi(-w2 * L0 * net.cell.C_i, 0.0);
    const cplx yj(-w2 * L0 * net.cell.C_J, 0.0);
    for (int n = 0; n <= net.n_cells; ++n) {
        const double share = (n == 0 || n == net.n_cells) ? 0.5 : 1.0;
        shunt(ChainNetwork::node_a(n), share * yg);
        shunt(ChainNetwork::node_b(n), share * yg);
        branch(ChainNetwork::node_a(n), ChainNetwork::node_b(n), share * yi);
    }
    for (int n = 0; n < net.n_cells; ++n) {
        for (int e = 0; e < 2; ++e) {
            const double l = e == 0 ? net.l_a[n] : net.l_b[n];
            if (is_open(l)) continue;
            const int p = e == 0 ? ChainNetwork::node_a(n) : ChainNetwork::node_b(n);
            const int q = e == 0 ? ChainNetwork::node_a(n + 1) : ChainNetwork::node_b(n + 1);
            branch(p, q, yj + (with_inductance ? cplx(L0 / l, 0.0) : cplx{}));
        }
    }
    for (int port = 0; port < kPorts; ++port) {
        // 2 T^t G T with T the (a, b) -> (Sigma, Delta) map.
        const cplx g = port_conductance(net, port, omega);
        const auto [a, b] = port_nodes(net, port);
        const double sign = is_sigma(port) ? 1.0 : -1.0;
        out.emplace_back(idx(a), idx(a), 0.5 * g);
        out.emplace_back(idx(b), idx(b), 0.5 * g);
        out.emplace_back(idx(a), idx(b), 0.5 * sign * g);
        out.emplace_back(idx(b), idx(a), 0.5 * sign * g);
    }
}

}  // namespace detail
}  // namespace ctwpc
