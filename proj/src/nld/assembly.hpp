#pragma once

// Shared nodal stamps for the linear, harmonic-balance and sideband solvers.
// Everything is written in the flux domain: unknowns are node fluxes in units
// of the reduced flux quantum and currents are normalized by phi0 / L_J, so an
// inductor L contributes L_J / L and a capacitor C contributes -w^2 L_J C.

#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "ctwpc/nld.hpp"

namespace ctwpc::detail {

using cplx = std::complex<double>;
using Triplet = Eigen::Triplet<cplx>;

struct Junction {
    int p = 0;           // node at the left end of the cell
    int q = 0;           // node at the right end
    double inv_l = 0.0;  // L_J / L
};

/// Active (non-open) junctions of the chain.
std::vector<Junction> junctions(const ChainNetwork& net);

/// Appends the linear admittance at omega for the block located at
/// `offset + node * stride`. Junction inductances are included only when asked.
void stamp_linear(const ChainNetwork& net, double omega, bool with_inductance, int stride, int offset,
                  std::vector<Triplet>& out);

/// Normalized port conductance j w L_J / Z for a port.
cplx port_conductance(const ChainNetwork& net, int port, double omega);

/// Nodes (electrode a, electrode b) at the end carrying the port.
std::pair<int, int> port_nodes(const ChainNetwork& net, int port);
bool is_sigma(int port);

/// Current injected at the two port nodes by a mode source whose incident
/// flux wave has amplitude `incident` (complex).
std::pair<cplx, cplx> port_injection(const ChainNetwork& net, int port, double omega, cplx incident);

/// Mode flux at a port from the two node fluxes.
cplx mode_flux(int port, cplx flux_a, cplx flux_b);

}  // namespace ctwpc::detail
