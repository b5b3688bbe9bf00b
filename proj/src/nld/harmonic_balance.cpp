#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "assembly.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

std::complex<double> PumpSolution::junction_flux(int cell, bool electrode_b, int h_index) const {
    const int p = electrode_b ? ChainNetwork::node_b(cell) : ChainNetwork::node_a(cell);
    const int q = electrode_b ? ChainNetwork::node_b(cell + 1) : ChainNetwork::node_a(cell + 1);
    return node_flux(p, h_index) - node_flux(q, h_index);
}

namespace {

using detail::cplx;
using SparseR = Eigen::SparseMatrix<double>;

class HarmonicBalance {
public:
    HarmonicBalance(const ChainNetwork& net, double omega_p, std::vector<int> harmonics, int samples)
        : net_(net), omega_(omega_p), h_(std::move(harmonics)), K_(samples), junctions_(detail::junctions(net)) {
        H_ = static_cast<int>(h_.size());
        n_ = net.n_nodes() * H_;
        h_max_ = h_.back();
        // e^{j m theta_k} for m = 0..2 h_max
        phase_.resize(2 * h_max_ + 1, std::vector<cplx>(K_));
        for (int m = 0; m <= 2 * h_max_; ++m) {
            for (int k = 0; k < K_; ++k) phase_[m][k] = std::polar(1.0, kTwoPi * m * k / K_);
        }
        for (int hi = 0; hi < H_; ++hi) {
            std::vector<detail::Triplet> t;
            detail::stamp_linear(net, h_[hi] * omega_, false, 1, 0, t);
            for (const auto& e : t) linear_.push_back({e.row(), e.col(), hi, e.value()});
        }
    }

    int size() const { return n_; }
    int index(int node, int hi) const { return node * H_ + hi; }

    Eigen::VectorXcd source(const std::vector<Drive>& drives, double scale) const {
        Eigen::VectorXcd j = Eigen::VectorXcd::Zero(n_);
        const int fundamental = fundamental_index();
        for (const auto& d : drives) {
            const auto [a, b] = detail::port_nodes(net_, d.port);
            const auto [ja, jb] =
                detail::port_injection(net_, d.port, omega_, std::polar(scale * d.amplitude, d.phase));
            j(index(a, fundamental)) += ja;
            j(index(b, fundamental)) += jb;
        }
        return j;
    }

    int fundamental_index() const {
        for (int hi = 0; hi < H_; ++hi)
            if (h_[hi] == 1) return hi;
        throw Error(ErrorKind::InvalidSpec, "harmonic basis must contain the fundamental");
    }

    /// Linear response at the fundamental, used as the Newton starting point.
    Eigen::VectorXcd linear_guess(const Eigen::VectorXcd& j) const {
        const int hi = fundamental_index();
        std::vector<detail::Triplet> t;
        detail::stamp_linear(net_, omega_, true, 1, 0, t);
        Eigen::SparseMatrix<cplx> y(net_.n_nodes(), net_.n_nodes());
        y.setFromTriplets(t.begin(), t.end());
        Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(y);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularNetwork, "singular pump network");
        Eigen::VectorXcd rhs(net_.n_nodes());
        for (int node = 0; node < net_.n_nodes(); ++node) rhs(node) = j(index(node, hi));
        const Eigen::VectorXcd x1 = lu.solve(rhs);
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n_);
        for (int node = 0; node < net_.n_nodes(); ++node) x(index(node, hi)) = x1(node);
        return x;
    }

    /// Residual F = Y X + I_nl(X) - J and, when `jac` is given, its real Jacobian.
    Eigen::VectorXcd residual(const Eigen::VectorXcd& x, const Eigen::VectorXcd& j,
                              std::vector<Eigen::Triplet<double>>* jac) const {
        Eigen::VectorXcd f = -j;
        for (const auto& e : linear_) {
            f(index(e.row, e.hi)) += e.value * x(index(e.col, e.hi));
            if (jac) stamp_complex(*jac, index(e.row, e.hi), index(e.col, e.hi), e.value);
        }
        std::vector<double> psi(K_);
        std::vector<cplx> d(H_);
        std::vector<cplx> g(2 * h_max_ + 1);
        for (const auto& jn : junctions_) {
            for (int hi = 0; hi < H_; ++hi) d[hi] = x(index(jn.p, hi)) - x(index(jn.q, hi));
            for (int k = 0; k < K_; ++k) {
                cplx s{};
                for (int hi = 0; hi < H_; ++hi) s += d[hi] * phase_[h_[hi]][k];
                psi[k] = 2.0 * s.real();
            }
            for (int hi = 0; hi < H_; ++hi) {
                cplx acc{};
                for (int k = 0; k < K_; ++k) acc += std::sin(psi[k]) * std::conj(phase_[h_[hi]][k]);
                const cplx current = jn.inv_l * acc / static_cast<double>(K_);
                f(index(jn.p, hi)) += current;
                f(index(jn.q, hi)) -= current;
            }
            if (!jac) continue;
            for (int m = 0; m <= 2 * h_max_; ++m) {
                cplx acc{};
                for (int k = 0; k < K_; ++k) acc += std::cos(psi[k]) * std::conj(phase_[m][k]);
                g[m] = jn.inv_l * acc / static_cast<double>(K_);
            }
            const auto gm = [&](int m) { return m >= 0 ? g[m] : std::conj(g[-m]); };
            for (int hi = 0; hi < H_; ++hi) {
                for (int hj = 0; hj < H_; ++hj) {
                    const cplx A = gm(h_[hi] - h_[hj]);
                    const cplx B = gm(h_[hi] + h_[hj]);
                    const double blk[2][2] = {{A.real() + B.real(), B.imag() - A.imag()},
                                              {A.imag() + B.imag(), A.real() - B.real()}};
                    const int rows[2] = {index(jn.p, hi), index(jn.q, hi)};
                    const int cols[2] = {index(jn.p, hj), index(jn.q, hj)};
                    for (int a = 0; a < 2; ++a) {
                        for (int b = 0; b < 2; ++b) {
                            const double sign = (a == b) ? 1.0 : -1.0;
                            for (int r = 0; r < 2; ++r)
                                for (int c = 0; c < 2; ++c)
                                    jac->emplace_back(2 * rows[a] + r, 2 * cols[b] + c, sign * blk[r][c]);
                        }
                    }
                }
            }
        }
        return f;
    }

private:
    struct LinearEntry {
        int row;
        int col;
        int hi;
        cplx value;
    };

    static void stamp_complex(std::vector<Eigen::Triplet<double>>& jac, int r, int c, cplx y) {
        jac.emplace_back(2 * r, 2 * c, y.real());
        jac.emplace_back(2 * r, 2 * c + 1, -y.imag());
        jac.emplace_back(2 * r + 1, 2 * c, y.imag());
        jac.emplace_back(2 * r + 1, 2 * c + 1, y.real());
    }

    const ChainNetwork& net_;
    double omega_;
    std::vector<int> h_;
    int K_;
    int H_ = 0;
    int n_ = 0;
    int h_max_ = 1;
    std::vector<detail::Junction> junctions_;
    std::vector<std::vector<cplx>> phase_;
    std::vector<LinearEntry> linear_;
};

struct NewtonResult {
    bool converged = false;
    Eigen::VectorXcd x;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> history;
};

NewtonResult newton(const HarmonicBalance& hb, const Eigen::VectorXcd& j, Eigen::VectorXcd x,
                    const PumpOptions& options) {
    NewtonResult res;
    const double norm_j = j.norm();
    if (norm_j == 0.0) {
        res.converged = true;
        res.x = Eigen::VectorXcd::Zero(hb.size());
        return res;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::SparseLU<SparseR, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    const int n = hb.size();
    for (int it = 0;; ++it) {
        triplets.clear();
        const Eigen::VectorXcd f = hb.residual(x, j, &triplets);
        const double r = f.norm() / norm_j;
        res.history.push_back(r);
        res.iterations = it;
        if (r < options.tolerance) {
            res.converged = true;
            res.x = std::move(x);
            res.residual = r;
            return res;
        }
        if (it >= options.max_iterations || !std::isfinite(r)) break;
        SparseR jac(2 * n, 2 * n);
        jac.setFromTriplets(triplets.begin(), triplets.end());
        jac.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(jac);
            analyzed = true;
        }
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) break;
        Eigen::VectorXd rhs(2 * n);
        for (int i = 0; i < n; ++i) {
            rhs(2 * i) = -f(i).real();
            rhs(2 * i + 1) = -f(i).imag();
        }
        const Eigen::VectorXd dz = lu.solve(rhs);
        Eigen::VectorXcd dx(n);
        for (int i = 0; i < n; ++i) dx(i) = cplx(dz(2 * i), dz(2 * i + 1));
        // Backtracking keeps the full Newton step whenever it reduces the residual.
        double lambda = 1.0;
        Eigen::VectorXcd trial;
        for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
            trial = x + lambda * dx;
            const double rt = hb.residual(trial, j, nullptr).norm() / norm_j;
            if (std::isfinite(rt) && rt < r) break;
        }
        x = std::move(trial);
    }
    res.x = std::move(x);
    res.residual = res.history.back();
    return res;
}

void check_drives(const ChainNetwork& net, double omega_p, const std::vector<Drive>& drives,
                  const PumpOptions& options) {
    for (const auto& d : drives) {
        if (d.port < 0 || d.port >= kPorts) throw Error(ErrorKind::InvalidSpec, "drive port out of range");
        const Mode mode = detail::is_sigma(d.port) ? Mode::Sigma : Mode::Delta;
        double k = 0.0;
        try {
            k = wavevector(mode, omega_p, net.cell);
        } catch (const Error& e) {
            throw Error(ErrorKind::PumpAboveCutoff, std::string("pump does not propagate: ") + e.what());
        }
        const double flux = flux_from_amplitude(std::fabs(d.amplitude), k);
        if (flux > quanta_to_reduced(options.ceiling_quanta)) {
            std::ostringstream msg;
            msg << "drive amplitude " << d.amplitude << " gives a junction flux of " << reduced_to_quanta(flux)
                << " flux quanta, above the ceiling " << options.ceiling_quanta;
            throw Error(ErrorKind::AmplitudeOutOfRange, msg.str());
        }
    }
}

}  // namespace

PumpSolution pump_harmonic_balance(const ChainNetwork& net, double omega_p, const std::vector<Drive>& drives,
                                   const HarmonicBasis& basis, const PumpOptions& options) {
    check_drives(net, omega_p, drives, options);
    const auto harmonics = basis.harmonics();
    const HarmonicBalance hb(net, omega_p, harmonics, options.samples);

    PumpSolution sol;
    sol.omega_p = omega_p;
    sol.basis = basis;
    sol.harmonics = harmonics;
    sol.drives = drives;
    sol.samples = options.samples;

    const Eigen::VectorXcd j = hb.source(drives, 1.0);
    NewtonResult res = newton(hb, j, hb.linear_guess(j), options);
    int total_iterations = res.iterations;
    if (!res.converged && options.ramp_steps > 1) {
        // Amplitude continuation: the step shrinks on failure and grows on success.
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(hb.size());
        double scale = 0.0;
        double step = 1.0 / options.ramp_steps;
        const double min_step = step / 64.0;
        PumpOptions inner = options;
        inner.max_iterations = std::min(options.max_iterations, 15);
        while (scale < 1.0 && step >= min_step) {
            const double next = std::min(1.0, scale + step);
            const Eigen::VectorXcd js = hb.source(drives, next);
            res = newton(hb, js, scale == 0.0 ? hb.linear_guess(js) : x, inner);
            total_iterations += res.iterations;
            if (res.converged) {
                x = res.x;
                scale = next;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        if (scale < 1.0) res.converged = false;
    }
    if (!res.converged) {
        std::ostringstream msg;
        msg << "harmonic balance did not converge at f_P = " << rad_to_ghz(omega_p) << " GHz (relative residual "
            << res.residual << " after " << total_iterations << " iterations)";
        throw NonConvergence(total_iterations, res.residual, msg.str());
    }
    sol.flux = std::move(res.x);
    sol.residual = res.residual;
    sol.iterations = total_iterations;
    sol.residual_history = std::move(res.history);
    return sol;
}

PumpSolution zero_pump(const ChainNetwork& net, double omega_p, const HarmonicBasis& basis) {
    PumpSolution sol;
    sol.omega_p = omega_p;
    sol.basis = basis;
    sol.harmonics = basis.harmonics();
    sol.flux = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(net.n_nodes()) * sol.n_harmonics());
    return sol;
}

std::vector<std::vector<double>> pump_harmonics_at_ports(const ChainNetwork& net, const PumpSolution& pump) {
    double incident = 0.0;
    for (const auto& d : pump.drives) {
        // |a|^2 in units where a = j w (flux amplitude) / sqrt(Z)
        const double z = port_impedance(net, d.port, pump.omega_p);
        incident += pump.omega_p * pump.omega_p * d.amplitude * d.amplitude / z;
    }
    std::vector<std::vector<double>> out(kPorts, std::vector<double>(pump.n_harmonics(), 0.0));
    if (incident == 0.0) return out;
    for (int port = 0; port < kPorts; ++port) {
        const auto [a, b] = detail::port_nodes(net, port);
        for (int hi = 0; hi < pump.n_harmonics(); ++hi) {
            const double w = pump.harmonics[hi] * pump.omega_p;
            cplx m = detail::mode_flux(port, pump.node_flux(a, hi), pump.node_flux(b, hi));
            if (pump.harmonics[hi] == 1) {
                for (const auto& d : pump.drives)
                    if (d.port == port) m -= std::polar(d.amplitude, d.phase);
            }
            out[port][hi] = w * w * std::norm(m) / port_impedance(net, port, w) / incident;
        }
    }
    return out;
}

}  // namespace ctwpc
